#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mitodet/config.hpp"
#include "mitodet/formats.hpp"
#include "mitodet/pipeline.hpp"

namespace mitodet {

// File-level drivers behind the CLI / C API. Images pair with annotation
// files by stem: roi_0.png <-> roi_0.json in the same directory.

struct BuildDatasetOptions {
    int mask_radius = 45;
    int patch_size = 140;
    double match_radius = 30.0;
    bool include_hard_negatives = true;
    std::optional<std::filesystem::path> stage1_dir;  // detection files, enables fp/tp/fn buckets
    int sample_crops = 0;                             // training crop pairs per image
    int crop_size = 512;
    double p_foreground = 0.5;
    std::uint64_t seed = 1;
};

DatasetManifest run_build_dataset(const std::filesystem::path& annotations_dir,
                                  const std::filesystem::path& images_dir,
                                  const std::filesystem::path& out_dir,
                                  const BuildDatasetOptions& options);

// One prediction file per image: <out_dir>/<image_id>.json. Detections below
// the decision threshold are dropped from "detections" but every scored
// candidate is kept under "candidates" so threshold sweeps stay possible.
// stage1_only skips verification entirely and emits the screening candidates
// (peak segmentation probabilities, no forest needed), which is what
// build-dataset consumes to assemble classifier training sets.
void run_detect(const PipelineConfig& cfg, const std::filesystem::path& images_dir,
                const std::filesystem::path& out_dir, bool stage1_only = false);

ClassificationFile run_classify(const PipelineConfig& cfg,
                                const std::filesystem::path& patches_dir,
                                const std::filesystem::path& out_file);

struct FitPaths {
    std::filesystem::path forest;
    std::filesystem::path report;
};

FitResult run_fit_ensemble(const PipelineConfig& cfg, const std::filesystem::path& train_dir,
                           const std::filesystem::path& val_dir, const FitPaths& out);

// Auto-detects the prediction flavor: a directory of detection files scores
// against annotation files (point matching, grouped report); a single
// classification file scores against a patch-labels file (balanced
// accuracy). The optimal matcher exists for sensitivity analysis of the
// matching protocol; greedy is the reporting default.
nlohmann::json run_evaluate(const std::filesystem::path& pred_path,
                            const std::filesystem::path& gt_path, double radius,
                            const std::filesystem::path& out_report,
                            Matcher matcher = Matcher::greedy);

nlohmann::json run_sweep(const std::filesystem::path& pred_path,
                         const std::filesystem::path& gt_path, double radius, double epsilon,
                         double grid, const std::filesystem::path& out_file);

struct DemoOptions {
    int image_size = 1024;
    int n_images = 2;      // training images; one extra val and one test image
    int n_mitoses = 12;    // per image
    int n_mimickers = 12;  // per image
    int n_patches = 24;    // track-2 loose patches
    std::uint64_t seed = 7;
};

// Writes a ready-to-run synthetic world: ROI rasters with annotations,
// oracle backend artifacts, track-2 patches with labels, and a config.toml
// wired to all of it.
void run_make_demo(const std::filesystem::path& out_dir, const DemoOptions& options);

}  // namespace mitodet

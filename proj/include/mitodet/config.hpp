#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mitodet/ensemble.hpp"
#include "mitodet/models.hpp"
#include "mitodet/tiling.hpp"
#include "mitodet/tta.hpp"

namespace mitodet {

struct Track1Config {
    int window = 512;
    int overlap = 256;
    double seg_threshold = 0.5;
    int mask_radius = 45;
    int patch_size = 140;
    double dedup_radius = 30.0;
    double match_radius = 30.0;
    double decision_threshold = 0.5;
    std::int64_t min_area = 10;
    int connectivity = 8;
    MergeRule merge = MergeRule::mean;
    double neg_pos_ratio = 5.0;      // RF training balance, <= 0 disables
    double tta_crop_fraction = 0.9;  // classifier TTA crop lower bound
    StumpForestParams forest_params;
    double sweep_epsilon = 0.01;
    double sweep_grid = 0.001;
    BackendSpec segmenter;
    std::vector<BackendSpec> classifiers;  // exactly 3
    std::filesystem::path forest_path;

    void validate() const;
};

struct Track2Config {
    int input_size = 128;
    int tta_k = 5;
    double decision_threshold = 0.5;
    std::vector<BackendSpec> classifiers;  // exactly 3

    void validate() const;
};

struct PipelineConfig {
    std::uint64_t seed = 42;
    int workers = 0;  // 0 = all hardware threads
    Track1Config track1;
    Track2Config track2;
    AugmentConfig augment;
};

// Loads the declarative TOML config. `overrides` are dotted keys
// ("track1.decision_threshold", "workers", ...) applied on top of the file,
// which is how CLI flags win over config keys. Relative artifact paths are
// resolved against the config file's directory. Sections may be omitted;
// whichever track is actually run validates its own section.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::map<std::string, std::string>& overrides = {});

PipelineConfig config_from_toml_json(const nlohmann::json& root,
                                     const std::filesystem::path& base_dir);

// Serializes a ready-to-run config (used by the demo fixture generator).
std::string config_to_toml(const PipelineConfig& config);

}  // namespace mitodet

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mitodet/core.hpp"
#include "mitodet/dataset.hpp"
#include "mitodet/ensemble.hpp"
#include "mitodet/evaluation.hpp"

namespace mitodet {

// Every file the tool writes carries {"schema": <name>, "version": <major>}.
// Readers reject a schema mismatch or a major version above what they
// support; a missing version is accepted for hand-written inputs.
inline constexpr int kSchemaVersion = 1;

void check_schema(const nlohmann::json& j, const std::string& expected_schema,
                  const std::string& context);

// ---- annotations ----------------------------------------------------------

struct AnnotationFile {
    ImageRef image;
    std::vector<Annotation> points;
};

AnnotationFile annotation_file_from_json(const nlohmann::json& j, const std::string& context);
nlohmann::json annotation_file_to_json(const AnnotationFile& file);
AnnotationFile read_annotation_file(const std::filesystem::path& path);
void write_annotation_file(const std::filesystem::path& path, const AnnotationFile& file);

// ---- predictions ----------------------------------------------------------

struct DetectionFile {
    std::string image_id;
    double threshold = 0.0;
    std::vector<Detection> detections;  // sorted by score descending
};

nlohmann::json detection_file_to_json(const DetectionFile& file);
DetectionFile detection_file_from_json(const nlohmann::json& j, const std::string& context);
DetectionFile read_detection_file(const std::filesystem::path& path);
void write_detection_file(const std::filesystem::path& path, const DetectionFile& file);

struct PatchPrediction {
    std::string id;
    double probability = 0.0;
    std::string label;  // "atypical" | "normal"
};

struct ClassificationFile {
    std::string source;  // patches directory name, informational
    double threshold = 0.5;
    std::vector<PatchPrediction> patches;
};

nlohmann::json classification_file_to_json(const ClassificationFile& file);
ClassificationFile classification_file_from_json(const nlohmann::json& j,
                                                 const std::string& context);
ClassificationFile read_classification_file(const std::filesystem::path& path);
void write_classification_file(const std::filesystem::path& path, const ClassificationFile& file);

// Ground-truth labels for loose patches (track-2 evaluation).
std::map<std::string, Label> read_patch_labels(const std::filesystem::path& path);
void write_patch_labels(const std::filesystem::path& path,
                        const std::map<std::string, Label>& labels);

// ---- fitted forest --------------------------------------------------------

nlohmann::json forest_to_json(const StumpForest& forest);
StumpForest forest_from_json(const nlohmann::json& j, const std::string& context);
StumpForest read_forest(const std::filesystem::path& path);
void write_forest(const std::filesystem::path& path, const StumpForest& forest);

// ---- reports --------------------------------------------------------------

nlohmann::json threshold_report_to_json(const ThresholdReport& report);
ThresholdReport threshold_report_from_json(const nlohmann::json& j, const std::string& context);
void write_threshold_report(const std::filesystem::path& path, const ThresholdReport& report);

nlohmann::json eval_report_to_json(const EvalReport& report);
void write_eval_report(const std::filesystem::path& path, const EvalReport& report);

// ---- dataset manifest -----------------------------------------------------

struct ManifestEntry {
    std::string patch_path;  // relative to the manifest
    std::string label;       // "pos" | "neg"
    std::string source_image;
    double x = 0.0;
    double y = 0.0;
    Provenance provenance = Provenance::gt;
};

struct DatasetManifest {
    PatchCounts counts;
    std::vector<ManifestEntry> patches;
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j, const std::string& context);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// ---- shared helpers -------------------------------------------------------

nlohmann::json load_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mitodet

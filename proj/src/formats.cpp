#include "mitodet/formats.hpp"

#include <algorithm>

#include "mitodet/fsio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mitodet {

namespace {

const char* kAnnotationsSchema = "mitodet.annotations";
const char* kDetectionsSchema = "mitodet.detections";
const char* kClassificationsSchema = "mitodet.classifications";
const char* kPatchLabelsSchema = "mitodet.patch_labels";
const char* kForestSchema = "mitodet.forest";
const char* kThresholdSchema = "mitodet.threshold_report";
const char* kEvalSchema = "mitodet.eval_report";
const char* kManifestSchema = "mitodet.manifest";

json schema_header(const char* schema) {
    return json{{"schema", schema}, {"version", kSchemaVersion}};
}

double get_prob(const json& j, const char* key, const std::string& context) {
    const double v = j.at(key).get<double>();
    if (!(v >= 0.0 && v <= 1.0))
        throw BadInput(context + ": '" + key + "' = " + std::to_string(v) + " outside [0,1]");
    return v;
}

}  // namespace

void check_schema(const json& j, const std::string& expected_schema, const std::string& context) {
    if (!j.is_object()) throw BadInput(context + ": expected a JSON object");
    if (j.contains("schema")) {
        const std::string schema = j["schema"].get<std::string>();
        if (schema != expected_schema)
            throw BadInput(context + ": schema is '" + schema + "', expected '" + expected_schema +
                           "'");
    }
    if (j.contains("version")) {
        const int version = j["version"].get<int>();
        if (version > kSchemaVersion)
            throw BadInput(context + ": file version " + std::to_string(version) +
                           " is newer than supported version " + std::to_string(kSchemaVersion));
    }
}

json load_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw BadInput("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const fs::path& path, const json& j) {
    atomic_write_file(path, j.dump(2) + "\n");
}

// ---- annotations ----------------------------------------------------------

AnnotationFile annotation_file_from_json(const json& j, const std::string& context) {
    check_schema(j, kAnnotationsSchema, context);
    AnnotationFile file;
    file.image.id = j.at("image_id").get<std::string>();
    file.image.width = j.at("width").get<int>();
    file.image.height = j.at("height").get<int>();
    if (j.contains("mpp") && !j["mpp"].is_null()) file.image.mpp = j["mpp"].get<double>();
    if (j.contains("group") && !j["group"].is_null())
        file.image.group = j["group"].get<std::string>();
    file.image.validate();

    if (j.contains("points")) {
        for (const auto& p : j.at("points")) {
            Annotation a;
            a.image = file.image.id;
            a.point = Point{p.at("x").get<double>(), p.at("y").get<double>()};
            a.label = label_from_string(p.at("label").get<std::string>());
            if (!file.image.contains(a.point))
                throw BadInput(context + ": point (" + std::to_string(a.point.x) + "," +
                               std::to_string(a.point.y) + ") outside image '" + file.image.id +
                               "'");
            file.points.push_back(std::move(a));
        }
    }
    return file;
}

json annotation_file_to_json(const AnnotationFile& file) {
    json j = schema_header(kAnnotationsSchema);
    j["image_id"] = file.image.id;
    j["width"] = file.image.width;
    j["height"] = file.image.height;
    if (file.image.mpp) j["mpp"] = *file.image.mpp;
    if (file.image.group) j["group"] = *file.image.group;
    json points = json::array();
    for (const Annotation& a : file.points)
        points.push_back(json{{"x", a.point.x}, {"y", a.point.y}, {"label", to_string(a.label)}});
    j["points"] = std::move(points);
    return j;
}

AnnotationFile read_annotation_file(const fs::path& path) {
    return annotation_file_from_json(load_json_file(path), path.string());
}

void write_annotation_file(const fs::path& path, const AnnotationFile& file) {
    write_json_file(path, annotation_file_to_json(file));
}

// ---- predictions ----------------------------------------------------------

json detection_file_to_json(const DetectionFile& file) {
    json j = schema_header(kDetectionsSchema);
    j["image_id"] = file.image_id;
    j["threshold"] = file.threshold;
    json dets = json::array();
    for (const Detection& d : file.detections)
        dets.push_back(json{{"x", d.point.x}, {"y", d.point.y}, {"score", d.score}});
    j["detections"] = std::move(dets);
    return j;
}

DetectionFile detection_file_from_json(const json& j, const std::string& context) {
    check_schema(j, kDetectionsSchema, context);
    DetectionFile file;
    file.image_id = j.at("image_id").get<std::string>();
    file.threshold = j.value("threshold", 0.0);
    for (const auto& d : j.at("detections")) {
        const double score = get_prob(d, "score", context);
        file.detections.push_back(make_detection(
            Point{d.at("x").get<double>(), d.at("y").get<double>()}, score,
            Stage::verified, file.image_id));
    }
    std::stable_sort(file.detections.begin(), file.detections.end(),
                     [](const Detection& a, const Detection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return yx_less(a.point, b.point);
                     });
    return file;
}

DetectionFile read_detection_file(const fs::path& path) {
    return detection_file_from_json(load_json_file(path), path.string());
}

void write_detection_file(const fs::path& path, const DetectionFile& file) {
    DetectionFile sorted = file;
    std::stable_sort(sorted.detections.begin(), sorted.detections.end(),
                     [](const Detection& a, const Detection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return yx_less(a.point, b.point);
                     });
    write_json_file(path, detection_file_to_json(sorted));
}

json classification_file_to_json(const ClassificationFile& file) {
    json j = schema_header(kClassificationsSchema);
    j["source"] = file.source;
    j["threshold"] = file.threshold;
    json patches = json::array();
    for (const PatchPrediction& p : file.patches)
        patches.push_back(json{{"id", p.id}, {"probability", p.probability}, {"label", p.label}});
    j["patches"] = std::move(patches);
    return j;
}

ClassificationFile classification_file_from_json(const json& j, const std::string& context) {
    check_schema(j, kClassificationsSchema, context);
    ClassificationFile file;
    file.source = j.value("source", "");
    file.threshold = j.value("threshold", 0.5);
    for (const auto& p : j.at("patches")) {
        PatchPrediction pred;
        pred.id = p.at("id").get<std::string>();
        pred.probability = get_prob(p, "probability", context);
        pred.label = p.at("label").get<std::string>();
        if (pred.label != "atypical" && pred.label != "normal")
            throw BadInput(context + ": patch label must be 'atypical' or 'normal'");
        file.patches.push_back(std::move(pred));
    }
    return file;
}

ClassificationFile read_classification_file(const fs::path& path) {
    return classification_file_from_json(load_json_file(path), path.string());
}

void write_classification_file(const fs::path& path, const ClassificationFile& file) {
    write_json_file(path, classification_file_to_json(file));
}

std::map<std::string, Label> read_patch_labels(const fs::path& path) {
    const json j = load_json_file(path);
    check_schema(j, kPatchLabelsSchema, path.string());
    std::map<std::string, Label> labels;
    for (const auto& e : j.at("labels")) {
        const std::string id = e.at("id").get<std::string>();
        if (!labels.emplace(id, label_from_string(e.at("label").get<std::string>())).second)
            throw BadInput(path.string() + ": duplicate patch id '" + id + "'");
    }
    return labels;
}

void write_patch_labels(const fs::path& path, const std::map<std::string, Label>& labels) {
    json j = schema_header(kPatchLabelsSchema);
    json arr = json::array();
    for (const auto& [id, label] : labels)
        arr.push_back(json{{"id", id}, {"label", to_string(label)}});
    j["labels"] = std::move(arr);
    write_json_file(path, j);
}

// ---- fitted forest --------------------------------------------------------

json forest_to_json(const StumpForest& forest) {
    json j = schema_header(kForestSchema);
    j["n_estimators"] = forest.params.n_estimators;
    j["max_depth"] = forest.params.max_depth;
    j["seed"] = forest.seed;
    j["n_features"] = forest.n_features;
    j["layout"] = json{{"n_models", forest.layout.n_models}, {"n_tta", forest.layout.n_tta}};
    j["classifiers"] = forest.classifier_names;
    json trees = json::array();
    for (const Stump& s : forest.trees)
        trees.push_back(json{{"feature", s.feature},
                             {"threshold", s.threshold},
                             {"left", s.left},
                             {"right", s.right}});
    j["trees"] = std::move(trees);
    return j;
}

StumpForest forest_from_json(const json& j, const std::string& context) {
    check_schema(j, kForestSchema, context);
    StumpForest forest;
    forest.params.n_estimators = j.at("n_estimators").get<int>();
    forest.params.max_depth = j.at("max_depth").get<int>();
    forest.params.validate();
    forest.seed = j.value("seed", 0ull);
    forest.n_features = j.at("n_features").get<int>();
    if (j.contains("layout")) {
        forest.layout.n_models = j["layout"].value("n_models", 3);
        forest.layout.n_tta = j["layout"].value("n_tta", 3);
    }
    if (j.contains("classifiers"))
        forest.classifier_names = j["classifiers"].get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) {
        Stump s;
        s.feature = t.at("feature").get<int>();
        s.threshold = t.at("threshold").get<double>();
        s.left = get_prob(t, "left", context);
        s.right = get_prob(t, "right", context);
        if (s.feature < 0 || s.feature >= forest.n_features)
            throw BadInput(context + ": tree references feature " + std::to_string(s.feature) +
                           " outside [0," + std::to_string(forest.n_features) + ")");
        forest.trees.push_back(s);
    }
    if (static_cast<int>(forest.trees.size()) != forest.params.n_estimators)
        throw BadInput(context + ": tree count disagrees with n_estimators");
    return forest;
}

StumpForest read_forest(const fs::path& path) {
    return forest_from_json(load_json_file(path), path.string());
}

void write_forest(const fs::path& path, const StumpForest& forest) {
    write_json_file(path, forest_to_json(forest));
}

// ---- reports --------------------------------------------------------------

json threshold_report_to_json(const ThresholdReport& report) {
    json j = schema_header(kThresholdSchema);
    j["best_threshold"] = report.best_threshold;
    j["best_f1"] = report.best_f1;
    j["epsilon"] = report.epsilon;
    j["grid"] = report.grid;
    j["plateau"] = json{{"low", report.plateau_low}, {"high", report.plateau_high}};
    json curve = json::array();
    for (const auto& [t, f1] : report.curve)
        curve.push_back(json{{"threshold", t}, {"f1", f1}});
    j["curve"] = std::move(curve);
    return j;
}

ThresholdReport threshold_report_from_json(const json& j, const std::string& context) {
    check_schema(j, kThresholdSchema, context);
    ThresholdReport report;
    report.best_threshold = j.at("best_threshold").get<double>();
    report.best_f1 = j.at("best_f1").get<double>();
    report.epsilon = j.value("epsilon", 0.01);
    report.grid = j.value("grid", 0.001);
    report.plateau_low = j.at("plateau").at("low").get<double>();
    report.plateau_high = j.at("plateau").at("high").get<double>();
    if (j.contains("curve"))
        for (const auto& e : j["curve"])
            report.curve.emplace_back(e.at("threshold").get<double>(), e.at("f1").get<double>());
    return report;
}

void write_threshold_report(const fs::path& path, const ThresholdReport& report) {
    write_json_file(path, threshold_report_to_json(report));
}

namespace {

json group_metrics_to_json(const GroupMetrics& g) {
    return json{{"tp", g.counts.tp},
                {"fp", g.counts.fp},
                {"fn", g.counts.fn},
                {"precision", g.prf.precision},
                {"recall", g.prf.recall},
                {"f1", g.prf.f1}};
}

}  // namespace

json eval_report_to_json(const EvalReport& report) {
    json j = schema_header(kEvalSchema);
    j["radius"] = report.radius;
    j["overall"] = group_metrics_to_json(report.overall);
    json groups = json::object();
    for (const auto& [gid, metrics] : report.per_group) groups[gid] = group_metrics_to_json(metrics);
    j["per_group"] = std::move(groups);
    j["macro"] = json{{"precision", report.macro.precision},
                      {"recall", report.macro.recall},
                      {"f1", report.macro.f1}};
    return j;
}

void write_eval_report(const fs::path& path, const EvalReport& report) {
    write_json_file(path, eval_report_to_json(report));
}

// ---- dataset manifest -----------------------------------------------------

json manifest_to_json(const DatasetManifest& manifest) {
    json j = schema_header(kManifestSchema);
    j["counts"] = json{{"gt", manifest.counts.gt},
                       {"tp", manifest.counts.tp},
                       {"fn", manifest.counts.fn},
                       {"fp", manifest.counts.fp}};
    json patches = json::array();
    for (const ManifestEntry& e : manifest.patches) {
        patches.push_back(json{{"patch_path", e.patch_path},
                               {"label", e.label},
                               {"source_image", e.source_image},
                               {"x", e.x},
                               {"y", e.y},
                               {"provenance", to_string(e.provenance)}});
    }
    j["patches"] = std::move(patches);
    return j;
}

DatasetManifest manifest_from_json(const json& j, const std::string& context) {
    check_schema(j, kManifestSchema, context);
    DatasetManifest manifest;
    const auto& c = j.at("counts");
    manifest.counts.gt = c.at("gt").get<std::int64_t>();
    manifest.counts.tp = c.at("tp").get<std::int64_t>();
    manifest.counts.fn = c.at("fn").get<std::int64_t>();
    manifest.counts.fp = c.at("fp").get<std::int64_t>();
    for (const auto& p : j.at("patches")) {
        ManifestEntry e;
        e.patch_path = p.at("patch_path").get<std::string>();
        e.label = p.at("label").get<std::string>();
        if (e.label != "pos" && e.label != "neg")
            throw BadInput(context + ": manifest label must be 'pos' or 'neg'");
        e.source_image = p.at("source_image").get<std::string>();
        e.x = p.at("x").get<double>();
        e.y = p.at("y").get<double>();
        e.provenance = provenance_from_string(p.at("provenance").get<std::string>());
        manifest.patches.push_back(std::move(e));
    }
    return manifest;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
    write_json_file(path, manifest_to_json(manifest));
}

DatasetManifest read_manifest(const fs::path& path) {
    return manifest_from_json(load_json_file(path), path.string());
}

}  // namespace mitodet

#include "mitodet/config.hpp"

#include <sstream>

#include "mitodet/toml.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mitodet {

void Track1Config::validate() const {
    if (window < 1 || overlap < 0 || overlap >= window)
        throw BadInput("track1: require window >= 1 and 0 <= overlap < window");
    if (!(seg_threshold >= 0.0 && seg_threshold <= 1.0))
        throw BadInput("track1: seg_threshold must be in [0,1]");
    if (mask_radius < 1) throw BadInput("track1: mask_radius must be >= 1");
    if (patch_size < 1) throw BadInput("track1: patch_size must be >= 1");
    if (dedup_radius < 0.0) throw BadInput("track1: dedup_radius must be >= 0");
    if (!(match_radius > 0.0)) throw BadInput("track1: match_radius must be > 0");
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
        throw BadInput("track1: decision_threshold must be in [0,1]");
    if (min_area < 1) throw BadInput("track1: min_area must be >= 1");
    if (connectivity != 4 && connectivity != 8)
        throw BadInput("track1: connectivity must be 4 or 8");
    if (!(tta_crop_fraction > 0.0 && tta_crop_fraction <= 1.0))
        throw BadInput("track1: tta_crop_fraction must be in (0,1]");
    forest_params.validate();
    if (segmenter.name.empty()) throw BadInput("track1: segmenter backend not configured");
    if (classifiers.size() != 3)
        throw BadInput("track1: exactly 3 classifiers required, got " +
                       std::to_string(classifiers.size()));
}

void Track2Config::validate() const {
    if (input_size < 1) throw BadInput("track2: input_size must be >= 1");
    if (tta_k != 5) throw BadInput("track2: tta_k must be 5");
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0))
        throw BadInput("track2: decision_threshold must be in [0,1]");
    if (classifiers.size() != 3)
        throw BadInput("track2: exactly 3 classifiers required, got " +
                       std::to_string(classifiers.size()));
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

BackendSpec parse_backend(const json& j, const std::string& kind, const fs::path& base,
                          int default_input_size) {
    BackendSpec spec;
    spec.kind = kind;
    spec.name = j.value("name", std::string());
    spec.backend = j.at("backend").get<std::string>();
    if (spec.name.empty()) spec.name = spec.backend;
    spec.path = resolve(base, j.value("path", std::string())).string();
    spec.input_size = j.value("input_size", default_input_size);
    if (spec.input_size < 1) throw BadInput("backend '" + spec.name + "': input_size must be >= 1");
    return spec;
}

// Applies "a.b.c=value" overrides onto the parsed tree. Values are parsed
// with TOML scalar rules so "0.4", "8", "true" and strings all work.
void apply_override(json& root, const std::string& dotted, const std::string& value) {
    json parsed;
    try {
        parsed = parse_toml("v = " + value).at("v");
    } catch (const BadInput&) {
        parsed = value;  // fall back to a raw string
    }
    json* node = &root;
    std::istringstream keys(dotted);
    std::string key, next;
    if (!std::getline(keys, key, '.')) throw BadInput("empty override key");
    while (std::getline(keys, next, '.')) {
        node = &(*node)[key];
        if (node->is_array()) node = node->empty() ? nullptr : &node->back();
        if (!node || (!node->is_object() && !node->is_null()))
            throw BadInput("override '" + dotted + "' does not name a table path");
        key = next;
    }
    (*node)[key] = parsed;
}

}  // namespace

PipelineConfig config_from_toml_json(const json& root, const fs::path& base_dir) {
    if (root.contains("schema_version") && root["schema_version"].get<int>() > 1)
        throw BadInput("config schema_version " + root["schema_version"].dump() +
                       " is newer than supported version 1");
    PipelineConfig cfg;
    cfg.seed = root.value("seed", 42ull);
    cfg.workers = root.value("workers", 0);

    if (root.contains("track1")) {
        const json& t1 = root["track1"];
        Track1Config& c = cfg.track1;
        c.window = t1.value("window", c.window);
        c.overlap = t1.value("overlap", c.overlap);
        c.seg_threshold = t1.value("seg_threshold", c.seg_threshold);
        c.mask_radius = t1.value("mask_radius", c.mask_radius);
        c.patch_size = t1.value("patch_size", c.patch_size);
        c.dedup_radius = t1.value("dedup_radius", c.dedup_radius);
        c.match_radius = t1.value("match_radius", c.match_radius);
        c.decision_threshold = t1.value("decision_threshold", c.decision_threshold);
        c.min_area = t1.value("min_area", c.min_area);
        c.connectivity = t1.value("connectivity", c.connectivity);
        c.neg_pos_ratio = t1.value("neg_pos_ratio", c.neg_pos_ratio);
        c.tta_crop_fraction = t1.value("tta_crop_fraction", c.tta_crop_fraction);
        c.forest_params.n_estimators = t1.value("n_estimators", c.forest_params.n_estimators);
        c.forest_params.max_depth = t1.value("max_depth", c.forest_params.max_depth);
        c.sweep_epsilon = t1.value("sweep_epsilon", c.sweep_epsilon);
        c.sweep_grid = t1.value("sweep_grid", c.sweep_grid);
        if (t1.contains("merge")) {
            const std::string m = t1["merge"].get<std::string>();
            if (m == "mean") c.merge = MergeRule::mean;
            else if (m == "max") c.merge = MergeRule::max;
            else throw BadInput("track1: merge must be 'mean' or 'max'");
        }
        if (t1.contains("segmenter"))
            c.segmenter = parse_backend(t1["segmenter"], "segmenter", base_dir, c.window);
        if (t1.contains("classifiers"))
            for (const auto& e : t1["classifiers"])
                c.classifiers.push_back(parse_backend(e, "classifier", base_dir, c.patch_size));
        c.forest_path = resolve(base_dir, t1.value("forest", std::string()));
    }

    if (root.contains("track2")) {
        const json& t2 = root["track2"];
        Track2Config& c = cfg.track2;
        c.input_size = t2.value("input_size", c.input_size);
        c.tta_k = t2.value("tta_k", c.tta_k);
        c.decision_threshold = t2.value("decision_threshold", c.decision_threshold);
        if (t2.contains("classifiers"))
            for (const auto& e : t2["classifiers"])
                c.classifiers.push_back(parse_backend(e, "classifier", base_dir, c.input_size));
    }

    if (root.contains("augment")) {
        const json& a = root["augment"];
        AugmentConfig& c = cfg.augment;
        c.crop_prob = a.value("crop_prob", c.crop_prob);
        c.crop_min_scale = a.value("crop_min_scale", c.crop_min_scale);
        c.flip_prob = a.value("flip_prob", c.flip_prob);
        c.rotate_prob = a.value("rotate_prob", c.rotate_prob);
        c.brightness_lo = a.value("brightness_lo", c.brightness_lo);
        c.brightness_hi = a.value("brightness_hi", c.brightness_hi);
        c.hue_shift_deg = a.value("hue_shift_deg", c.hue_shift_deg);
        c.saturation_lo = a.value("saturation_lo", c.saturation_lo);
        c.saturation_hi = a.value("saturation_hi", c.saturation_hi);
        c.noise_sigma = a.value("noise_sigma", c.noise_sigma);
        c.blur_prob = a.value("blur_prob", c.blur_prob);
        c.blur_sigma = a.value("blur_sigma", c.blur_sigma);
        c.validate();
    }

    if (cfg.workers < 0) throw BadInput("workers must be >= 0");
    return cfg;
}

PipelineConfig load_config(const fs::path& path,
                           const std::map<std::string, std::string>& overrides) {
    json root = parse_toml_file(path);
    for (const auto& [key, value] : overrides) apply_override(root, key, value);
    return config_from_toml_json(root, path.parent_path());
}

namespace {

void emit_backend(std::ostringstream& out, const char* table, const BackendSpec& spec) {
    out << "[[" << table << "]]\n";
    out << "name = \"" << spec.name << "\"\n";
    out << "backend = \"" << spec.backend << "\"\n";
    out << "path = \"" << spec.path << "\"\n";
    out << "input_size = " << spec.input_size << "\n\n";
}

}  // namespace

std::string config_to_toml(const PipelineConfig& config) {
    std::ostringstream out;
    out << "schema_version = 1\n";
    out << "seed = " << config.seed << "\n";
    out << "workers = " << config.workers << "\n\n";

    const Track1Config& t1 = config.track1;
    out << "[track1]\n";
    out << "window = " << t1.window << "\n";
    out << "overlap = " << t1.overlap << "\n";
    out << "seg_threshold = " << t1.seg_threshold << "\n";
    out << "mask_radius = " << t1.mask_radius << "\n";
    out << "patch_size = " << t1.patch_size << "\n";
    out << "dedup_radius = " << t1.dedup_radius << "\n";
    out << "match_radius = " << t1.match_radius << "\n";
    out << "decision_threshold = " << t1.decision_threshold << "\n";
    out << "min_area = " << t1.min_area << "\n";
    out << "connectivity = " << t1.connectivity << "\n";
    out << "merge = \"" << (t1.merge == MergeRule::mean ? "mean" : "max") << "\"\n";
    out << "neg_pos_ratio = " << t1.neg_pos_ratio << "\n";
    out << "tta_crop_fraction = " << t1.tta_crop_fraction << "\n";
    out << "n_estimators = " << t1.forest_params.n_estimators << "\n";
    out << "max_depth = " << t1.forest_params.max_depth << "\n";
    if (!t1.forest_path.empty()) out << "forest = \"" << t1.forest_path.string() << "\"\n";
    out << "\n[track1.segmenter]\n";
    out << "name = \"" << t1.segmenter.name << "\"\n";
    out << "backend = \"" << t1.segmenter.backend << "\"\n";
    out << "path = \"" << t1.segmenter.path << "\"\n\n";
    for (const BackendSpec& spec : t1.classifiers) emit_backend(out, "track1.classifiers", spec);

    const Track2Config& t2 = config.track2;
    out << "[track2]\n";
    out << "input_size = " << t2.input_size << "\n";
    out << "tta_k = " << t2.tta_k << "\n";
    out << "decision_threshold = " << t2.decision_threshold << "\n\n";
    for (const BackendSpec& spec : t2.classifiers) emit_backend(out, "track2.classifiers", spec);
    return out.str();
}

}  // namespace mitodet

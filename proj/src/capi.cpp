#include "mitodet.h"

#include <cstring>
#include <map>
#include <stdexcept>
#include <string>

#include "mitodet/config.hpp"
#include "mitodet/formats.hpp"
#include "mitodet/runner.hpp"

namespace {

thread_local std::string g_last_error;

struct OptionMap {
    std::map<std::string, std::string> values;

    std::string get(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    double get_double(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            std::size_t end = 0;
            const double v = std::stod(it->second, &end);
            if (end != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw mitodet::BadInput("option '" + key + "' is not a number: '" + it->second + "'");
        }
    }
    long get_long(const std::string& key, long fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        try {
            std::size_t end = 0;
            const long v = std::stol(it->second, &end);
            if (end != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw mitodet::BadInput("option '" + key + "' is not an integer: '" + it->second +
                                    "'");
        }
    }
    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = values.find(key);
        if (it == values.end()) return fallback;
        return it->second == "true" || it->second == "1";
    }
};

const OptionMap kEmptyOptions;

const OptionMap& opts(const mdt_options* options);

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MDT_OK;
    } catch (const mitodet::BadInput& e) {
        g_last_error = e.what();
        return MDT_ERR_BAD_INPUT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MDT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return MDT_ERR_INTERNAL;
    }
}

int require(const void* p, const char* what) {
    if (p) return MDT_OK;
    g_last_error = std::string(what) + " must not be null";
    return MDT_ERR_BAD_INPUT;
}

mitodet::PipelineConfig load_config_with_options(const char* config_path, const OptionMap& o) {
    // config-tree overrides are every dotted key; plain command keys are
    // consumed by the callers and ignored here
    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : o.values)
        if (key.find('.') != std::string::npos || key == "seed" || key == "workers")
            overrides[key] = value;
    return mitodet::load_config(config_path, overrides);
}

}  // namespace

struct mdt_options {
    OptionMap map;
};

struct mdt_forest {
    mitodet::StumpForest forest;
};

namespace {
const OptionMap& opts(const mdt_options* options) {
    return options ? options->map : kEmptyOptions;
}
}  // namespace

extern "C" {

const char* mdt_version(void) { return "1.0.0"; }

const char* mdt_last_error(void) { return g_last_error.c_str(); }

mdt_options* mdt_options_new(void) { return new (std::nothrow) mdt_options(); }

void mdt_options_free(mdt_options* options) { delete options; }

int mdt_options_set(mdt_options* options, const char* key, const char* value) {
    if (const int rc = require(options, "options")) return rc;
    if (const int rc = require(key, "key")) return rc;
    if (const int rc = require(value, "value")) return rc;
    options->map.values[key] = value;
    return MDT_OK;
}

int mdt_build_dataset(const char* annotations_dir, const char* images_dir, const char* out_dir,
                      const mdt_options* options) {
    if (const int rc = require(annotations_dir, "annotations_dir")) return rc;
    if (const int rc = require(images_dir, "images_dir")) return rc;
    if (const int rc = require(out_dir, "out_dir")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        mitodet::BuildDatasetOptions opt;
        opt.mask_radius = static_cast<int>(o.get_long("mask_radius", opt.mask_radius));
        opt.patch_size = static_cast<int>(o.get_long("patch_size", opt.patch_size));
        opt.match_radius = o.get_double("match_radius", opt.match_radius);
        opt.include_hard_negatives =
            o.get_bool("include_hard_negatives", opt.include_hard_negatives);
        const std::string stage1 = o.get("stage1_dir", "");
        if (!stage1.empty()) opt.stage1_dir = stage1;
        opt.sample_crops = static_cast<int>(o.get_long("sample_crops", opt.sample_crops));
        opt.crop_size = static_cast<int>(o.get_long("crop_size", opt.crop_size));
        opt.p_foreground = o.get_double("p_foreground", opt.p_foreground);
        opt.seed = static_cast<std::uint64_t>(o.get_long("seed", 1));
        mitodet::run_build_dataset(annotations_dir, images_dir, out_dir, opt);
    });
}

int mdt_detect(const char* config_path, const char* images_dir, const char* out_dir,
               const mdt_options* options) {
    if (const int rc = require(config_path, "config_path")) return rc;
    if (const int rc = require(images_dir, "images_dir")) return rc;
    if (const int rc = require(out_dir, "out_dir")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        const mitodet::PipelineConfig cfg = load_config_with_options(config_path, o);
        mitodet::run_detect(cfg, images_dir, out_dir, o.get_bool("stage1_only", false));
    });
}

int mdt_classify(const char* config_path, const char* patches_dir, const char* out_file,
                 const mdt_options* options) {
    if (const int rc = require(config_path, "config_path")) return rc;
    if (const int rc = require(patches_dir, "patches_dir")) return rc;
    if (const int rc = require(out_file, "out_file")) return rc;
    return guarded([&] {
        const mitodet::PipelineConfig cfg = load_config_with_options(config_path, opts(options));
        mitodet::run_classify(cfg, patches_dir, out_file);
    });
}

int mdt_fit_ensemble(const char* config_path, const char* train_dir, const char* val_dir,
                     const char* out_forest, const mdt_options* options) {
    if (const int rc = require(config_path, "config_path")) return rc;
    if (const int rc = require(train_dir, "train_dir")) return rc;
    if (const int rc = require(val_dir, "val_dir")) return rc;
    if (const int rc = require(out_forest, "out_forest")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        const mitodet::PipelineConfig cfg = load_config_with_options(config_path, o);
        mitodet::FitPaths paths;
        paths.forest = out_forest;
        const std::string report = o.get("report", "");
        paths.report = report.empty()
                           ? paths.forest.parent_path() /
                                 (paths.forest.stem().string() + ".threshold.json")
                           : std::filesystem::path(report);
        mitodet::run_fit_ensemble(cfg, train_dir, val_dir, paths);
    });
}

int mdt_evaluate(const char* pred_path, const char* gt_path, const char* out_report,
                 const mdt_options* options) {
    if (const int rc = require(pred_path, "pred_path")) return rc;
    if (const int rc = require(gt_path, "gt_path")) return rc;
    if (const int rc = require(out_report, "out_report")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        const std::string matcher = o.get("matcher", "greedy");
        if (matcher != "greedy" && matcher != "optimal")
            throw mitodet::BadInput("matcher must be 'greedy' or 'optimal'");
        mitodet::run_evaluate(pred_path, gt_path, o.get_double("radius", 30.0), out_report,
                              matcher == "greedy" ? mitodet::Matcher::greedy
                                                  : mitodet::Matcher::optimal);
    });
}

int mdt_sweep(const char* pred_path, const char* gt_path, const char* out_file,
              const mdt_options* options) {
    if (const int rc = require(pred_path, "pred_path")) return rc;
    if (const int rc = require(gt_path, "gt_path")) return rc;
    if (const int rc = require(out_file, "out_file")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        mitodet::run_sweep(pred_path, gt_path, o.get_double("radius", 30.0),
                           o.get_double("epsilon", 0.01), o.get_double("grid", 0.001), out_file);
    });
}

int mdt_make_demo(const char* out_dir, const mdt_options* options) {
    if (const int rc = require(out_dir, "out_dir")) return rc;
    const OptionMap& o = opts(options);
    return guarded([&] {
        mitodet::DemoOptions opt;
        opt.image_size = static_cast<int>(o.get_long("image_size", opt.image_size));
        opt.n_images = static_cast<int>(o.get_long("n_images", opt.n_images));
        opt.n_mitoses = static_cast<int>(o.get_long("n_mitoses", opt.n_mitoses));
        opt.n_mimickers = static_cast<int>(o.get_long("n_mimickers", opt.n_mimickers));
        opt.n_patches = static_cast<int>(o.get_long("n_patches", opt.n_patches));
        opt.seed = static_cast<std::uint64_t>(o.get_long("seed", 7));
        mitodet::run_make_demo(out_dir, opt);
    });
}

int mdt_forest_load(const char* path, mdt_forest** out_forest) {
    if (const int rc = require(path, "path")) return rc;
    if (const int rc = require(out_forest, "out_forest")) return rc;
    return guarded([&] {
        auto* handle = new mdt_forest{mitodet::read_forest(path)};
        *out_forest = handle;
    });
}

void mdt_forest_free(mdt_forest* forest) { delete forest; }

int mdt_forest_n_features(const mdt_forest* forest) {
    return forest ? forest->forest.n_features : -1;
}

int mdt_forest_predict(const mdt_forest* forest, const double* features, size_t n_features,
                       double* out_probability) {
    if (const int rc = require(forest, "forest")) return rc;
    if (const int rc = require(features, "features")) return rc;
    if (const int rc = require(out_probability, "out_probability")) return rc;
    return guarded([&] {
        const std::vector<double> x(features, features + n_features);
        *out_probability = mitodet::forest_predict_proba(forest->forest, x);
    });
}

}  // extern "C"

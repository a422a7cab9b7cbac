// mitodet command-line tool. All functionality goes through the C API of the
// shared library; this file only parses flags and renders output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mitodet.h"

namespace {

using nlohmann::json;

struct OptionsHandle {
    mdt_options* ptr = mdt_options_new();
    ~OptionsHandle() { mdt_options_free(ptr); }

    void set(const std::string& key, const std::string& value) {
        mdt_options_set(ptr, key.c_str(), value.c_str());
    }
    void set(const std::string& key, double value) { set(key, std::to_string(value)); }
    void set(const std::string& key, long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
};

int finish(int status) {
    if (status != MDT_OK) {
        const json err{{"error",
                        {{"code", status},
                         {"kind", status == MDT_ERR_BAD_INPUT ? "bad_input" : "internal"},
                         {"message", mdt_last_error()}}}};
        std::cerr << err.dump() << "\n";
    }
    return status;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    json j;
    in >> j;
    return j;
}

void print_metrics_row(const std::string& name, const json& g) {
    std::printf("%-12s %6lld %6lld %6lld   %8.4f %8.4f %8.4f\n", name.c_str(),
                g["tp"].get<long long>(), g["fp"].get<long long>(), g["fn"].get<long long>(),
                g["precision"].get<double>(), g["recall"].get<double>(), g["f1"].get<double>());
}

void print_eval_report(const json& report) {
    if (report.contains("balanced_accuracy")) {
        std::printf("balanced accuracy: %.4f\n", report["balanced_accuracy"].get<double>());
        std::printf("sensitivity:       %.4f\n", report["sensitivity"].get<double>());
        std::printf("specificity:       %.4f\n", report["specificity"].get<double>());
        const json& c = report["counts"];
        std::printf("counts: tp=%lld fp=%lld tn=%lld fn=%lld\n", c["tp"].get<long long>(),
                    c["fp"].get<long long>(), c["tn"].get<long long>(), c["fn"].get<long long>());
        return;
    }
    std::printf("%-12s %6s %6s %6s   %8s %8s %8s\n", "group", "tp", "fp", "fn", "prec", "recall",
                "f1");
    for (const auto& [gid, metrics] : report["per_group"].items())
        print_metrics_row(gid, metrics);
    print_metrics_row("overall", report["overall"]);
    const json& macro = report["macro"];
    std::printf("%-12s %6s %6s %6s   %8.4f %8.4f %8.4f\n", "macro", "", "", "",
                macro["precision"].get<double>(), macro["recall"].get<double>(),
                macro["f1"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage mitosis detection and atypical-mitosis classification"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may appear after the subcommand
    app.set_version_flag("--version", std::string(mdt_version()));

    long workers = -1;
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    std::vector<std::string> overrides;
    app.add_option("--set", overrides, "config override, dotted key=value")
        ->type_name("KEY=VALUE");

    // build-dataset
    auto* build = app.add_subcommand("build-dataset", "masks, patches and manifest from annotations");
    std::string annotations_dir, images_dir, out_dir;
    build->add_option("--annotations", annotations_dir, "annotation JSON directory")->required();
    build->add_option("--images", images_dir, "image PNG directory")->required();
    build->add_option("--out", out_dir, "output directory")->required();
    long mask_radius = 45, patch_size = 140, sample_crops = 0, crop_size = 512;
    double match_radius = 30.0, p_foreground = 0.5;
    long build_seed = 1;
    bool no_hard_negatives = false;
    std::string stage1_dir;
    build->add_option("--mask-radius", mask_radius, "disk radius for segmentation masks");
    build->add_option("--patch-size", patch_size, "patch side length");
    build->add_option("--match-radius", match_radius, "gt/detection matching radius");
    build->add_option("--stage1", stage1_dir, "stage-1 detection directory for tp/fn/fp buckets");
    build->add_flag("--no-hard-negatives", no_hard_negatives,
                    "exclude hard-negative mimickers from masks");
    build->add_option("--sample-crops", sample_crops, "training crop pairs per image");
    build->add_option("--crop-size", crop_size, "training crop side length");
    build->add_option("--p-foreground", p_foreground, "foreground oversampling probability");
    build->add_option("--seed", build_seed, "crop sampling seed");

    // detect
    auto* det = app.add_subcommand("detect", "run track-1 detection over a directory of images");
    std::string config_path, det_images, det_out;
    bool stage1_only = false;
    det->add_option("--config", config_path, "pipeline config (TOML)")->required();
    det->add_option("--images", det_images, "image PNG directory")->required();
    det->add_option("--out", det_out, "output directory for prediction files")->required();
    det->add_flag("--stage1-only", stage1_only,
                  "emit screening candidates without ensemble verification");

    // classify
    auto* cls = app.add_subcommand("classify", "run track-2 classification over a patch directory");
    std::string cls_config, cls_patches, cls_out;
    cls->add_option("--config", cls_config, "pipeline config (TOML)")->required();
    cls->add_option("--patches", cls_patches, "patch PNG directory")->required();
    cls->add_option("--out", cls_out, "output prediction file")->required();

    // fit-ensemble
    auto* fit = app.add_subcommand("fit-ensemble", "train the verification forest");
    std::string fit_config, fit_train, fit_val, fit_out, fit_report;
    fit->add_option("--config", fit_config, "pipeline config (TOML)")->required();
    fit->add_option("--train", fit_train, "training directory (PNG + annotation JSON pairs)")
        ->required();
    fit->add_option("--val", fit_val, "validation directory")->required();
    fit->add_option("--out", fit_out, "output forest JSON")->required();
    fit->add_option("--report", fit_report, "threshold report path (default: <out>.threshold.json)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "score predictions against ground truth");
    std::string eval_pred, eval_gt, eval_out, eval_matcher = "greedy";
    double eval_radius = 30.0;
    eval->add_option("--pred", eval_pred, "prediction directory (detection) or file (classification)")
        ->required();
    eval->add_option("--gt", eval_gt, "ground-truth directory or patch-labels file")->required();
    eval->add_option("--radius", eval_radius, "matching radius in pixels");
    eval->add_option("--matcher", eval_matcher, "greedy (default) or optimal assignment")
        ->check(CLI::IsMember({"greedy", "optimal"}));
    eval->add_option("--out", eval_out, "output report JSON")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "F1-vs-threshold curve, best threshold and plateau");
    std::string sweep_pred, sweep_gt, sweep_out;
    double sweep_radius = 30.0, sweep_epsilon = 0.01, sweep_grid = 0.001;
    sweep->add_option("--pred", sweep_pred, "prediction directory or file")->required();
    sweep->add_option("--gt", sweep_gt, "ground-truth directory or patch-labels file")->required();
    sweep->add_option("--radius", sweep_radius, "matching radius in pixels");
    sweep->add_option("--epsilon", sweep_epsilon, "plateau tolerance below the best F1");
    sweep->add_option("--grid", sweep_grid, "threshold grid step");
    sweep->add_option("--out", sweep_out, "output report JSON")->required();

    // make-demo
    auto* demo = app.add_subcommand("make-demo", "generate a ready-to-run synthetic fixture");
    std::string demo_out;
    long demo_size = 1024, demo_images = 2, demo_mitoses = 12, demo_mimickers = 12,
         demo_patches = 24, demo_seed = 7;
    demo->add_option("--out", demo_out, "output directory")->required();
    demo->add_option("--size", demo_size, "ROI side length");
    demo->add_option("--images", demo_images, "number of training images");
    demo->add_option("--mitoses", demo_mitoses, "planted mitoses per image");
    demo->add_option("--mimickers", demo_mimickers, "planted mimickers per image");
    demo->add_option("--patches", demo_patches, "track-2 patches");
    demo->add_option("--seed", demo_seed, "world seed");

    CLI11_PARSE(app, argc, argv);

    OptionsHandle options;
    if (workers >= 0) options.set("workers", workers);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << json{{"error",
                               {{"code", MDT_ERR_BAD_INPUT},
                                {"kind", "bad_input"},
                                {"message", "--set expects KEY=VALUE, got '" + kv + "'"}}}}
                             .dump()
                      << "\n";
            return MDT_ERR_BAD_INPUT;
        }
        options.set(kv.substr(0, eq), kv.substr(eq + 1));
    }

    if (build->parsed()) {
        options.set("mask_radius", mask_radius);
        options.set("patch_size", patch_size);
        options.set("match_radius", match_radius);
        options.set("include_hard_negatives", !no_hard_negatives);
        if (!stage1_dir.empty()) options.set("stage1_dir", stage1_dir);
        options.set("sample_crops", sample_crops);
        options.set("crop_size", crop_size);
        options.set("p_foreground", p_foreground);
        options.set("seed", build_seed);
        return finish(mdt_build_dataset(annotations_dir.c_str(), images_dir.c_str(),
                                        out_dir.c_str(), options.ptr));
    }
    if (det->parsed()) {
        if (stage1_only) options.set("stage1_only", true);
        return finish(
            mdt_detect(config_path.c_str(), det_images.c_str(), det_out.c_str(), options.ptr));
    }
    if (cls->parsed())
        return finish(
            mdt_classify(cls_config.c_str(), cls_patches.c_str(), cls_out.c_str(), options.ptr));
    if (fit->parsed()) {
        if (!fit_report.empty()) options.set("report", fit_report);
        const int status = finish(mdt_fit_ensemble(fit_config.c_str(), fit_train.c_str(),
                                                   fit_val.c_str(), fit_out.c_str(), options.ptr));
        if (status == MDT_OK) {
            const std::filesystem::path out_path(fit_out);
            const std::string report_path =
                fit_report.empty()
                    ? (out_path.parent_path() / (out_path.stem().string() + ".threshold.json"))
                          .string()
                    : fit_report;
            const json report = read_json(report_path);
            std::printf("forest written to %s\n", fit_out.c_str());
            std::printf("best threshold %.3f (F1 %.4f), plateau [%.3f, %.3f]\n",
                        report["best_threshold"].get<double>(), report["best_f1"].get<double>(),
                        report["plateau"]["low"].get<double>(),
                        report["plateau"]["high"].get<double>());
        }
        return status;
    }
    if (eval->parsed()) {
        options.set("radius", eval_radius);
        options.set("matcher", eval_matcher);
        const int status = finish(
            mdt_evaluate(eval_pred.c_str(), eval_gt.c_str(), eval_out.c_str(), options.ptr));
        if (status == MDT_OK) print_eval_report(read_json(eval_out));
        return status;
    }
    if (sweep->parsed()) {
        options.set("radius", sweep_radius);
        options.set("epsilon", sweep_epsilon);
        options.set("grid", sweep_grid);
        const int status =
            finish(mdt_sweep(sweep_pred.c_str(), sweep_gt.c_str(), sweep_out.c_str(), options.ptr));
        if (status == MDT_OK) {
            const json report = read_json(sweep_out);
            std::printf("best threshold %.3f (F1 %.4f), plateau [%.3f, %.3f]\n",
                        report["best_threshold"].get<double>(), report["best_f1"].get<double>(),
                        report["plateau"]["low"].get<double>(),
                        report["plateau"]["high"].get<double>());
        }
        return status;
    }
    if (demo->parsed()) {
        options.set("image_size", demo_size);
        options.set("n_images", demo_images);
        options.set("n_mitoses", demo_mitoses);
        options.set("n_mimickers", demo_mimickers);
        options.set("n_patches", demo_patches);
        options.set("seed", demo_seed);
        return finish(mdt_make_demo(demo_out.c_str(), options.ptr));
    }
    return 0;
}

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mitodet/config.hpp"
#include "mitodet/formats.hpp"
#include "mitodet/fsio.hpp"
#include "mitodet/png_io.hpp"
#include "mitodet/rng.hpp"
#include "mitodet/toml.hpp"

using namespace mitodet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("toml parser handles the config subset") {
    const std::string text = R"(
# top comment
seed = 42
workers = 0
name = "demo \"quoted\""
ratio = 2.5
flag = true
values = [1, 2, 3]
mixed = [0.5, 1.5]  # trailing comment

[track1]
window = 512
merge = "mean"

[track1.nested]
deep = -3

[[track1.classifiers]]
name = "a"
[[track1.classifiers]]
name = "b"
)";
    const json j = parse_toml(text);
    CHECK(j["seed"] == 42);
    CHECK(j["name"] == "demo \"quoted\"");
    CHECK(j["ratio"] == 2.5);
    CHECK(j["flag"] == true);
    CHECK(j["values"] == json::array({1, 2, 3}));
    CHECK(j["track1"]["window"] == 512);
    CHECK(j["track1"]["merge"] == "mean");
    CHECK(j["track1"]["nested"]["deep"] == -3);
    REQUIRE(j["track1"]["classifiers"].size() == 2);
    CHECK(j["track1"]["classifiers"][1]["name"] == "b");
}

TEST_CASE("toml parser rejects what it does not support") {
    CHECK_THROWS_AS(parse_toml("a = {inline = 1}"), BadInput);
    CHECK_THROWS_AS(parse_toml("a = 'literal'"), BadInput);
    CHECK_THROWS_AS(parse_toml("a = 1\na = 2"), BadInput);
    CHECK_THROWS_AS(parse_toml("a = \"unterminated"), BadInput);
    CHECK_THROWS_AS(parse_toml("a = 1979-05-27"), BadInput);
    CHECK_THROWS_AS(parse_toml("= 3"), BadInput);
    CHECK_THROWS_AS(parse_toml("a = 1 garbage"), BadInput);
}

TEST_CASE("annotation files round trip") {
    TempDir dir("mitodet_io_ann");
    AnnotationFile file;
    file.image = ImageRef{"roi_1", 640, 480, 0.25, "tumor_3"};
    file.points = {{{10.5, 20.25}, Label::mitosis, "roi_1"},
                   {{600.0, 400.0}, Label::hard_negative, "roi_1"}};
    const fs::path path = dir.path / "roi_1.json";
    write_annotation_file(path, file);

    const AnnotationFile back = read_annotation_file(path);
    CHECK(back.image.id == "roi_1");
    CHECK(back.image.width == 640);
    CHECK(back.image.mpp == 0.25);
    CHECK(back.image.group == "tumor_3");
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[0].point.x == 10.5);  // exact double round trip
    CHECK(back.points[0].label == Label::mitosis);
    CHECK(back.points[1].label == Label::hard_negative);
}

TEST_CASE("annotation reader rejects out-of-bounds points and bad labels") {
    TempDir dir("mitodet_io_ann2");
    const fs::path path = dir.path / "bad.json";
    atomic_write_file(path, std::string(R"({"image_id": "x", "width": 100, "height": 100,
        "points": [{"x": 100.0, "y": 5.0, "label": "mitosis"}]})"));
    CHECK_THROWS_AS(read_annotation_file(path), BadInput);
    atomic_write_file(path, std::string(R"({"image_id": "x", "width": 100, "height": 100,
        "points": [{"x": 10.0, "y": 5.0, "label": "weird"}]})"));
    CHECK_THROWS_AS(read_annotation_file(path), BadInput);
}

TEST_CASE("detection files round trip sorted by score") {
    TempDir dir("mitodet_io_det");
    DetectionFile file;
    file.image_id = "roi_9";
    file.threshold = 0.4;
    file.detections = {make_detection({5, 6}, 0.5, Stage::verified, "roi_9"),
                       make_detection({1, 2}, 0.9, Stage::verified, "roi_9"),
                       make_detection({3, 4}, 0.7, Stage::verified, "roi_9")};
    const fs::path path = dir.path / "roi_9.json";
    write_detection_file(path, file);

    const DetectionFile back = read_detection_file(path);
    CHECK(back.image_id == "roi_9");
    CHECK(back.threshold == 0.4);
    REQUIRE(back.detections.size() == 3);
    CHECK(back.detections[0].score == 0.9);
    CHECK(back.detections[1].score == 0.7);
    CHECK(back.detections[2].score == 0.5);
}

TEST_CASE("classification files and patch labels round trip") {
    TempDir dir("mitodet_io_cls");
    ClassificationFile file;
    file.source = "patches";
    file.threshold = 0.5;
    file.patches = {{"p000", 0.9, "atypical"}, {"p001", 0.2, "normal"}};
    write_classification_file(dir.path / "cls.json", file);
    const ClassificationFile back = read_classification_file(dir.path / "cls.json");
    REQUIRE(back.patches.size() == 2);
    CHECK(back.patches[0].probability == 0.9);
    CHECK(back.patches[1].label == "normal");

    const std::map<std::string, Label> labels = {{"p000", Label::atypical},
                                                 {"p001", Label::normal}};
    write_patch_labels(dir.path / "labels.json", labels);
    CHECK(read_patch_labels(dir.path / "labels.json") == labels);
}

TEST_CASE("forest JSON round trips exactly") {
    TempDir dir("mitodet_io_forest");
    StumpForest forest;
    forest.params = {3, 1};
    forest.n_features = 9;
    forest.seed = 777;
    forest.layout = {3, 3};
    forest.classifier_names = {"a", "b", "c"};
    forest.trees = {Stump{0, 0.5, 0.0, 1.0}, Stump{4, 0.123456789, 0.25, 0.75},
                    Stump{8, 0.9, 1.0, 0.0}};
    write_forest(dir.path / "forest.json", forest);

    const StumpForest back = read_forest(dir.path / "forest.json");
    CHECK(back.params.n_estimators == 3);
    CHECK(back.n_features == 9);
    CHECK(back.seed == 777);
    CHECK(back.layout == FeatureLayout{3, 3});
    CHECK(back.classifier_names == forest.classifier_names);
    REQUIRE(back.trees.size() == 3);
    CHECK(back.trees[1].threshold == 0.123456789);  // exact
    CHECK(back.trees[1].left == 0.25);

    // predictions agree after the round trip
    const std::vector<double> x = {0.6, 0.5, 0.5, 0.5, 0.1, 0.5, 0.5, 0.5, 0.95};
    CHECK(forest_predict_proba(back, x) == forest_predict_proba(forest, x));
}

TEST_CASE("forest reader rejects malformed trees and future versions") {
    TempDir dir("mitodet_io_forest2");
    json j{{"schema", "mitodet.forest"}, {"version", 1},    {"n_estimators", 1},
           {"max_depth", 1},             {"n_features", 4}, {"seed", 0}};
    j["trees"] = json::array({json{{"feature", 9}, {"threshold", 0.5}, {"left", 0.0}, {"right", 1.0}}});
    write_json_file(dir.path / "bad.json", j);
    CHECK_THROWS_AS(read_forest(dir.path / "bad.json"), BadInput);  // feature out of range

    j["trees"][0]["feature"] = 0;
    j["version"] = 2;
    write_json_file(dir.path / "future.json", j);
    CHECK_THROWS_AS(read_forest(dir.path / "future.json"), BadInput);

    j["version"] = 1;
    j["schema"] = "mitodet.manifest";
    write_json_file(dir.path / "wrong.json", j);
    CHECK_THROWS_AS(read_forest(dir.path / "wrong.json"), BadInput);
}

TEST_CASE("threshold reports and manifests round trip") {
    TempDir dir("mitodet_io_rep");
    ThresholdReport report;
    report.best_threshold = 0.42;
    report.best_f1 = 0.875;
    report.plateau_low = 0.3;
    report.plateau_high = 0.6;
    report.curve = {{0.0, 0.5}, {0.5, 0.875}, {1.0, 0.0}};
    write_threshold_report(dir.path / "t.json", report);
    const ThresholdReport back =
        threshold_report_from_json(load_json_file(dir.path / "t.json"), "t");
    CHECK(back.best_threshold == 0.42);
    CHECK(back.best_f1 == 0.875);
    CHECK(back.plateau_high == 0.6);
    REQUIRE(back.curve.size() == 3);
    CHECK(back.curve[1].second == 0.875);

    DatasetManifest manifest;
    manifest.counts = {10, 10, 2, 5};
    manifest.patches = {{"patches/a.png", "pos", "roi_0", 10.0, 20.0, Provenance::gt},
                        {"patches/b.png", "neg", "roi_0", 30.0, 40.0, Provenance::fp}};
    write_manifest(dir.path / "m.json", manifest);
    const DatasetManifest mback = read_manifest(dir.path / "m.json");
    CHECK(mback.counts.gt == 10);
    CHECK(mback.counts.fp == 5);
    REQUIRE(mback.patches.size() == 2);
    CHECK(mback.patches[0].provenance == Provenance::gt);
    CHECK(mback.patches[1].label == "neg");
}

TEST_CASE("png rasters round trip bit-exact") {
    TempDir dir("mitodet_io_png");
    Rng rng(33);
    Raster img = Raster::filled(37, 23, 0, 0, 0);
    for (auto& c : img.rgb) c = static_cast<std::uint8_t>(rng.below(256));
    write_png(dir.path / "img.png", img);

    const Raster back = read_png(dir.path / "img.png");
    CHECK(back.width == 37);
    CHECK(back.height == 23);
    CHECK(back.rgb == img.rgb);

    BinaryMask mask = BinaryMask::zeros(16, 16);
    for (int i = 0; i < 16; ++i) mask.at(i, i) = 1;
    write_png(dir.path / "mask.png", mask);
    const BinaryMask mask_back = read_mask_png(dir.path / "mask.png");
    CHECK(mask_back.values == mask.values);

    atomic_write_file(dir.path / "not_png.png", std::string("hello"));
    CHECK_THROWS_AS(read_png(dir.path / "not_png.png"), BadInput);
    CHECK_THROWS_AS(read_png(dir.path / "missing.png"), BadInput);
}

TEST_CASE("atomic writes create parents and land complete") {
    TempDir dir("mitodet_io_atomic");
    const fs::path deep = dir.path / "a" / "b" / "c.txt";
    atomic_write_file(deep, std::string("payload"));
    CHECK(read_text_file(deep) == "payload");
    // no stray temp files
    int files = 0;
    for (const auto& e : fs::directory_iterator(deep.parent_path())) {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
}

TEST_CASE("list_files is sorted and filtered") {
    TempDir dir("mitodet_io_list");
    atomic_write_file(dir.path / "b.png", std::string("x"));
    atomic_write_file(dir.path / "a.png", std::string("x"));
    atomic_write_file(dir.path / "c.txt", std::string("x"));
    const auto files = list_files(dir.path, {".png"});
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.png");
    CHECK(files[1].filename() == "b.png");
    CHECK_THROWS_AS(list_files(dir.path / "missing", {".png"}), BadInput);
}

TEST_CASE("config loads from TOML with overrides and relative paths") {
    TempDir dir("mitodet_io_cfg");
    const std::string toml = R"(
seed = 11
workers = 3

[track1]
window = 256
overlap = 128
decision_threshold = 0.5
forest = "forest.json"

[track1.segmenter]
backend = "oracle_disk"
path = "seg.json"

[[track1.classifiers]]
name = "a"
backend = "oracle_distance"
path = "cls_a.json"
input_size = 140
[[track1.classifiers]]
name = "b"
backend = "oracle_distance"
path = "cls_b.json"
[[track1.classifiers]]
name = "c"
backend = "oracle_distance"
path = "cls_c.json"

[track2]
input_size = 128

[augment]
flip_prob = 0.5
)";
    atomic_write_file(dir.path / "config.toml", toml);

    const PipelineConfig cfg = load_config(dir.path / "config.toml");
    CHECK(cfg.seed == 11);
    CHECK(cfg.workers == 3);
    CHECK(cfg.track1.window == 256);
    CHECK(cfg.track1.overlap == 128);
    CHECK(cfg.track1.segmenter.path == (dir.path / "seg.json").string());
    CHECK(cfg.track1.forest_path == dir.path / "forest.json");
    REQUIRE(cfg.track1.classifiers.size() == 3);
    CHECK(cfg.track1.classifiers[1].name == "b");
    CHECK(cfg.track1.classifiers[1].input_size == 140);  // track1 default
    CHECK(cfg.augment.flip_prob == 0.5);

    const PipelineConfig with_overrides = load_config(
        dir.path / "config.toml",
        {{"workers", "1"}, {"track1.decision_threshold", "0.25"}, {"seed", "99"}});
    CHECK(with_overrides.workers == 1);
    CHECK(with_overrides.seed == 99);
    CHECK(with_overrides.track1.decision_threshold == 0.25);
    CHECK(with_overrides.track1.window == 256);  // untouched

    // the track-2 section is incomplete here (no classifiers); only the track
    // being run validates its own section
    CHECK_NOTHROW(with_overrides.track1.validate());
    CHECK_THROWS_AS(with_overrides.track2.validate(), BadInput);
}

TEST_CASE("config validation catches contradictions") {
    Track1Config t1;
    t1.segmenter = BackendSpec{"s", "segmenter", "oracle_disk", "p", 512};
    t1.classifiers.resize(3);
    t1.overlap = 512;
    CHECK_THROWS_AS(t1.validate(), BadInput);
    t1.overlap = 256;
    t1.decision_threshold = 1.5;
    CHECK_THROWS_AS(t1.validate(), BadInput);
    t1.decision_threshold = 0.5;
    t1.connectivity = 6;
    CHECK_THROWS_AS(t1.validate(), BadInput);

    Track2Config t2;
    t2.classifiers.resize(3);
    t2.tta_k = 3;
    CHECK_THROWS_AS(t2.validate(), BadInput);
}

TEST_CASE("generated demo config text parses back") {
    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.track1.segmenter = BackendSpec{"seg", "segmenter", "oracle_disk", "seg.json", 512};
    for (int i = 0; i < 3; ++i)
        cfg.track1.classifiers.push_back(
            BackendSpec{"c" + std::to_string(i), "classifier", "oracle_distance", "c.json", 140});
    for (int i = 0; i < 3; ++i)
        cfg.track2.classifiers.push_back(
            BackendSpec{"t" + std::to_string(i), "classifier", "oracle_distance", "t.json", 128});
    cfg.track1.forest_path = "forest.json";

    const json parsed = parse_toml(config_to_toml(cfg));
    const PipelineConfig back = config_from_toml_json(parsed, "");
    CHECK(back.seed == 5);
    CHECK(back.track1.classifiers.size() == 3);
    CHECK(back.track2.classifiers.size() == 3);
    CHECK(back.track1.window == cfg.track1.window);
    CHECK_NOTHROW(back.track1.validate());
}

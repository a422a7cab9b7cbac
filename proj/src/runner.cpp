#include "mitodet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "mitodet/fsio.hpp"
#include "mitodet/png_io.hpp"
#include "mitodet/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mitodet {

namespace {

// roi_0.png + roi_0.json side by side
std::vector<SampleImage> load_sample_dir(const fs::path& dir, bool require_annotations) {
    std::vector<SampleImage> samples;
    for (const fs::path& png : list_files(dir, {".png"})) {
        SampleImage s;
        s.image = read_png(png);
        const fs::path ann = png.parent_path() / (png.stem().string() + ".json");
        if (fs::exists(ann)) {
            AnnotationFile file = read_annotation_file(ann);
            if (file.image.width != s.image.width || file.image.height != s.image.height)
                throw BadInput(ann.string() + ": dimensions disagree with " + png.string());
            s.ref = file.image;
            s.ref.id = png.stem().string();
            for (Annotation& a : file.points) a.image = s.ref.id;
            s.annotations = std::move(file.points);
        } else if (require_annotations) {
            throw BadInput("missing annotation file for '" + png.string() + "'");
        } else {
            s.ref = ImageRef{png.stem().string(), s.image.width, s.image.height, {}, {}};
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw BadInput("no .png images found in '" + dir.string() + "'");
    return samples;
}

std::string patch_file_name(const std::string& image_id, std::size_t index, Provenance prov) {
    std::ostringstream name;
    name << image_id << "_" << std::setw(5) << std::setfill('0') << index << "_"
         << to_string(prov) << ".png";
    return name.str();
}

}  // namespace

DatasetManifest run_build_dataset(const fs::path& annotations_dir, const fs::path& images_dir,
                                  const fs::path& out_dir, const BuildDatasetOptions& options) {
    const MaskSpec mask_spec{options.mask_radius};
    const PatchSpec patch_spec{options.patch_size, BorderPolicy::mirror};
    mask_spec.validate();
    patch_spec.validate();

    fs::create_directories(out_dir / "masks");
    fs::create_directories(out_dir / "patches");

    DatasetManifest manifest;
    const std::vector<fs::path> annotation_files = list_files(annotations_dir, {".json"});
    if (annotation_files.empty())
        throw BadInput("no annotation files in '" + annotations_dir.string() + "'");

    for (const fs::path& ann_path : annotation_files) {
        const AnnotationFile ann = read_annotation_file(ann_path);
        const fs::path image_path = images_dir / (ann.image.id + ".png");
        if (!fs::exists(image_path))
            throw BadInput("annotation '" + ann_path.string() + "' references missing image '" +
                           image_path.string() + "'");
        const Raster image = read_png(image_path);
        if (image.width != ann.image.width || image.height != ann.image.height)
            throw BadInput(ann_path.string() + ": dimensions disagree with the PNG");

        const BinaryMask mask = synthesize_mask(ann.points, image.width, image.height, mask_spec,
                                                options.include_hard_negatives);
        write_png(out_dir / "masks" / (ann.image.id + ".png"), mask);

        LabeledPatchSet labeled;
        if (options.stage1_dir) {
            const fs::path det_path = *options.stage1_dir / (ann.image.id + ".json");
            if (!fs::exists(det_path))
                throw BadInput("missing stage-1 detection file '" + det_path.string() + "'");
            const DetectionFile dets = read_detection_file(det_path);
            std::vector<Annotation> gt;
            for (const Annotation& a : ann.points)
                if (a.label == Label::mitosis) gt.push_back(a);
            std::vector<Detection> stage1 = dets.detections;
            for (Detection& d : stage1) d.image = ann.image.id;
            labeled = label_candidates(gt, stage1, options.match_radius);
        } else {
            // no detections: ground truth only
            for (const Annotation& a : ann.points) {
                if (a.label != Label::mitosis) continue;
                labeled.positives.push_back(LabeledPoint{a.point, Provenance::gt, a.image});
                ++labeled.counts.gt;
            }
        }

        std::size_t index = 0;
        auto emit = [&](const LabeledPoint& p, const char* label) {
            Point center = p.point;
            center.x = std::clamp(center.x, 0.0, static_cast<double>(image.width) - 1.0);
            center.y = std::clamp(center.y, 0.0, static_cast<double>(image.height) - 1.0);
            const Raster patch = extract_patch(image, center, patch_spec);
            const std::string file = patch_file_name(ann.image.id, index++, p.provenance);
            write_png(out_dir / "patches" / file, patch);
            ManifestEntry entry;
            entry.patch_path = "patches/" + file;
            entry.label = label;
            entry.source_image = ann.image.id;
            entry.x = p.point.x;
            entry.y = p.point.y;
            entry.provenance = p.provenance;
            manifest.patches.push_back(std::move(entry));
        };
        for (const LabeledPoint& p : labeled.positives) emit(p, "pos");
        for (const LabeledPoint& p : labeled.negatives) emit(p, "neg");

        manifest.counts.gt += labeled.counts.gt;
        manifest.counts.tp += labeled.counts.tp;
        manifest.counts.fn += labeled.counts.fn;
        manifest.counts.fp += labeled.counts.fp;

        if (options.sample_crops > 0) {
            fs::create_directories(out_dir / "crops");
            const auto crops =
                sample_training_crops(image, mask, options.crop_size, options.sample_crops,
                                      options.p_foreground,
                                      mix_seed({options.seed, fnv1a(ann.image.id)}));
            for (std::size_t i = 0; i < crops.size(); ++i) {
                std::ostringstream stem;
                stem << ann.image.id << "_c" << std::setw(4) << std::setfill('0') << i;
                write_png(out_dir / "crops" / (stem.str() + ".png"), crops[i].image);
                write_png(out_dir / "crops" / (stem.str() + "_mask.png"), crops[i].mask);
            }
        }
    }

    write_manifest(out_dir / "manifest.json", manifest);
    return manifest;
}

void run_detect(const PipelineConfig& cfg, const fs::path& images_dir, const fs::path& out_dir,
                bool stage1_only) {
    cfg.track1.validate();
    const auto segmenter = make_segmenter(cfg.track1);
    EnsembleRoster roster;
    StumpForest forest;
    if (!stage1_only) {
        roster = make_roster(cfg.track1.classifiers);
        if (cfg.track1.forest_path.empty())
            throw BadInput("detect: no forest configured (track1.forest)");
        forest = read_forest(cfg.track1.forest_path);
        if (forest.n_features != 9)
            throw BadInput("detect: forest expects " + std::to_string(forest.n_features) +
                           " features, track 1 produces 9");
    }

    fs::create_directories(out_dir);
    const std::vector<SampleImage> samples = load_sample_dir(images_dir, false);
    for (const SampleImage& sample : samples) {
        DetectOutput out;
        if (stage1_only) {
            out.detections = stage1_candidates(sample.image, sample.ref, cfg.track1, *segmenter,
                                               cfg.seed, cfg.workers);
            out.all_candidates = out.detections;
        } else {
            out = detect(sample.image, sample.ref, cfg.track1, *segmenter, roster, forest,
                         cfg.seed, cfg.workers);
        }
        DetectionFile file;
        file.image_id = sample.ref.id;
        file.threshold = stage1_only ? cfg.track1.seg_threshold : cfg.track1.decision_threshold;
        file.detections = out.detections;
        json j = detection_file_to_json(file);
        json candidates = json::array();
        for (const Detection& d : out.all_candidates)
            candidates.push_back(json{{"x", d.point.x}, {"y", d.point.y}, {"score", d.score}});
        j["candidates"] = std::move(candidates);
        write_json_file(out_dir / (sample.ref.id + ".json"), j);
    }
}

ClassificationFile run_classify(const PipelineConfig& cfg, const fs::path& patches_dir,
                                const fs::path& out_file) {
    cfg.track2.validate();
    const EnsembleRoster roster = make_roster(cfg.track2.classifiers);

    ClassificationFile file;
    file.source = patches_dir.filename().string();
    file.threshold = cfg.track2.decision_threshold;
    for (const fs::path& png : list_files(patches_dir, {".png"})) {
        const Raster patch = read_png(png);
        const std::string id = png.stem().string();
        const PatchDecision decision =
            classify_atypical(patch, id, cfg.track2, roster, cfg.seed);
        file.patches.push_back(
            PatchPrediction{id, decision.probability, decision.atypical ? "atypical" : "normal"});
    }
    if (file.patches.empty())
        throw BadInput("no .png patches found in '" + patches_dir.string() + "'");
    write_classification_file(out_file, file);
    return file;
}

FitResult run_fit_ensemble(const PipelineConfig& cfg, const fs::path& train_dir,
                           const fs::path& val_dir, const FitPaths& out) {
    cfg.track1.validate();
    const auto segmenter = make_segmenter(cfg.track1);
    const EnsembleRoster roster = make_roster(cfg.track1.classifiers);

    const std::vector<SampleImage> train = load_sample_dir(train_dir, true);
    const std::vector<SampleImage> val = load_sample_dir(val_dir, true);

    FitResult result =
        fit_track1_ensemble(train, val, cfg.track1, *segmenter, roster, cfg.seed, cfg.workers);
    write_forest(out.forest, result.forest);
    write_threshold_report(out.report, result.report);
    return result;
}

namespace {

bool is_classification_pred(const fs::path& pred_path) {
    if (fs::is_directory(pred_path)) return false;
    const json j = load_json_file(pred_path);
    return j.value("schema", "") == "mitodet.classifications" || j.contains("patches");
}

struct DetectionEvalInputs {
    std::map<std::string, MatchCounts> per_image;
    std::map<std::string, std::string> groups;
    std::vector<std::pair<double, bool>> scored_matched;  // for sweeps
    std::int64_t total_gt = 0;
};

DetectionEvalInputs gather_detection_eval(const fs::path& pred_dir, const fs::path& gt_dir,
                                          double radius, bool use_candidates,
                                          Matcher matcher = Matcher::greedy) {
    DetectionEvalInputs inputs;
    std::set<std::string> seen;

    for (const fs::path& pred_path : list_files(pred_dir, {".json"})) {
        const json j = load_json_file(pred_path);
        DetectionFile pred = detection_file_from_json(j, pred_path.string());
        if (seen.count(pred.image_id))
            throw BadInput("duplicate predictions for image '" + pred.image_id + "' in '" +
                           pred_dir.string() + "'");
        // sweeps want every scored candidate, not only the kept detections
        if (use_candidates && j.contains("candidates")) {
            pred.detections.clear();
            for (const auto& c : j["candidates"])
                pred.detections.push_back(make_detection(
                    Point{c.at("x").get<double>(), c.at("y").get<double>()},
                    c.at("score").get<double>(), Stage::verified, pred.image_id));
        }

        const fs::path gt_path = gt_dir / (pred.image_id + ".json");
        if (!fs::exists(gt_path))
            throw BadInput("prediction '" + pred_path.string() +
                           "' has no ground-truth file '" + gt_path.string() + "'");
        const AnnotationFile gt_file = read_annotation_file(gt_path);
        std::vector<Annotation> gt;
        for (const Annotation& a : gt_file.points)
            if (a.label == Label::mitosis) gt.push_back(a);

        std::vector<Detection> dets = pred.detections;
        for (Detection& d : dets) d.image = gt_file.image.id;
        for (Annotation& a : gt) a.image = gt_file.image.id;

        const MatchResult match = match_detections(dets, gt, radius, matcher);
        inputs.per_image[pred.image_id] = match.counts;
        inputs.groups[pred.image_id] = gt_file.image.group.value_or("ungrouped");
        inputs.total_gt += static_cast<std::int64_t>(gt.size());

        std::vector<bool> matched(dets.size(), false);
        for (const auto& [di, gi] : match.pairs) matched[di] = true;
        for (std::size_t i = 0; i < dets.size(); ++i)
            inputs.scored_matched.emplace_back(dets[i].score, matched[i]);
        seen.insert(pred.image_id);
    }

    // ground-truth images without predictions count as all-miss
    for (const fs::path& gt_path : list_files(gt_dir, {".json"})) {
        const AnnotationFile gt_file = read_annotation_file(gt_path);
        if (seen.count(gt_file.image.id)) continue;
        warn("no predictions for image '" + gt_file.image.id + "', counting its ground truth as missed");
        MatchCounts counts;
        for (const Annotation& a : gt_file.points)
            if (a.label == Label::mitosis) ++counts.fn;
        inputs.per_image[gt_file.image.id] = counts;
        inputs.groups[gt_file.image.id] = gt_file.image.group.value_or("ungrouped");
        inputs.total_gt += counts.fn;
    }

    if (inputs.per_image.empty())
        throw BadInput("nothing to evaluate in '" + pred_dir.string() + "'");
    return inputs;
}

json classification_eval(const fs::path& pred_path, const fs::path& gt_path) {
    const ClassificationFile pred = read_classification_file(pred_path);
    const std::map<std::string, Label> labels = read_patch_labels(gt_path);

    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::set<std::string> predicted;
    for (const PatchPrediction& p : pred.patches) {
        const auto it = labels.find(p.id);
        if (it == labels.end())
            throw BadInput("patch '" + p.id + "' has no ground-truth label in '" +
                           gt_path.string() + "'");
        const bool truth = it->second == Label::atypical;
        const bool called = p.label == "atypical";
        if (truth && called) ++tp;
        else if (truth) ++fn;
        else if (called) ++fp;
        else ++tn;
        predicted.insert(p.id);
    }
    for (const auto& [id, label] : labels)
        if (!predicted.count(id)) warn("ground-truth patch '" + id + "' has no prediction");

    const double bacc = balanced_accuracy(tp, fn, tn, fp);
    json j{{"schema", "mitodet.classification_report"},
           {"version", kSchemaVersion},
           {"balanced_accuracy", bacc},
           {"sensitivity", static_cast<double>(tp) / (tp + fn)},
           {"specificity", static_cast<double>(tn) / (tn + fp)},
           {"counts", json{{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}}}};
    return j;
}

}  // namespace

json run_evaluate(const fs::path& pred_path, const fs::path& gt_path, double radius,
                  const fs::path& out_report, Matcher matcher) {
    json report;
    if (is_classification_pred(pred_path)) {
        report = classification_eval(pred_path, gt_path);
    } else {
        const DetectionEvalInputs inputs =
            gather_detection_eval(pred_path, gt_path, radius, false, matcher);
        report = eval_report_to_json(grouped_report(inputs.per_image, inputs.groups, radius));
        report["matcher"] = matcher == Matcher::greedy ? "greedy" : "optimal";
    }
    write_json_file(out_report, report);
    return report;
}

json run_sweep(const fs::path& pred_path, const fs::path& gt_path, double radius, double epsilon,
               double grid, const fs::path& out_file) {
    ThresholdReport report;
    if (is_classification_pred(pred_path)) {
        const ClassificationFile pred = read_classification_file(pred_path);
        const std::map<std::string, Label> gt = read_patch_labels(gt_path);
        std::vector<double> scores;
        std::vector<int> labels;
        for (const PatchPrediction& p : pred.patches) {
            const auto it = gt.find(p.id);
            if (it == gt.end())
                throw BadInput("patch '" + p.id + "' has no ground-truth label");
            scores.push_back(p.probability);
            labels.push_back(it->second == Label::atypical ? 1 : 0);
        }
        report = sweep_threshold(scores, labels, epsilon, grid);
    } else {
        const DetectionEvalInputs inputs = gather_detection_eval(pred_path, gt_path, radius, true);
        report = sweep_threshold_scored(inputs.scored_matched, inputs.total_gt, epsilon, grid);
    }
    const json j = threshold_report_to_json(report);
    write_json_file(out_file, j);
    return j;
}

// ---- demo fixture ----------------------------------------------------------

namespace {

struct PlantedWorld {
    std::vector<Annotation> mitoses;
    std::vector<Annotation> mimickers;
};

// Jittered grid keeps the planted points separated deterministically; with
// 45-px training disks they must never merge into one component.
PlantedWorld plant_points(const std::string& image_id, int size, int n_mitoses, int n_mimickers,
                          double min_separation, Rng& rng) {
    PlantedWorld world;
    const double margin = 80.0;
    const int total = n_mitoses + n_mimickers;
    const int cells = std::max(1, static_cast<int>(std::ceil(std::sqrt(total))));
    const double cell = (size - 2.0 * margin) / cells;
    if (cell < min_separation)
        throw BadInput("make-demo: cannot place " + std::to_string(total) +
                       " separated points in a " + std::to_string(size) +
                       "px image; reduce the counts or enlarge the image");
    const double jitter = std::min(15.0, (cell - min_separation) / 2.0);

    std::vector<Point> slots;
    for (int gy = 0; gy < cells; ++gy)
        for (int gx = 0; gx < cells; ++gx)
            slots.push_back(Point{margin + cell * (gx + 0.5), margin + cell * (gy + 0.5)});
    for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
    slots.resize(static_cast<std::size_t>(total));
    for (Point& p : slots) {
        p.x += rng.uniform(-jitter, jitter);
        p.y += rng.uniform(-jitter, jitter);
    }

    for (int i = 0; i < n_mitoses; ++i)
        world.mitoses.push_back(
            Annotation{slots[static_cast<std::size_t>(i)], Label::mitosis, image_id});
    for (int i = 0; i < n_mimickers; ++i)
        world.mimickers.push_back(Annotation{slots[static_cast<std::size_t>(n_mitoses + i)],
                                             Label::hard_negative, image_id});
    return world;
}

void draw_blob(Raster& img, const Point& center, double radius, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
    const int x0 = std::max(0, static_cast<int>(center.x - radius));
    const int x1 = std::min(img.width - 1, static_cast<int>(center.x + radius));
    const int y0 = std::max(0, static_cast<int>(center.y - radius));
    const int y1 = std::min(img.height - 1, static_cast<int>(center.y + radius));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d2 = (x - center.x) * (x - center.x) + (y - center.y) * (y - center.y);
            if (d2 <= radius * radius) {
                std::uint8_t* p = img.pixel(x, y);
                p[0] = r;
                p[1] = g;
                p[2] = b;
            }
        }
}

Raster render_roi(int size, const PlantedWorld& world, Rng& rng) {
    Raster img = Raster::filled(size, size, 234, 216, 230);
    // speckle so the background is not constant
    for (int i = 0; i < size * size / 50; ++i) {
        const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(size)));
        const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(size)));
        std::uint8_t* p = img.pixel(x, y);
        p[0] = 210;
        p[1] = 180;
        p[2] = 215;
    }
    for (const Annotation& a : world.mitoses) draw_blob(img, a.point, 11.0, 96, 54, 140);
    for (const Annotation& a : world.mimickers) draw_blob(img, a.point, 10.0, 130, 86, 150);
    return img;
}

json oracle_artifact(const std::vector<Annotation>& annotations, const json& params) {
    json j = params;
    j["schema"] = "mitodet.oracle";
    j["version"] = kSchemaVersion;
    json arr = json::array();
    for (const Annotation& a : annotations)
        arr.push_back(json{{"image", a.image},
                           {"x", a.point.x},
                           {"y", a.point.y},
                           {"label", to_string(a.label)}});
    j["annotations"] = std::move(arr);
    return j;
}

}  // namespace

void run_make_demo(const fs::path& out_dir, const DemoOptions& options) {
    if (options.image_size < 512) throw BadInput("make-demo: image_size must be >= 512");
    if (options.n_images < 1) throw BadInput("make-demo: n_images must be >= 1");

    fs::create_directories(out_dir / "train");
    fs::create_directories(out_dir / "val");
    fs::create_directories(out_dir / "test");
    fs::create_directories(out_dir / "patches");

    Rng rng(mix_seed({options.seed, 0x64656d6fu}));
    std::vector<Annotation> all_annotations;

    auto emit_roi = [&](const fs::path& dir, const std::string& id, const std::string& group) {
        const PlantedWorld world =
            plant_points(id, options.image_size, options.n_mitoses, options.n_mimickers, 120.0, rng);
        const Raster img = render_roi(options.image_size, world, rng);
        write_png(dir / (id + ".png"), img);

        AnnotationFile file;
        file.image = ImageRef{id, options.image_size, options.image_size, 0.25, group};
        file.points = world.mitoses;
        file.points.insert(file.points.end(), world.mimickers.begin(), world.mimickers.end());
        write_annotation_file(dir / (id + ".json"), file);

        all_annotations.insert(all_annotations.end(), file.points.begin(), file.points.end());
    };

    for (int i = 0; i < options.n_images; ++i)
        emit_roi(out_dir / "train", "train_" + std::to_string(i),
                 "tumor_" + std::to_string(1 + i % 2));
    emit_roi(out_dir / "val", "val_0", "tumor_1");
    emit_roi(out_dir / "test", "test_0", "tumor_2");

    // track-2 patches: 128px, planted annotation at the center when atypical
    std::map<std::string, Label> patch_labels;
    std::vector<Annotation> patch_annotations;
    for (int i = 0; i < options.n_patches; ++i) {
        std::ostringstream id_stream;
        id_stream << "p" << std::setw(3) << std::setfill('0') << i;
        const std::string id = id_stream.str();
        const bool atypical = i % 2 == 0;
        Raster patch = Raster::filled(128, 128, 236, 218, 232);
        for (int s = 0; s < 200; ++s) {
            const int x = static_cast<int>(rng.below(128));
            const int y = static_cast<int>(rng.below(128));
            patch.pixel(x, y)[1] = 190;
        }
        if (atypical) {
            draw_blob(patch, Point{64, 64}, 13.0, 88, 40, 120);
            patch_annotations.push_back(Annotation{Point{64, 64}, Label::atypical, id});
        } else {
            draw_blob(patch, Point{64, 64}, 9.0, 150, 110, 160);
        }
        write_png(out_dir / "patches" / (id + ".png"), patch);
        patch_labels[id] = atypical ? Label::atypical : Label::normal;
    }
    write_patch_labels(out_dir / "patch_labels.json", patch_labels);

    // oracle artifacts
    write_json_file(out_dir / "oracle_seg.json",
                    oracle_artifact(all_annotations, json{{"radius", 45.0},
                                                          {"p_in", 0.9},
                                                          {"p_out", 0.05},
                                                          {"noise_sigma", 0.02},
                                                          {"seed", options.seed}}));
    const double sharpness[3] = {0.15, 0.25, 0.4};
    for (int m = 0; m < 3; ++m) {
        write_json_file(out_dir / ("oracle_cls_" + std::string(1, char('a' + m)) + ".json"),
                        oracle_artifact(all_annotations,
                                        json{{"radius", 30.0},
                                             {"sharpness", sharpness[m]},
                                             {"positive_labels", json::array({"mitosis"})},
                                             {"seed", options.seed + m}}));
        write_json_file(out_dir / ("oracle_atyp_" + std::string(1, char('a' + m)) + ".json"),
                        oracle_artifact(patch_annotations,
                                        json{{"radius", 30.0},
                                             {"sharpness", sharpness[m]},
                                             {"positive_labels", json::array({"atypical"})},
                                             {"seed", options.seed + 10 + m}}));
    }

    // config wired to the artifacts above, paths relative to the config file
    PipelineConfig cfg;
    cfg.seed = options.seed;
    cfg.workers = 0;
    cfg.track1.segmenter = BackendSpec{"seg_oracle", "segmenter", "oracle_disk", "oracle_seg.json",
                                       cfg.track1.window};
    for (int m = 0; m < 3; ++m)
        cfg.track1.classifiers.push_back(
            BackendSpec{"cls_" + std::string(1, char('a' + m)), "classifier", "oracle_distance",
                        "oracle_cls_" + std::string(1, char('a' + m)) + ".json", 140});
    cfg.track1.forest_path = "forest.json";
    for (int m = 0; m < 3; ++m)
        cfg.track2.classifiers.push_back(
            BackendSpec{"atyp_" + std::string(1, char('a' + m)), "classifier", "oracle_distance",
                        "oracle_atyp_" + std::string(1, char('a' + m)) + ".json", 128});
    atomic_write_file(out_dir / "config.toml", config_to_toml(cfg));
}

}  // namespace mitodet

#include "mitodet/pipeline.hpp"

#include <algorithm>

#include "mitodet/parallel.hpp"
#include "mitodet/raster_ops.hpp"
#include "mitodet/rng.hpp"
#include "mitodet/tta.hpp"

namespace mitodet {

namespace {

// seed-derivation salts
constexpr std::uint64_t kSaltSegTta = 0x7365672d747461ull;
constexpr std::uint64_t kSaltClsTta = 0x636c732d747461ull;

// Checks shape and pulls adapter outputs back into [0,1], warning once per
// scorer.
ProbabilityMap sanitize_map(ProbabilityMap map, int width, int height, const std::string& who) {
    if (map.width != width || map.height != height)
        throw BadInput("segmenter '" + who + "' returned a " + std::to_string(map.width) + "x" +
                       std::to_string(map.height) + " map for a " + std::to_string(width) + "x" +
                       std::to_string(height) + " tile");
    for (float& v : map.values) {
        if (!(v >= 0.0f && v <= 1.0f))
            v = static_cast<float>(clamp_probability(v, who));
    }
    return map;
}

// Rectangle-preserving subgroup for clipped (non-square) edge tiles.
const std::vector<RigidTransform>& rect_group() {
    static const std::vector<RigidTransform> group = {
        {0, false}, {180, false}, {0, true}, {180, true}};
    return group;
}

struct SegView {
    RigidTransform transform;
    Raster image;
};

std::vector<SegView> make_seg_views(const Raster& tile, std::uint64_t seed) {
    std::vector<SegView> views;
    if (tile.width == tile.height) {
        const auto tta = make_views(tile, TtaPolicy::seg(seed));
        views.reserve(tta.size());
        for (const auto& v : tta) views.push_back(SegView{v.transform, v.image});
        return views;
    }
    // clipped edge tile: identity + 2 drawn from the other rect-safe elements
    Rng rng(mix_seed({seed, 0x72656374u}));
    std::vector<int> pool = {1, 2, 3};
    views.push_back(SegView{RigidTransform{}, tile});
    for (int i = 1; i < 3; ++i) {
        const std::size_t j = rng.below(pool.size());
        const RigidTransform t = rect_group()[static_cast<std::size_t>(pool[j])];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
        views.push_back(SegView{t, apply_transform(tile, t)});
    }
    return views;
}

}  // namespace

std::vector<Detection> stage1_candidates(const Raster& image, const ImageRef& ref,
                                         const Track1Config& cfg, const Segmenter& segmenter,
                                         std::uint64_t seed, int workers) {
    ref.validate();
    cfg.validate();
    if (image.width != ref.width || image.height != ref.height)
        throw BadInput("image '" + ref.id + "': raster is " + std::to_string(image.width) + "x" +
                       std::to_string(image.height) + " but the reference says " +
                       std::to_string(ref.width) + "x" + std::to_string(ref.height));

    const TilePlan plan = plan_tiles(ref.width, ref.height, cfg.window, cfg.overlap);
    std::vector<ProbabilityMap> tile_maps(plan.tiles.size());

    parallel_for(plan.tiles.size(), workers, [&](std::size_t i) {
        const Tile& t = plan.tiles[i];
        const Raster tile = crop_raster(image, t.x, t.y, t.width, t.height, BorderPolicy::zero);
        const std::uint64_t view_seed =
            mix_seed({seed, fnv1a(ref.id), static_cast<std::uint64_t>(t.x),
                      static_cast<std::uint64_t>(t.y), kSaltSegTta});

        std::vector<ProbabilityMap> maps;
        std::vector<RigidTransform> transforms;
        for (const SegView& view : make_seg_views(tile, view_seed)) {
            TileRef tref;
            tref.image = ref.id;
            tref.x = t.x;
            tref.y = t.y;
            tref.view_rotation = view.transform.rotation;
            tref.view_flip = view.transform.flip_horizontal;
            maps.push_back(sanitize_map(segmenter.segment(view.image, tref), t.width, t.height,
                                        segmenter.name()));
            transforms.push_back(view.transform);
        }
        ProbabilityMap merged = average_seg_tta(maps, transforms);
        merged.origin = Point{static_cast<double>(t.x), static_cast<double>(t.y)};
        tile_maps[i] = std::move(merged);
    });

    const ProbabilityMap stitched = stitch(tile_maps, plan, ref.width, ref.height, cfg.merge);
    const BinaryMask mask = binarize(stitched, cfg.seg_threshold);
    const std::vector<Component> components =
        extract_components(mask, stitched, cfg.connectivity, cfg.min_area);

    std::vector<Detection> dets;
    dets.reserve(components.size());
    for (const Component& c : components)
        dets.push_back(make_detection(c.centroid, c.peak_prob, Stage::segmentation, ref.id));
    return deduplicate(dets, cfg.dedup_radius);
}

FeatureVector candidate_features(const Raster& image, const ImageRef& ref, const Point& center,
                                 std::size_t candidate_index, const Track1Config& cfg,
                                 const EnsembleRoster& roster, std::uint64_t seed) {
    roster.validate();
    // Stage-1 centroids are means of in-bounds pixels; clamp anyway so a
    // numerically borderline candidate is shifted inward, not dropped.
    Point c = center;
    c.x = std::clamp(c.x, 0.0, static_cast<double>(ref.width) - 1.0);
    c.y = std::clamp(c.y, 0.0, static_cast<double>(ref.height) - 1.0);

    const Raster patch =
        extract_patch(image, c, PatchSpec{cfg.patch_size, BorderPolicy::mirror});
    const std::uint64_t view_seed =
        mix_seed({seed, fnv1a(ref.id), static_cast<std::uint64_t>(candidate_index), kSaltClsTta});
    const std::vector<TtaView> views =
        make_views(patch, TtaPolicy::cls_crop(view_seed, cfg.tta_crop_fraction));

    const PatchRef pref{ref.id, c};
    std::map<std::pair<int, int>, double> probs;
    for (int m = 0; m < 3; ++m) {
        const Classifier& model = *roster.classifiers[static_cast<std::size_t>(m)];
        for (int v = 0; v < static_cast<int>(views.size()); ++v) {
            Raster input = views[static_cast<std::size_t>(v)].image;
            if (input.width != model.input_size())
                input = resize_bilinear(input, model.input_size(), model.input_size());
            probs[{m, v}] = clamp_probability(model.classify(input, pref), model.name());
        }
    }
    return assemble_features(probs, FeatureLayout{3, 3});
}

DetectOutput detect(const Raster& image, const ImageRef& ref, const Track1Config& cfg,
                    const Segmenter& segmenter, const EnsembleRoster& roster,
                    const StumpForest& forest, std::uint64_t seed, int workers) {
    const std::vector<Detection> candidates =
        stage1_candidates(image, ref, cfg, segmenter, seed, workers);

    std::vector<Detection> scored(candidates.size());
    parallel_for(candidates.size(), workers, [&](std::size_t i) {
        const FeatureVector features =
            candidate_features(image, ref, candidates[i].point, i, cfg, roster, seed);
        const double proba = forest_predict_proba(forest, features);
        scored[i] = make_detection(candidates[i].point, proba, Stage::verified, ref.id);
    });

    std::stable_sort(scored.begin(), scored.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        return yx_less(a.point, b.point);
    });

    DetectOutput out;
    out.all_candidates = scored;
    for (const Detection& d : scored)
        if (d.score >= cfg.decision_threshold) out.detections.push_back(d);
    return out;
}

PatchDecision classify_atypical(const Raster& patch, const std::string& patch_id,
                                const Track2Config& cfg, const EnsembleRoster& roster,
                                std::uint64_t seed) {
    cfg.validate();
    roster.validate();
    if (patch.width < 1 || patch.height < 1) throw BadInput("classify_atypical: empty patch");

    // Track-2 references live in the original patch frame.
    const PatchRef pref{patch_id, Point{patch.width / 2.0, patch.height / 2.0}};
    const Raster rescaled = resize_bilinear(patch, cfg.input_size, cfg.input_size);
    const std::uint64_t view_seed = mix_seed({seed, fnv1a(patch_id), kSaltClsTta});
    const std::vector<TtaView> views = make_views(rescaled, TtaPolicy::cls5(view_seed));

    std::map<std::pair<int, int>, double> probs;
    for (int m = 0; m < 3; ++m) {
        const Classifier& model = *roster.classifiers[static_cast<std::size_t>(m)];
        for (int v = 0; v < static_cast<int>(views.size()); ++v) {
            Raster input = views[static_cast<std::size_t>(v)].image;
            if (input.width != model.input_size())
                input = resize_bilinear(input, model.input_size(), model.input_size());
            probs[{m, v}] = clamp_probability(model.classify(input, pref), model.name());
        }
    }
    const FeatureVector features = assemble_features(probs, FeatureLayout{3, 5});

    PatchDecision decision;
    decision.probability = average_probs(features);
    decision.atypical = decision.probability >= cfg.decision_threshold;
    return decision;
}

FitResult fit_track1_ensemble(const std::vector<SampleImage>& train,
                              const std::vector<SampleImage>& val, const Track1Config& cfg,
                              const Segmenter& segmenter, const EnsembleRoster& roster,
                              std::uint64_t seed, int workers) {
    cfg.validate();
    roster.validate();
    if (train.empty()) throw BadInput("fit_track1_ensemble: no training images");
    if (val.empty()) throw BadInput("fit_track1_ensemble: no validation images");

    // ---- training features from the screening/ground-truth bookkeeping ----
    std::vector<FeatureVector> X;
    std::vector<int> y;

    for (const SampleImage& sample : train) {
        std::vector<Annotation> gt;
        for (const Annotation& a : sample.annotations)
            if (a.label == Label::mitosis) gt.push_back(a);
        const std::vector<Detection> stage1 =
            stage1_candidates(sample.image, sample.ref, cfg, segmenter, seed, workers);
        const LabeledPatchSet labeled = label_candidates(gt, stage1, cfg.match_radius);

        std::vector<const LabeledPoint*> points;
        std::vector<int> labels;
        for (const LabeledPoint& p : labeled.positives) {
            points.push_back(&p);
            labels.push_back(1);
        }
        for (const LabeledPoint& p : labeled.negatives) {
            points.push_back(&p);
            labels.push_back(0);
        }

        std::vector<FeatureVector> features(points.size());
        parallel_for(points.size(), workers, [&](std::size_t i) {
            features[i] = candidate_features(sample.image, sample.ref, points[i]->point, i, cfg,
                                             roster, seed);
        });
        for (std::size_t i = 0; i < points.size(); ++i) {
            X.push_back(std::move(features[i]));
            y.push_back(labels[i]);
        }
    }

    if (std::count(y.begin(), y.end(), 1) == 0)
        throw BadInput("fit_track1_ensemble: no positives");

    const std::vector<std::size_t> kept = balance_indices(y, cfg.neg_pos_ratio, seed);
    std::vector<FeatureVector> Xb;
    std::vector<int> yb;
    Xb.reserve(kept.size());
    yb.reserve(kept.size());
    for (const std::size_t i : kept) {
        Xb.push_back(std::move(X[i]));
        yb.push_back(y[i]);
    }

    FitResult result;
    result.forest = fit_forest(Xb, yb, cfg.forest_params, seed, workers);
    for (const auto& c : roster.classifiers) result.forest.classifier_names.push_back(c->name());

    // ---- threshold sweep on held-out validation candidates ----
    std::vector<std::pair<double, bool>> scored_matched;
    std::int64_t total_gt = 0;
    for (const SampleImage& sample : val) {
        std::vector<Annotation> gt;
        for (const Annotation& a : sample.annotations)
            if (a.label == Label::mitosis) gt.push_back(a);
        total_gt += static_cast<std::int64_t>(gt.size());

        const std::vector<Detection> stage1 =
            stage1_candidates(sample.image, sample.ref, cfg, segmenter, seed, workers);
        std::vector<Detection> verified(stage1.size());
        parallel_for(stage1.size(), workers, [&](std::size_t i) {
            const FeatureVector features =
                candidate_features(sample.image, sample.ref, stage1[i].point, i, cfg, roster, seed);
            verified[i] = make_detection(stage1[i].point, forest_predict_proba(result.forest, features),
                                         Stage::verified, sample.ref.id);
        });

        const MatchResult match = match_detections(verified, gt, cfg.match_radius);
        std::vector<bool> matched(verified.size(), false);
        for (const auto& [di, gi] : match.pairs) matched[di] = true;
        for (std::size_t i = 0; i < verified.size(); ++i)
            scored_matched.emplace_back(verified[i].score, matched[i]);
    }
    if (total_gt == 0)
        throw BadInput("fit_track1_ensemble: validation set has no ground-truth mitoses");

    result.report =
        sweep_threshold_scored(scored_matched, total_gt, cfg.sweep_epsilon, cfg.sweep_grid);
    return result;
}

std::shared_ptr<const Segmenter> make_segmenter(const Track1Config& cfg) {
    return BackendRegistry::instance().make_segmenter(cfg.segmenter);
}

EnsembleRoster make_roster(const std::vector<BackendSpec>& specs) {
    EnsembleRoster roster;
    for (const BackendSpec& spec : specs)
        roster.classifiers.push_back(BackendRegistry::instance().make_classifier(spec));
    roster.validate();
    return roster;
}

}  // namespace mitodet

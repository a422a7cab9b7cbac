#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mitodet/core.hpp"
#include "mitodet/raster_ops.hpp"

namespace mitodet {

struct MaskSpec {
    int radius = 45;

    void validate() const {
        if (radius < 1) throw BadInput("mask radius must be >= 1");
    }
};

struct PatchSpec {
    int size = 140;
    BorderPolicy border = BorderPolicy::mirror;

    void validate() const {
        if (size < 1) throw BadInput("patch size must be >= 1");
    }
};

// Where a labeled patch came from. Matched ground truth stays "gt", a missed
// ground-truth point becomes "fn", a matched stage-1 centroid "tp" and an
// unmatched one "fp" — one bucket per patch, so the three positive buckets
// partition the positive set exactly.
enum class Provenance { gt, tp, fn, fp };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct PatchCounts {
    std::int64_t gt = 0;  // matched ground-truth points
    std::int64_t tp = 0;  // matched stage-1 centroids
    std::int64_t fn = 0;  // missed ground-truth points
    std::int64_t fp = 0;  // unmatched stage-1 centroids

    std::int64_t positive_total() const { return gt + tp + fn; }
    // The tally is self-consistent when every matched centroid pairs with
    // exactly one matched ground-truth point.
    bool consistent() const { return gt == tp && gt >= 0 && fn >= 0 && fp >= 0; }
};

struct LabeledPoint {
    Point point;
    Provenance provenance = Provenance::gt;
    std::string image;
};

struct LabeledPatchSet {
    std::vector<LabeledPoint> positives;  // provenance gt | tp | fn
    std::vector<LabeledPoint> negatives;  // provenance fp
    PatchCounts counts;
};

// Rasterizes one filled disk of `spec.radius` per included annotation:
// pixel (px,py) is foreground iff (px-x)^2 + (py-y)^2 <= radius^2 for some
// annotation. Segmentation training mode (include_hard_negatives) draws
// disks for both mitoses and hard-negative mimickers; otherwise mitoses
// only. Disks are clipped at the image border. Annotations with other
// labels are ignored; annotations outside the image are rejected.
BinaryMask synthesize_mask(const std::vector<Annotation>& annotations, int width, int height,
                           const MaskSpec& spec, bool include_hard_negatives);

// size x size crop whose center pixel (index size/2) lands on round(center).
// Out-of-bounds pixels are filled per the border policy.
Raster extract_patch(const Raster& image, const Point& center, const PatchSpec& spec);

// Builds the stage-2 training set from ground truth and stage-1 detections:
// every gt point is a positive (provenance gt if matched, fn if missed),
// every matched detection centroid is an extra positive (tp; near-duplicates
// of their gt partners are intentional), every unmatched detection is a
// negative (fp). Matching is the evaluation module's greedy matcher.
LabeledPatchSet label_candidates(const std::vector<Annotation>& gt,
                                 const std::vector<Detection>& stage1, double match_radius);

struct TrainingCrop {
    Raster image;
    BinaryMask mask;
    int x = 0;  // top-left in the source image
    int y = 0;
};

// Foreground-oversampled crop sampler: each draw is, with probability
// p_foreground, centered on a uniformly chosen foreground pixel (clamped to
// stay in bounds), otherwise uniform over all valid positions. When the mask
// has no foreground the sampler falls back to uniform with a warning.
std::vector<TrainingCrop> sample_training_crops(const Raster& image, const BinaryMask& mask,
                                                int crop, int n, double p_foreground,
                                                std::uint64_t seed);

}  // namespace mitodet

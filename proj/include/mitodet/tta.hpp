#pragma once

#include <cstdint>
#include <vector>

#include "mitodet/core.hpp"
#include "mitodet/raster_ops.hpp"

namespace mitodet {

// One of the eight symmetries of the square: optional horizontal flip
// followed by a rotation of 0/90/180/270 degrees counterclockwise. Every
// element has an exact inverse in the group, so map-space averaging after
// inversion is lossless (pure index permutations, no interpolation).
struct RigidTransform {
    int rotation = 0;           // degrees CCW, one of 0/90/180/270
    bool flip_horizontal = false;

    bool is_identity() const { return rotation == 0 && !flip_horizontal; }
    bool operator==(const RigidTransform&) const = default;
};

// All 8 group elements; index 0 is the identity.
const std::vector<RigidTransform>& rigid_group();

// compose(a, b): the transform equivalent to applying b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);

// Quarter turns require square inputs; 0/180 rotations and flips work on any
// shape (clipped edge tiles use that subgroup).
Raster apply_transform(const Raster& img, const RigidTransform& t);
ProbabilityMap apply_transform(const ProbabilityMap& map, const RigidTransform& t);

// Applies t^-1. invert_map(apply_transform(m, t), t) == m, bit-exact.
ProbabilityMap invert_map(const ProbabilityMap& map, const RigidTransform& t);

enum class TtaMode { seg3, cls3_crop, cls5 };

struct TtaPolicy {
    TtaMode mode = TtaMode::seg3;
    int k = 3;
    // cls3_crop only: per-view centered crop side fraction drawn uniformly
    // from [crop_fraction, 1].
    double crop_fraction = 0.9;
    std::uint64_t seed = 0;

    static TtaPolicy seg(std::uint64_t seed) { return {TtaMode::seg3, 3, 1.0, seed}; }
    static TtaPolicy cls_crop(std::uint64_t seed, double crop_fraction = 0.9) {
        return {TtaMode::cls3_crop, 3, crop_fraction, seed};
    }
    static TtaPolicy cls5(std::uint64_t seed) { return {TtaMode::cls5, 5, 1.0, seed}; }

    void validate() const;
};

struct TtaView {
    RigidTransform transform;
    double crop_fraction = 1.0;  // 1.0 = no crop
    Raster image;
};

// Expands a square input into k views. View 0 is always the raw input
// (identity, no crop); the rest are drawn without replacement from the
// non-identity group elements, plus a centered crop re-scaled to the
// original size in cls3_crop mode. Deterministic given policy.seed.
std::vector<TtaView> make_views(const Raster& input, const TtaPolicy& policy);

// Per-pixel mean of the maps after inverting each by its view transform.
ProbabilityMap average_seg_tta(const std::vector<ProbabilityMap>& maps,
                               const std::vector<RigidTransform>& transforms);

// Training-time augmentation. Stages run in a fixed order: crop-and-resize,
// horizontal flip, rotation, brightness, hue, saturation, additive Gaussian
// noise, Gaussian blur. Every stage is gated by its probability and all
// randomness comes from the seed.
struct AugmentConfig {
    double crop_prob = 0.0;
    double crop_min_scale = 0.8;    // crop side fraction lower bound
    double flip_prob = 0.0;
    double rotate_prob = 0.0;       // 90/180/270 on square inputs, 180 otherwise
    double brightness_lo = 1.0;     // multiplicative factor range
    double brightness_hi = 1.0;
    double hue_shift_deg = 0.0;     // shift drawn from [-x, +x]
    double saturation_lo = 1.0;     // multiplicative factor range
    double saturation_hi = 1.0;
    double noise_sigma = 0.0;       // additive, 8-bit units
    double blur_prob = 0.0;
    double blur_sigma = 0.0;

    void validate() const;
};

Raster augment_train(const Raster& patch, std::uint64_t seed, const AugmentConfig& config);

}  // namespace mitodet

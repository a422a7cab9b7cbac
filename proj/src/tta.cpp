#include "mitodet/tta.hpp"

#include <algorithm>
#include <cmath>

#include "mitodet/rng.hpp"

namespace mitodet {

const std::vector<RigidTransform>& rigid_group() {
    static const std::vector<RigidTransform> group = {
        {0, false},   {90, false},  {180, false},  {270, false},
        {0, true},    {90, true},   {180, true},   {270, true},
    };
    return group;
}

namespace {

void check_element(const RigidTransform& t) {
    if (t.rotation != 0 && t.rotation != 90 && t.rotation != 180 && t.rotation != 270)
        throw BadInput("rigid transform rotation must be one of 0/90/180/270");
}

// Source coordinates for output pixel (x, y) of a w x h grid under t (flip
// first, then CCW rotation). Quarter turns require w == h; 0/180 and flips
// preserve any shape.
inline void source_coords(const RigidTransform& t, int w, int h, int x, int y, int& sx, int& sy) {
    switch (t.rotation) {
        case 0: sx = x; sy = y; break;
        case 90: sx = w - 1 - y; sy = x; break;
        case 180: sx = w - 1 - x; sy = h - 1 - y; break;
        default: sx = y; sy = h - 1 - x; break;  // 270
    }
    if (t.flip_horizontal) sx = w - 1 - sx;
}

void check_shape(const RigidTransform& t, int w, int h) {
    if ((t.rotation == 90 || t.rotation == 270) && w != h)
        throw BadInput("quarter-turn rigid transforms require square inputs");
}

}  // namespace

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    check_element(a);
    check_element(b);
    RigidTransform r;
    if (!a.flip_horizontal) {
        r.rotation = (a.rotation + b.rotation) % 360;
        r.flip_horizontal = b.flip_horizontal;
    } else {
        r.rotation = ((a.rotation - b.rotation) % 360 + 360) % 360;
        r.flip_horizontal = !b.flip_horizontal;
    }
    return r;
}

RigidTransform inverse(const RigidTransform& t) {
    check_element(t);
    if (t.flip_horizontal) return t;  // reflections are involutions
    return {(360 - t.rotation) % 360, false};
}

Raster apply_transform(const Raster& img, const RigidTransform& t) {
    check_element(t);
    if (t.is_identity()) return img;
    check_shape(t, img.width, img.height);
    Raster out;
    out.width = img.width;
    out.height = img.height;
    out.rgb.resize(img.rgb.size());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            int sx, sy;
            source_coords(t, img.width, img.height, x, y, sx, sy);
            const std::uint8_t* s = img.pixel(sx, sy);
            std::uint8_t* d = out.pixel(x, y);
            d[0] = s[0];
            d[1] = s[1];
            d[2] = s[2];
        }
    }
    return out;
}

ProbabilityMap apply_transform(const ProbabilityMap& map, const RigidTransform& t) {
    check_element(t);
    if (t.is_identity()) return map;
    check_shape(t, map.width, map.height);
    ProbabilityMap out = ProbabilityMap::zeros(map.width, map.height, map.origin);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            int sx, sy;
            source_coords(t, map.width, map.height, x, y, sx, sy);
            out.at(x, y) = map.at(sx, sy);
        }
    }
    return out;
}

ProbabilityMap invert_map(const ProbabilityMap& map, const RigidTransform& t) {
    return apply_transform(map, inverse(t));
}

void TtaPolicy::validate() const {
    const int expected = mode == TtaMode::cls5 ? 5 : 3;
    if (k != expected)
        throw BadInput("tta policy k=" + std::to_string(k) + " does not match its mode");
    if (!(crop_fraction > 0.0 && crop_fraction <= 1.0))
        throw BadInput("tta crop_fraction must be in (0,1]");
}

std::vector<TtaView> make_views(const Raster& input, const TtaPolicy& policy) {
    policy.validate();
    if (input.width != input.height)
        throw BadInput("make_views requires a square input");

    Rng rng(mix_seed({policy.seed, 0x74746176u}));

    // Partial Fisher-Yates over the 7 non-identity elements.
    std::vector<int> pool = {1, 2, 3, 4, 5, 6, 7};
    std::vector<TtaView> views;
    views.reserve(policy.k);

    TtaView identity;
    identity.transform = RigidTransform{};
    identity.crop_fraction = 1.0;
    identity.image = input;
    views.push_back(std::move(identity));

    for (int i = 1; i < policy.k; ++i) {
        const std::size_t j = rng.below(pool.size());
        const int idx = pool[j];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
        TtaView v;
        v.transform = rigid_group()[idx];
        v.crop_fraction = 1.0;
        v.image = apply_transform(input, v.transform);
        views.push_back(std::move(v));
    }

    if (policy.mode == TtaMode::cls3_crop) {
        const int n = input.width;
        for (int i = 1; i < policy.k; ++i) {
            const double f = rng.uniform(policy.crop_fraction, 1.0);
            const int side = std::max(1, static_cast<int>(std::lround(f * n)));
            if (side >= n) {
                views[i].crop_fraction = 1.0;
                continue;
            }
            views[i].crop_fraction = static_cast<double>(side) / n;
            const int off = (n - side) / 2;
            const Raster cropped = crop_raster(views[i].image, off, off, side, side);
            views[i].image = resize_bilinear(cropped, n, n);
        }
    }
    return views;
}

ProbabilityMap average_seg_tta(const std::vector<ProbabilityMap>& maps,
                               const std::vector<RigidTransform>& transforms) {
    if (maps.empty()) throw BadInput("average_seg_tta: no maps");
    if (maps.size() != transforms.size())
        throw BadInput("average_seg_tta: map/transform count mismatch");

    ProbabilityMap first = invert_map(maps[0], transforms[0]);
    std::vector<double> acc(first.values.begin(), first.values.end());
    for (std::size_t i = 1; i < maps.size(); ++i) {
        const ProbabilityMap inv = invert_map(maps[i], transforms[i]);
        if (inv.width != first.width || inv.height != first.height)
            throw BadInput("average_seg_tta: inverted map shapes disagree");
        for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += inv.values[p];
    }
    ProbabilityMap out = ProbabilityMap::zeros(first.width, first.height, first.origin);
    const double inv_n = 1.0 / static_cast<double>(maps.size());
    for (std::size_t p = 0; p < acc.size(); ++p)
        out.values[p] = static_cast<float>(acc[p] * inv_n);
    return out;
}

void AugmentConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw BadInput(std::string(name) + " must be in [0,1]");
    };
    prob(crop_prob, "crop_prob");
    prob(flip_prob, "flip_prob");
    prob(rotate_prob, "rotate_prob");
    prob(blur_prob, "blur_prob");
    if (!(crop_min_scale > 0.0 && crop_min_scale <= 1.0))
        throw BadInput("crop_min_scale must be in (0,1]");
    if (!(brightness_lo > 0.0 && brightness_hi >= brightness_lo))
        throw BadInput("brightness range invalid");
    if (!(saturation_lo >= 0.0 && saturation_hi >= saturation_lo))
        throw BadInput("saturation range invalid");
    if (hue_shift_deg < 0.0 || hue_shift_deg > 180.0)
        throw BadInput("hue_shift_deg must be in [0,180]");
    if (noise_sigma < 0.0) throw BadInput("noise_sigma must be >= 0");
    if (blur_sigma < 0.0) throw BadInput("blur_sigma must be >= 0");
}

Raster augment_train(const Raster& patch, std::uint64_t seed, const AugmentConfig& config) {
    config.validate();
    Rng rng(mix_seed({seed, 0x61756774u}));
    Raster img = patch;

    if (rng.bernoulli(config.crop_prob)) {
        const double s = rng.uniform(config.crop_min_scale, 1.0);
        const int cw = std::max(1, static_cast<int>(std::lround(s * img.width)));
        const int ch = std::max(1, static_cast<int>(std::lround(s * img.height)));
        if (cw < img.width || ch < img.height) {
            const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - cw + 1)));
            const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - ch + 1)));
            img = resize_bilinear(crop_raster(img, x0, y0, cw, ch), patch.width, patch.height);
        }
    }

    if (rng.bernoulli(config.flip_prob)) {
        Raster flipped = img;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const std::uint8_t* s = img.pixel(img.width - 1 - x, y);
                std::uint8_t* d = flipped.pixel(x, y);
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            }
        img = std::move(flipped);
    }

    if (rng.bernoulli(config.rotate_prob)) {
        if (img.width == img.height) {
            const int k = 1 + static_cast<int>(rng.below(3));
            img = apply_transform(img, RigidTransform{90 * k, false});
        } else {
            // only the shape-preserving rotation is available
            img = apply_transform(img, RigidTransform{180, false});
        }
    }

    const double brightness = rng.uniform(config.brightness_lo, config.brightness_hi);
    if (brightness != 1.0) {
        for (std::uint8_t& c : img.rgb)
            c = static_cast<std::uint8_t>(std::clamp(std::llround(c * brightness), 0ll, 255ll));
    }

    const double hue_shift = config.hue_shift_deg > 0.0
                                 ? rng.uniform(-config.hue_shift_deg, config.hue_shift_deg)
                                 : 0.0;
    const double saturation = rng.uniform(config.saturation_lo, config.saturation_hi);
    if (hue_shift != 0.0 || saturation != 1.0) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                std::uint8_t* p = img.pixel(x, y);
                double h, s, v;
                rgb_to_hsv(p[0], p[1], p[2], h, s, v);
                h += hue_shift;
                s = std::clamp(s * saturation, 0.0, 1.0);
                hsv_to_rgb(h, s, v, p[0], p[1], p[2]);
            }
    }

    if (config.noise_sigma > 0.0) {
        for (std::uint8_t& c : img.rgb) {
            const double v = c + rng.gaussian(0.0, config.noise_sigma);
            c = static_cast<std::uint8_t>(std::clamp(std::llround(v), 0ll, 255ll));
        }
    }

    if (config.blur_sigma > 0.0 && rng.bernoulli(config.blur_prob))
        gaussian_blur(img, config.blur_sigma);

    return img;
}

}  // namespace mitodet

#include <doctest.h>

#include <algorithm>
#include <set>

#include "mitodet/rng.hpp"
#include "mitodet/tta.hpp"

using namespace mitodet;

namespace {

ProbabilityMap random_map(int n, std::uint64_t seed) {
    Rng rng(seed);
    ProbabilityMap m = ProbabilityMap::zeros(n, n);
    for (float& v : m.values) v = static_cast<float>(rng.uniform());
    return m;
}

Raster random_raster(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Raster img = Raster::filled(w, h, 0, 0, 0);
    for (auto& c : img.rgb) c = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

int group_index(const RigidTransform& t) {
    const auto& g = rigid_group();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] == t) return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST_CASE("the rigid group has 8 distinct elements, identity first") {
    const auto& g = rigid_group();
    REQUIRE(g.size() == 8);
    CHECK(g[0].is_identity());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) CHECK_FALSE(g[i] == g[j]);
}

TEST_CASE("compose matches the pixel-level action and stays in the group") {
    const ProbabilityMap m = random_map(9, 1);
    for (const RigidTransform& a : rigid_group()) {
        for (const RigidTransform& b : rigid_group()) {
            const RigidTransform c = compose(a, b);
            CHECK(group_index(c) >= 0);  // closure
            const ProbabilityMap via_two = apply_transform(apply_transform(m, b), a);
            const ProbabilityMap via_one = apply_transform(m, c);
            CHECK(via_two.values == via_one.values);
        }
    }
}

TEST_CASE("every element inverts exactly") {
    const ProbabilityMap m = random_map(16, 2);
    for (const RigidTransform& t : rigid_group()) {
        const RigidTransform inv = inverse(t);
        CHECK(group_index(inv) >= 0);
        CHECK(compose(inv, t).is_identity());
        const ProbabilityMap round = invert_map(apply_transform(m, t), t);
        CHECK(round.values == m.values);  // bit-exact
    }
}

TEST_CASE("invert_map round trips on random maps") {
    for (int i = 0; i < 20; ++i) {
        const ProbabilityMap m = random_map(7 + i % 5, 100 + i);
        for (const RigidTransform& t : rigid_group())
            CHECK(invert_map(apply_transform(m, t), t).values == m.values);
    }
}

TEST_CASE("hot pixel returns home") {
    ProbabilityMap m = ProbabilityMap::zeros(5, 5);
    m.at(0, 0) = 1.0f;
    const RigidTransform rot90{90, false};
    const ProbabilityMap rotated = apply_transform(m, rot90);
    CHECK(rotated.at(0, 0) == 0.0f);  // moved away
    const ProbabilityMap back = invert_map(rotated, rot90);
    CHECK(back.at(0, 0) == 1.0f);
}

TEST_CASE("identity transform is a no-op") {
    const ProbabilityMap m = random_map(6, 3);
    CHECK(apply_transform(m, RigidTransform{}).values == m.values);
    CHECK(invert_map(m, RigidTransform{}).values == m.values);
}

TEST_CASE("quarter turns reject non-square inputs, half turns accept them") {
    const Raster rect = random_raster(8, 4, 4);
    CHECK_THROWS_AS(apply_transform(rect, RigidTransform{90, false}), BadInput);
    CHECK_NOTHROW(apply_transform(rect, RigidTransform{180, false}));
    CHECK_NOTHROW(apply_transform(rect, RigidTransform{0, true}));
    // and they still invert exactly
    ProbabilityMap m = ProbabilityMap::zeros(8, 4);
    m.at(2, 1) = 0.5f;
    for (const RigidTransform t : {RigidTransform{180, false}, RigidTransform{0, true},
                                   RigidTransform{180, true}})
        CHECK(invert_map(apply_transform(m, t), t).values == m.values);
}

TEST_CASE("make_views yields k views with the identity first") {
    const Raster input = random_raster(32, 32, 5);
    for (const TtaPolicy policy :
         {TtaPolicy::seg(9), TtaPolicy::cls_crop(9), TtaPolicy::cls5(9)}) {
        const auto views = make_views(input, policy);
        REQUIRE(static_cast<int>(views.size()) == policy.k);
        CHECK(views[0].transform.is_identity());
        CHECK(views[0].crop_fraction == 1.0);
        CHECK(views[0].image.rgb == input.rgb);
    }
}

TEST_CASE("views are deterministic given the seed") {
    const Raster input = random_raster(32, 32, 6);
    const auto a = make_views(input, TtaPolicy::cls_crop(1234));
    const auto b = make_views(input, TtaPolicy::cls_crop(1234));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].transform == b[i].transform);
        CHECK(a[i].crop_fraction == b[i].crop_fraction);
        CHECK(a[i].image.rgb == b[i].image.rgb);
    }
    const auto c = make_views(input, TtaPolicy::cls_crop(1235));
    bool any_difference = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].transform == c[i].transform) || a[i].crop_fraction != c[i].crop_fraction)
            any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("cls5 draws five distinct transforms") {
    const Raster input = random_raster(16, 16, 7);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto views = make_views(input, TtaPolicy::cls5(seed));
        std::set<int> seen;
        for (const auto& v : views) seen.insert(group_index(v.transform));
        CHECK(seen.size() == 5);  // no duplicates within one call
        CHECK(seen.count(0) == 1);
    }
}

TEST_CASE("central crops stay within the configured fraction") {
    const Raster input = random_raster(64, 64, 8);
    const auto views = make_views(input, TtaPolicy::cls_crop(3, 0.85));
    for (std::size_t i = 1; i < views.size(); ++i) {
        CHECK(views[i].crop_fraction >= 0.84);
        CHECK(views[i].crop_fraction <= 1.0);
        CHECK(views[i].image.width == 64);  // rescaled back
    }
}

TEST_CASE("make_views rejects non-square inputs and bad policies") {
    const Raster rect = random_raster(16, 8, 9);
    CHECK_THROWS_AS(make_views(rect, TtaPolicy::seg(1)), BadInput);
    TtaPolicy bad = TtaPolicy::seg(1);
    bad.k = 5;
    CHECK_THROWS_AS(make_views(random_raster(8, 8, 1), bad), BadInput);
    TtaPolicy bad_crop = TtaPolicy::cls_crop(1, 0.0);
    CHECK_THROWS_AS(make_views(random_raster(8, 8, 1), bad_crop), BadInput);
}

TEST_CASE("average_seg_tta of identical identity maps is the identity") {
    const ProbabilityMap m = random_map(12, 10);
    const auto out = average_seg_tta({m, m, m}, {RigidTransform{}, RigidTransform{}, RigidTransform{}});
    for (std::size_t i = 0; i < m.values.size(); ++i)
        CHECK(out.values[i] == doctest::Approx(m.values[i]).epsilon(1e-6));
}

TEST_CASE("average_seg_tta averages constants") {
    auto constant = [](float v) {
        ProbabilityMap m = ProbabilityMap::zeros(4, 4);
        std::fill(m.values.begin(), m.values.end(), v);
        return m;
    };
    const auto out = average_seg_tta({constant(0.2f), constant(0.4f), constant(0.6f)},
                                     {RigidTransform{}, RigidTransform{90, false},
                                      RigidTransform{0, true}});
    for (const float v : out.values) CHECK(v == doctest::Approx(0.4));
}

TEST_CASE("a planted blob survives TTA averaging only at its true location") {
    ProbabilityMap base = ProbabilityMap::zeros(21, 21);
    base.at(4, 7) = 0.9f;  // deliberately off-center

    const std::vector<RigidTransform> transforms = {RigidTransform{}, RigidTransform{90, false},
                                                    RigidTransform{0, true}};
    std::vector<ProbabilityMap> view_maps;
    for (const RigidTransform& t : transforms) view_maps.push_back(apply_transform(base, t));

    const ProbabilityMap avg = average_seg_tta(view_maps, transforms);
    for (int y = 0; y < 21; ++y)
        for (int x = 0; x < 21; ++x) {
            if (x == 4 && y == 7)
                CHECK(avg.at(x, y) == doctest::Approx(0.9));
            else
                CHECK(avg.at(x, y) == 0.0f);
        }
}

TEST_CASE("average_seg_tta validates inputs") {
    const ProbabilityMap m = random_map(4, 11);
    CHECK_THROWS_AS(average_seg_tta({}, {}), BadInput);
    CHECK_THROWS_AS(average_seg_tta({m}, {RigidTransform{}, RigidTransform{}}), BadInput);
}

TEST_CASE("no-op augmentation config returns the input") {
    const Raster img = random_raster(24, 24, 12);
    const AugmentConfig config;  // all probabilities zero, unit factors
    CHECK(augment_train(img, 5, config).rgb == img.rgb);
}

TEST_CASE("forced flip equals a horizontal flip") {
    const Raster img = random_raster(24, 24, 13);
    AugmentConfig config;
    config.flip_prob = 1.0;
    const Raster out = augment_train(img, 5, config);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            REQUIRE(out.pixel(x, y)[0] == img.pixel(23 - x, y)[0]);
            REQUIRE(out.pixel(x, y)[2] == img.pixel(23 - x, y)[2]);
        }
}

TEST_CASE("brightness jitter scales channels with clamping") {
    const Raster img = Raster::filled(8, 8, 100, 100, 240);
    AugmentConfig config;
    config.brightness_lo = config.brightness_hi = 1.1;
    const Raster out = augment_train(img, 1, config);
    CHECK(out.pixel(0, 0)[0] == 110);
    CHECK(out.pixel(0, 0)[1] == 110);
    CHECK(out.pixel(0, 0)[2] == 255);  // 264 clamps
}

TEST_CASE("augmentation is deterministic given the seed") {
    const Raster img = random_raster(32, 32, 14);
    AugmentConfig config;
    config.crop_prob = 0.5;
    config.flip_prob = 0.5;
    config.rotate_prob = 0.5;
    config.brightness_lo = 0.9;
    config.brightness_hi = 1.1;
    config.hue_shift_deg = 10.0;
    config.saturation_lo = 0.8;
    config.saturation_hi = 1.2;
    config.noise_sigma = 3.0;
    config.blur_prob = 0.5;
    config.blur_sigma = 1.0;
    CHECK(augment_train(img, 99, config).rgb == augment_train(img, 99, config).rgb);
    CHECK(augment_train(img, 99, config).rgb != augment_train(img, 100, config).rgb);
}

TEST_CASE("invalid augmentation ranges are rejected") {
    AugmentConfig config;
    config.flip_prob = 1.5;
    CHECK_THROWS_AS(config.validate(), BadInput);
    config = AugmentConfig{};
    config.brightness_lo = 1.2;
    config.brightness_hi = 0.8;
    CHECK_THROWS_AS(config.validate(), BadInput);
    config = AugmentConfig{};
    config.noise_sigma = -1.0;
    CHECK_THROWS_AS(config.validate(), BadInput);
    config = AugmentConfig{};
    config.crop_min_scale = 0.0;
    CHECK_THROWS_AS(config.validate(), BadInput);
}

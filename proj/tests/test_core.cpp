#include <doctest.h>

#include <cmath>

#include "mitodet/core.hpp"
#include "mitodet/rng.hpp"

using namespace mitodet;

TEST_CASE("distance basics") {
    CHECK(distance({0, 0}, {0, 0}) == 0.0);
    CHECK(distance({0, 0}, {3, 4}) == 5.0);
    CHECK(distance({1, 1}, {4, 5}) == doctest::Approx(std::sqrt(9.0 + 16.0)));
}

TEST_CASE("distance symmetry and triangle inequality on random triples") {
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const Point a{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        const Point b{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        const Point c{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        CHECK(distance(a, b) == distance(b, a));
        CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
        CHECK(distance(a, b) >= 0.0);
    }
}

TEST_CASE("yx ordering") {
    CHECK(yx_less({5, 1}, {0, 2}));
    CHECK(yx_less({1, 3}, {2, 3}));
    CHECK_FALSE(yx_less({2, 3}, {2, 3}));
}

TEST_CASE("label enum round trip") {
    for (const Label l : {Label::mitosis, Label::hard_negative, Label::atypical, Label::normal})
        CHECK(label_from_string(to_string(l)) == l);
    CHECK_THROWS_AS(label_from_string("mitotic"), BadInput);
}

TEST_CASE("image ref validation") {
    ImageRef ok{"img", 100, 50, 0.25, std::nullopt};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.contains({0, 0}));
    CHECK(ok.contains({99.5, 49.5}));
    CHECK_FALSE(ok.contains({100, 0}));
    CHECK_FALSE(ok.contains({-0.1, 0}));

    CHECK_THROWS_AS((ImageRef{"", 10, 10, {}, {}}.validate()), BadInput);
    CHECK_THROWS_AS((ImageRef{"x", 0, 10, {}, {}}.validate()), BadInput);
    CHECK_THROWS_AS((ImageRef{"x", 10, 10, -1.0, {}}.validate()), BadInput);
}

TEST_CASE("detection construction rejects out-of-range scores") {
    CHECK_NOTHROW(make_detection({1, 2}, 0.0, Stage::segmentation, "i"));
    CHECK_NOTHROW(make_detection({1, 2}, 1.0, Stage::verified, "i"));
    CHECK_THROWS_AS(make_detection({1, 2}, 1.0001, Stage::verified, "i"), BadInput);
    CHECK_THROWS_AS(make_detection({1, 2}, -0.1, Stage::verified, "i"), BadInput);
    const double nan = std::nan("");
    CHECK_THROWS_AS(make_detection({nan, 2}, 0.5, Stage::verified, "i"), BadInput);
}

TEST_CASE("model outputs are clamped, not rejected") {
    CHECK(clamp_probability(0.5, "m") == 0.5);
    CHECK(clamp_probability(1.0 + 1e-9, "m") == 1.0);
    CHECK(clamp_probability(-0.25, "m") == 0.0);
    CHECK_THROWS_AS(clamp_probability(std::nan(""), "m"), BadInput);
}

TEST_CASE("probability map construction validates values") {
    CHECK_NOTHROW(ProbabilityMap::from_values(2, 2, {}, {0.0f, 0.5f, 1.0f, 0.25f}));
    CHECK_THROWS_AS(ProbabilityMap::from_values(2, 2, {}, {0.0f, 0.5f, 1.5f, 0.25f}), BadInput);
    CHECK_THROWS_AS(ProbabilityMap::from_values(2, 2, {}, {0.0f, 0.5f}), BadInput);

    const ProbabilityMap m = ProbabilityMap::zeros(3, 2);
    CHECK(m.size() == 6);
    CHECK(m.at(2, 1) == 0.0f);
}

TEST_CASE("seed mixing separates nearby keys") {
    CHECK(mix_seed({1, 2, 3}) != mix_seed({1, 2, 4}));
    CHECK(mix_seed({1, 2, 3}) != mix_seed({1, 3, 2}));
    CHECK(mix_seed({42}) == mix_seed({42}));
    CHECK(fnv1a("roi_1") != fnv1a("roi_2"));
}

TEST_CASE("rng samplers are deterministic and in range") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(5);
    for (int i = 0; i < 1000; ++i) CHECK(c.below(7) < 7);
}

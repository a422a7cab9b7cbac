#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mitodet/rng.hpp"
#include "mitodet/tiling.hpp"

using namespace mitodet;

namespace {

// Independent coverage oracle: mark every pixel touched by some tile.
bool covers_every_pixel(const TilePlan& plan, int width, int height) {
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(width) * height, 0);
    for (const Tile& t : plan.tiles) {
        if (t.x < 0 || t.y < 0 || t.x + t.width > width || t.y + t.height > height) return false;
        for (int y = t.y; y < t.y + t.height; ++y)
            for (int x = t.x; x < t.x + t.width; ++x)
                hit[static_cast<std::size_t>(y) * width + x] = 1;
    }
    return std::all_of(hit.begin(), hit.end(), [](std::uint8_t v) { return v == 1; });
}

std::set<int> x_origins(const TilePlan& plan) {
    std::set<int> xs;
    for (const Tile& t : plan.tiles) xs.insert(t.x);
    return xs;
}

}  // namespace

TEST_CASE("single tile when image equals the window") {
    const TilePlan plan = plan_tiles(512, 512, 512, 256);
    REQUIRE(plan.tiles.size() == 1);
    CHECK(plan.tiles[0].x == 0);
    CHECK(plan.tiles[0].y == 0);
    CHECK(plan.tiles[0].width == 512);
    CHECK(covers_every_pixel(plan, 512, 512));
}

TEST_CASE("stride grid over a wide image") {
    const TilePlan plan = plan_tiles(1024, 512, 512, 256);
    CHECK(plan.tiles.size() == 3);
    CHECK(x_origins(plan) == std::set<int>{0, 256, 512});
    CHECK(covers_every_pixel(plan, 1024, 512));
}

TEST_CASE("last origin clamps to the image edge") {
    const TilePlan plan = plan_tiles(600, 512, 512, 256);
    CHECK(plan.tiles.size() == 2);
    CHECK(x_origins(plan) == std::set<int>{0, 88});
    for (const Tile& t : plan.tiles) CHECK(t.x + t.width <= 600);
    CHECK(covers_every_pixel(plan, 600, 512));
}

TEST_CASE("small images get one clipped tile") {
    const TilePlan plan = plan_tiles(300, 200, 512, 256);
    REQUIRE(plan.tiles.size() == 1);
    CHECK(plan.tiles[0].width == 300);
    CHECK(plan.tiles[0].height == 200);
    CHECK(covers_every_pixel(plan, 300, 200));
}

TEST_CASE("plan_tiles rejects bad arguments") {
    CHECK_THROWS_AS(plan_tiles(100, 100, 512, 512), BadInput);
    CHECK_THROWS_AS(plan_tiles(100, 100, 512, 600), BadInput);
    CHECK_THROWS_AS(plan_tiles(0, 100, 512, 256), BadInput);
    CHECK_THROWS_AS(plan_tiles(100, -5, 512, 256), BadInput);
    CHECK_THROWS_AS(plan_tiles(100, 100, 512, -1), BadInput);
}

TEST_CASE("coverage holds for randomized sizes and windows") {
    Rng rng(404);
    for (int i = 0; i < 200; ++i) {
        const int w = 1 + static_cast<int>(rng.below(1400));
        const int h = 1 + static_cast<int>(rng.below(1400));
        const int window = 2 + static_cast<int>(rng.below(600));
        const int overlap = static_cast<int>(rng.below(static_cast<std::uint64_t>(window)));
        const TilePlan plan = plan_tiles(w, h, window, overlap);
        CHECK(covers_every_pixel(plan, w, h));
        // final tile ends exactly at the edge
        int max_x = 0, max_y = 0;
        for (const Tile& t : plan.tiles) {
            max_x = std::max(max_x, t.x + t.width);
            max_y = std::max(max_y, t.y + t.height);
        }
        CHECK(max_x == w);
        CHECK(max_y == h);
    }
}

TEST_CASE("plan_tiles is deterministic") {
    const TilePlan a = plan_tiles(1337, 901, 512, 256);
    const TilePlan b = plan_tiles(1337, 901, 512, 256);
    REQUIRE(a.tiles.size() == b.tiles.size());
    for (std::size_t i = 0; i < a.tiles.size(); ++i) {
        CHECK(a.tiles[i].x == b.tiles[i].x);
        CHECK(a.tiles[i].y == b.tiles[i].y);
    }
}

namespace {

ProbabilityMap constant_tile(const Tile& t, float value) {
    ProbabilityMap m = ProbabilityMap::zeros(t.width, t.height,
                                             {static_cast<double>(t.x), static_cast<double>(t.y)});
    std::fill(m.values.begin(), m.values.end(), value);
    return m;
}

}  // namespace

TEST_CASE("stitch of constant tiles is constant") {
    const TilePlan plan = plan_tiles(1024, 768, 512, 256);
    std::vector<ProbabilityMap> maps;
    for (const Tile& t : plan.tiles) maps.push_back(constant_tile(t, 0.7f));
    const ProbabilityMap out = stitch(maps, plan, 1024, 768);
    for (const float v : out.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("overlap strip averages the two contributing tiles") {
    // one row of two 512 tiles over a 768-wide image: x origins 0 and 256
    const TilePlan plan = plan_tiles(768, 512, 512, 256);
    REQUIRE(plan.tiles.size() == 2);
    std::vector<ProbabilityMap> maps = {constant_tile(plan.tiles[0], 0.2f),
                                        constant_tile(plan.tiles[1], 0.8f)};
    const ProbabilityMap out = stitch(maps, plan, 768, 512);

    // independent accumulate-and-count oracle
    std::vector<double> acc(out.size(), 0.0);
    std::vector<int> cnt(out.size(), 0);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const Tile& t = plan.tiles[i];
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) {
                acc[static_cast<std::size_t>(t.y + y) * 768 + t.x + x] += maps[i].at(x, y);
                cnt[static_cast<std::size_t>(t.y + y) * 768 + t.x + x] += 1;
            }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out.values[i] == doctest::Approx(acc[i] / cnt[i]).epsilon(1e-6));

    CHECK(out.at(0, 0) == doctest::Approx(0.2));
    CHECK(out.at(300, 10) == doctest::Approx(0.5));  // overlap strip [256, 512)
    CHECK(out.at(600, 10) == doctest::Approx(0.8));
}

TEST_CASE("single full tile stitches to the identity") {
    const TilePlan plan = plan_tiles(256, 256, 512, 128);
    Rng rng(7);
    ProbabilityMap m = ProbabilityMap::zeros(256, 256, {0, 0});
    for (float& v : m.values) v = static_cast<float>(rng.uniform());
    const ProbabilityMap out = stitch({m}, plan, 256, 256);
    CHECK(out.values == m.values);
}

TEST_CASE("stitch is insensitive to map order") {
    const TilePlan plan = plan_tiles(1000, 700, 512, 256);
    Rng rng(21);
    std::vector<ProbabilityMap> maps;
    for (const Tile& t : plan.tiles) {
        ProbabilityMap m = constant_tile(t, 0.0f);
        for (float& v : m.values) v = static_cast<float>(rng.uniform());
        maps.push_back(std::move(m));
    }
    const ProbabilityMap ordered = stitch(maps, plan, 1000, 700);
    std::mt19937 shuffler(3);
    std::shuffle(maps.begin(), maps.end(), shuffler);
    const ProbabilityMap shuffled = stitch(maps, plan, 1000, 700);
    CHECK(ordered.values == shuffled.values);  // bit-identical
}

TEST_CASE("stitched values stay within contributing bounds") {
    const TilePlan plan = plan_tiles(800, 600, 512, 256);
    Rng rng(5);
    std::vector<ProbabilityMap> maps;
    for (const Tile& t : plan.tiles) {
        ProbabilityMap m = constant_tile(t, 0.0f);
        for (float& v : m.values) v = static_cast<float>(rng.uniform());
        maps.push_back(std::move(m));
    }
    const ProbabilityMap out = stitch(maps, plan, 800, 600);
    for (std::size_t y = 0; y < 600; ++y)
        for (std::size_t x = 0; x < 800; ++x) {
            float lo = 1.0f, hi = 0.0f;
            for (std::size_t i = 0; i < plan.tiles.size(); ++i) {
                const Tile& t = plan.tiles[i];
                const int lx = static_cast<int>(x) - t.x;
                const int ly = static_cast<int>(y) - t.y;
                if (lx < 0 || ly < 0 || lx >= t.width || ly >= t.height) continue;
                lo = std::min(lo, maps[i].at(lx, ly));
                hi = std::max(hi, maps[i].at(lx, ly));
            }
            const float v = out.at(static_cast<int>(x), static_cast<int>(y));
            CHECK(v >= lo - 1e-6f);
            CHECK(v <= hi + 1e-6f);
        }
}

TEST_CASE("stitch max merge keeps the per-pixel maximum") {
    const TilePlan plan = plan_tiles(768, 512, 512, 256);
    std::vector<ProbabilityMap> maps = {constant_tile(plan.tiles[0], 0.2f),
                                        constant_tile(plan.tiles[1], 0.8f)};
    const ProbabilityMap out = stitch(maps, plan, 768, 512, MergeRule::max);
    CHECK(out.at(300, 10) == doctest::Approx(0.8));
    CHECK(out.at(0, 0) == doctest::Approx(0.2));
}

TEST_CASE("stitch rejects inconsistent inputs") {
    const TilePlan plan = plan_tiles(768, 512, 512, 256);
    std::vector<ProbabilityMap> maps = {constant_tile(plan.tiles[0], 0.2f)};
    CHECK_THROWS_AS(stitch(maps, plan, 768, 512), BadInput);  // count mismatch

    maps.push_back(ProbabilityMap::zeros(100, 100, {256, 0}));  // wrong size
    CHECK_THROWS_AS(stitch(maps, plan, 768, 512), BadInput);

    maps[1] = constant_tile(plan.tiles[0], 0.5f);  // duplicate origin
    CHECK_THROWS_AS(stitch(maps, plan, 768, 512), BadInput);
}

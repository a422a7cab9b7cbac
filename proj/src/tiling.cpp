#include "mitodet/tiling.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace mitodet {

namespace {

std::vector<int> axis_origins(int extent, int window, int stride) {
    std::vector<int> origins;
    if (extent <= window) {
        origins.push_back(0);
        return origins;
    }
    for (int o = 0; o + window < extent; o += stride) origins.push_back(o);
    origins.push_back(extent - window);
    return origins;
}

}  // namespace

TilePlan plan_tiles(int width, int height, int window, int overlap) {
    if (width < 1 || height < 1)
        throw BadInput("plan_tiles: image dimensions must be >= 1");
    if (window < 1) throw BadInput("plan_tiles: window must be >= 1");
    if (overlap < 0 || overlap >= window)
        throw BadInput("plan_tiles: overlap must satisfy 0 <= overlap < window");

    const int stride = window - overlap;
    TilePlan plan;
    plan.window = window;
    plan.overlap = overlap;
    plan.image_width = width;
    plan.image_height = height;

    const std::vector<int> xs = axis_origins(width, window, stride);
    const std::vector<int> ys = axis_origins(height, window, stride);
    plan.tiles.reserve(xs.size() * ys.size());
    for (int oy : ys) {
        for (int ox : xs) {
            Tile t;
            t.x = ox;
            t.y = oy;
            t.width = std::min(window, width - ox);
            t.height = std::min(window, height - oy);
            plan.tiles.push_back(t);
        }
    }
    return plan;
}

ProbabilityMap stitch(const std::vector<ProbabilityMap>& tile_maps, const TilePlan& plan,
                      int width, int height, MergeRule rule) {
    if (width != plan.image_width || height != plan.image_height)
        throw BadInput("stitch: output dimensions disagree with the plan");
    if (tile_maps.size() != plan.tiles.size())
        throw BadInput("stitch: got " + std::to_string(tile_maps.size()) + " maps for " +
                       std::to_string(plan.tiles.size()) + " tiles");

    // Key incoming maps by origin.
    std::map<std::pair<int, int>, const ProbabilityMap*> by_origin;
    for (const ProbabilityMap& m : tile_maps) {
        const auto key = std::make_pair(static_cast<int>(m.origin.x), static_cast<int>(m.origin.y));
        if (!by_origin.emplace(key, &m).second)
            throw BadInput("stitch: duplicate tile map for origin (" + std::to_string(key.first) +
                           "," + std::to_string(key.second) + ")");
    }

    std::vector<double> acc(static_cast<std::size_t>(width) * height, 0.0);
    std::vector<std::uint32_t> cnt(acc.size(), 0);

    for (const Tile& t : plan.tiles) {
        const auto it = by_origin.find({t.x, t.y});
        if (it == by_origin.end())
            throw BadInput("stitch: missing tile map for origin (" + std::to_string(t.x) + "," +
                           std::to_string(t.y) + ")");
        const ProbabilityMap& m = *it->second;
        if (m.width != t.width || m.height != t.height)
            throw BadInput("stitch: tile map at (" + std::to_string(t.x) + "," +
                           std::to_string(t.y) + ") is " + std::to_string(m.width) + "x" +
                           std::to_string(m.height) + ", expected " + std::to_string(t.width) +
                           "x" + std::to_string(t.height));
        for (int y = 0; y < t.height; ++y) {
            const std::size_t row = static_cast<std::size_t>(t.y + y) * width + t.x;
            for (int x = 0; x < t.width; ++x) {
                const float v = m.at(x, y);
                if (rule == MergeRule::mean) {
                    acc[row + x] += v;
                } else {
                    acc[row + x] = cnt[row + x] ? std::max(acc[row + x], static_cast<double>(v))
                                                : static_cast<double>(v);
                }
                ++cnt[row + x];
            }
        }
    }

    ProbabilityMap out = ProbabilityMap::zeros(width, height, Point{0.0, 0.0});
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (cnt[i] == 0)
            throw InternalError("stitch: uncovered pixel despite full-coverage plan");
        out.values[i] = static_cast<float>(rule == MergeRule::mean ? acc[i] / cnt[i] : acc[i]);
    }
    return out;
}

}  // namespace mitodet

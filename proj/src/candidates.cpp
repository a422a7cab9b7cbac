#include "mitodet/candidates.hpp"

#include <algorithm>
#include <numeric>

namespace mitodet {

BinaryMask binarize(const ProbabilityMap& map, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw BadInput("binarize threshold must be in [0,1]");
    BinaryMask mask = BinaryMask::zeros(map.width, map.height);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        mask.values[i] = map.values[i] >= t ? 1 : 0;
    return mask;
}

std::vector<Component> extract_components(const BinaryMask& mask, const ProbabilityMap& map,
                                          int connectivity, std::int64_t min_area) {
    if (mask.width != map.width || mask.height != map.height)
        throw BadInput("extract_components: mask and map shapes disagree");
    if (connectivity != 4 && connectivity != 8)
        throw BadInput("extract_components: connectivity must be 4 or 8");
    if (min_area < 1) throw BadInput("extract_components: min_area must be >= 1");

    const int w = mask.width, h = mask.height;
    std::vector<std::uint8_t> visited(mask.values.size(), 0);
    std::vector<Component> components;
    std::vector<std::pair<int, int>> stack;

    static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int n_dirs = connectivity == 4 ? 4 : 8;

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
            if (!mask.values[si] || visited[si]) continue;

            Component comp;
            double sum_x = 0.0, sum_y = 0.0;
            float peak = 0.0f;
            visited[si] = 1;
            stack.clear();
            stack.emplace_back(sx, sy);
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                comp.pixels.emplace_back(x, y);
                sum_x += x;
                sum_y += y;
                peak = std::max(peak, map.at(x, y));
                for (int d = 0; d < n_dirs; ++d) {
                    const int nx = x + dx8[d];
                    const int ny = y + dy8[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                    if (!mask.values[ni] || visited[ni]) continue;
                    visited[ni] = 1;
                    stack.emplace_back(nx, ny);
                }
            }
            comp.area = static_cast<std::int64_t>(comp.pixels.size());
            if (comp.area < min_area) continue;
            comp.centroid = Point{sum_x / comp.area, sum_y / comp.area};
            comp.peak_prob = peak;
            components.push_back(std::move(comp));
        }
    }

    std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
        if (a.peak_prob != b.peak_prob) return a.peak_prob > b.peak_prob;
        return yx_less(a.centroid, b.centroid);
    });
    return components;
}

std::vector<Detection> deduplicate(const std::vector<Detection>& dets, double radius) {
    if (radius < 0.0) throw BadInput("deduplicate: radius must be >= 0");

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
        return yx_less(dets[a].point, dets[b].point);
    });

    std::vector<Detection> kept;
    for (std::size_t i : order) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (distance(k.point, dets[i].point) <= radius) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(dets[i]);
    }
    return kept;
}

}  // namespace mitodet

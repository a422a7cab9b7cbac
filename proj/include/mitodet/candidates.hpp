#pragma once

#include <vector>

#include "mitodet/core.hpp"

namespace mitodet {

struct Component {
    std::vector<std::pair<int, int>> pixels;  // (x, y)
    Point centroid;
    double peak_prob = 0.0;
    std::int64_t area = 0;
};

// pixel = 1 iff map value >= t.
BinaryMask binarize(const ProbabilityMap& map, double t);

// Maximal connected foreground regions (4- or 8-connectivity). Regions
// smaller than min_area are dropped. Components carry the arithmetic-mean
// centroid of their pixels and the max map value, and come back sorted by
// peak_prob descending (ties by centroid (y,x) ascending).
std::vector<Component> extract_components(const BinaryMask& mask, const ProbabilityMap& map,
                                          int connectivity = 8, std::int64_t min_area = 10);

// Greedy suppression of near-duplicate centroids from overlapping tiles:
// visit by score descending (ties by (y,x)), keep a detection iff no
// already-kept one lies within `radius`. Kept order is preserved in the
// output, so pairwise distances of the result all exceed the radius.
std::vector<Detection> deduplicate(const std::vector<Detection>& dets, double radius = 30.0);

}  // namespace mitodet

#pragma once

#include <vector>

#include "mitodet/core.hpp"

namespace mitodet {

struct Tile {
    int x = 0;
    int y = 0;
    int width = 0;   // clipped to the image, <= window
    int height = 0;
};

struct TilePlan {
    int window = 512;
    int overlap = 256;
    int image_width = 0;
    int image_height = 0;
    std::vector<Tile> tiles;  // row-major over the origin grid
};

// Sliding-window plan. Origins advance by stride = window - overlap; the last
// origin on each axis is clamped to max(0, extent - window) so the final tile
// ends exactly at the image edge. Images smaller than the window get a single
// origin-0 tile clipped to the image. Coverage of every pixel is guaranteed.
TilePlan plan_tiles(int width, int height, int window = 512, int overlap = 256);

enum class MergeRule { mean, max };

// Merges per-tile probability maps back into one image-frame map. Maps are
// keyed to tiles by their origin, so callers may supply them in any order;
// accumulation happens in plan order and the result is bit-identical
// regardless of how the per-tile work was scheduled.
ProbabilityMap stitch(const std::vector<ProbabilityMap>& tile_maps, const TilePlan& plan,
                      int width, int height, MergeRule rule = MergeRule::mean);

}  // namespace mitodet

#pragma once

#include "mitodet/core.hpp"

namespace mitodet {

enum class BorderPolicy { mirror, zero };

// Symmetric reflection of an out-of-range index into [0, n). The edge sample
// repeats (-1 -> 0), which stays well defined down to n == 1.
int reflect_index(int i, int n);

// Copies the window [x0, x0+w) x [y0, y0+h); out-of-bounds pixels are filled
// per the border policy.
Raster crop_raster(const Raster& src, int x0, int y0, int w, int h,
                   BorderPolicy border = BorderPolicy::mirror);

Raster resize_bilinear(const Raster& src, int out_width, int out_height);

// In-place separable Gaussian blur with reflected borders. sigma <= 0 is a
// no-op.
void gaussian_blur(Raster& img, double sigma);

void rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v,
                std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

}  // namespace mitodet

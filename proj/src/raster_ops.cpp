#include "mitodet/raster_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mitodet {

int reflect_index(int i, int n) {
    if (n <= 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

Raster crop_raster(const Raster& src, int x0, int y0, int w, int h, BorderPolicy border) {
    if (w < 1 || h < 1) throw BadInput("crop dimensions must be >= 1");
    Raster out;
    out.width = w;
    out.height = h;
    out.rgb.assign(3 * static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int sx = x0 + x;
            const int sy = y0 + y;
            std::uint8_t* d = out.pixel(x, y);
            if (sx >= 0 && sx < src.width && sy >= 0 && sy < src.height) {
                const std::uint8_t* s = src.pixel(sx, sy);
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            } else if (border == BorderPolicy::mirror) {
                const std::uint8_t* s = src.pixel(reflect_index(sx, src.width),
                                                  reflect_index(sy, src.height));
                d[0] = s[0];
                d[1] = s[1];
                d[2] = s[2];
            }
            // zero policy: already zero-filled
        }
    }
    return out;
}

namespace {

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

Raster resize_bilinear(const Raster& src, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1) throw BadInput("resize dimensions must be >= 1");
    if (out_width == src.width && out_height == src.height) return src;

    Raster out;
    out.width = out_width;
    out.height = out_height;
    out.rgb.resize(3 * static_cast<std::size_t>(out_width) * out_height);

    const double sx = static_cast<double>(src.width) / out_width;
    const double sy = static_cast<double>(src.height) / out_height;

    for (int y = 0; y < out_height; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double ty = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < out_width; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double tx = std::clamp(fx - x0, 0.0, 1.0);
            const std::uint8_t* p00 = src.pixel(x0, y0);
            const std::uint8_t* p10 = src.pixel(x1, y0);
            const std::uint8_t* p01 = src.pixel(x0, y1);
            const std::uint8_t* p11 = src.pixel(x1, y1);
            std::uint8_t* d = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v = lerp(lerp(p00[c], p10[c], tx), lerp(p01[c], p11[c], tx), ty);
                d[c] = static_cast<std::uint8_t>(std::clamp(std::llround(v), 0ll, 255ll));
            }
        }
    }
    return out;
}

void gaussian_blur(Raster& img, double sigma) {
    if (sigma <= 0.0) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int w = img.width, h = img.height;
    std::vector<double> tmp(3 * static_cast<std::size_t>(w) * h);

    // horizontal pass
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                const std::uint8_t* p = img.pixel(reflect_index(x + i, w), y);
                const double k = kernel[i + radius];
                acc[0] += k * p[0];
                acc[1] += k * p[1];
                acc[2] += k * p[2];
            }
            double* t = &tmp[3 * (static_cast<std::size_t>(y) * w + x)];
            t[0] = acc[0];
            t[1] = acc[1];
            t[2] = acc[2];
        }
    }
    // vertical pass
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                const double* t = &tmp[3 * (static_cast<std::size_t>(reflect_index(y + i, h)) * w + x)];
                const double k = kernel[i + radius];
                acc[0] += k * t[0];
                acc[1] += k * t[1];
                acc[2] += k * t[2];
            }
            std::uint8_t* d = img.pixel(x, y);
            for (int c = 0; c < 3; ++c)
                d[c] = static_cast<std::uint8_t>(std::clamp(std::llround(acc[c]), 0ll, 255ll));
        }
    }
}

void rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8,
                double& h, double& s, double& v) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r) {
        h = 60.0 * std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
        h = 60.0 * ((b - r) / d + 2.0);
    } else {
        h = 60.0 * ((r - g) / d + 4.0);
    }
    if (h < 0.0) h += 360.0;
}

void hsv_to_rgb(double h, double s, double v,
                std::uint8_t& r8, std::uint8_t& g8, std::uint8_t& b8) {
    h = std::fmod(h, 360.0);
    if (h < 0.0) h += 360.0;
    const double c = v * s;
    const double x = c * (1.0 - std::fabs(std::fmod(h / 60.0, 2.0) - 1.0));
    const double m = v - c;
    double r = 0, g = 0, b = 0;
    if (h < 60) {
        r = c; g = x;
    } else if (h < 120) {
        r = x; g = c;
    } else if (h < 180) {
        g = c; b = x;
    } else if (h < 240) {
        g = x; b = c;
    } else if (h < 300) {
        r = x; b = c;
    } else {
        r = c; b = x;
    }
    auto to8 = [m](double u) {
        return static_cast<std::uint8_t>(std::clamp(std::llround((u + m) * 255.0), 0ll, 255ll));
    };
    r8 = to8(r);
    g8 = to8(g);
    b8 = to8(b);
}

}  // namespace mitodet

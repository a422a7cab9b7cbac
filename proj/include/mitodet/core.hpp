#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mitodet/common.hpp"

namespace mitodet {

// Coordinate convention used everywhere: x = column, y = row, origin at the
// top-left corner, pixel centers at integer coordinates.

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

// (y, x) lexicographic order; the tie-breaker for all deterministic sorts.
bool yx_less(const Point& a, const Point& b);

enum class Label { mitosis, hard_negative, atypical, normal };

Label label_from_string(std::string_view s);
std::string_view to_string(Label label);

enum class Stage { segmentation, verified };

std::string_view to_string(Stage stage);

// A named ROI raster: dimensions plus optional physical scale and tumor /
// domain group id. Pixel-denominated constants (mask radius, patch size,
// tile window) are pixel-space throughout; mpp is carried as metadata only.
struct ImageRef {
    std::string id;
    int width = 0;
    int height = 0;
    std::optional<double> mpp;
    std::optional<std::string> group;

    // Throws BadInput if dimensions < 1 or mpp <= 0.
    void validate() const;
    bool contains(const Point& p) const;
};

struct Annotation {
    Point point;
    Label label = Label::mitosis;
    std::string image;
};

struct Detection {
    Point point;
    double score = 0.0;
    Stage stage = Stage::segmentation;
    std::string image;
};

// Checked constructor: rejects scores outside [0,1]. Model adapters go
// through clamp_probability() instead, which tolerates float spill.
Detection make_detection(Point p, double score, Stage stage, std::string image);

// Clamps to [0,1]; warns (once per source) when the input was out of range
// by more than float noise. For scorer outputs only.
double clamp_probability(double value, const std::string& source);

// Row-major grid of probabilities aligned to an image or tile frame.
struct ProbabilityMap {
    int width = 0;
    int height = 0;
    Point origin;
    std::vector<float> values;  // width * height

    static ProbabilityMap zeros(int width, int height, Point origin = {});
    // Validates every value is in [0,1] and the size matches; throws BadInput.
    static ProbabilityMap from_values(int width, int height, Point origin,
                                      std::vector<float> values);

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
};

// Interleaved 8-bit RGB raster.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 * width * height

    static Raster filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    std::uint8_t* pixel(int x, int y) {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;  // 0 or 1, width * height

    static BinaryMask zeros(int width, int height);

    std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t foreground_count() const;
};

}  // namespace mitodet

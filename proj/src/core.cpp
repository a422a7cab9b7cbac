#include "mitodet/core.hpp"

#include <cmath>
#include <mutex>
#include <set>

namespace mitodet {

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool yx_less(const Point& a, const Point& b) {
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

Label label_from_string(std::string_view s) {
    if (s == "mitosis") return Label::mitosis;
    if (s == "hard_negative") return Label::hard_negative;
    if (s == "atypical") return Label::atypical;
    if (s == "normal") return Label::normal;
    throw BadInput("unknown annotation label: '" + std::string(s) + "'");
}

std::string_view to_string(Label label) {
    switch (label) {
        case Label::mitosis: return "mitosis";
        case Label::hard_negative: return "hard_negative";
        case Label::atypical: return "atypical";
        case Label::normal: return "normal";
    }
    return "?";
}

std::string_view to_string(Stage stage) {
    return stage == Stage::segmentation ? "segmentation" : "verified";
}

void ImageRef::validate() const {
    if (id.empty()) throw BadInput("image id must not be empty");
    if (width < 1 || height < 1)
        throw BadInput("image '" + id + "': dimensions must be >= 1");
    if (mpp && *mpp <= 0.0)
        throw BadInput("image '" + id + "': mpp must be > 0");
}

bool ImageRef::contains(const Point& p) const {
    return std::isfinite(p.x) && std::isfinite(p.y) &&
           p.x >= 0.0 && p.x < static_cast<double>(width) &&
           p.y >= 0.0 && p.y < static_cast<double>(height);
}

Detection make_detection(Point p, double score, Stage stage, std::string image) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw BadInput("detection point must be finite");
    if (!(score >= 0.0 && score <= 1.0))
        throw BadInput("detection score outside [0,1]: " + std::to_string(score));
    return Detection{p, score, stage, std::move(image)};
}

double clamp_probability(double value, const std::string& source) {
    if (value >= 0.0 && value <= 1.0) return value;
    if (std::isnan(value)) {
        throw BadInput("scorer '" + source + "' produced NaN");
    }
    static std::mutex mu;
    static std::set<std::string> seen;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (seen.insert(source).second) {
            warn("scorer '" + source + "' emitted probability " +
                 std::to_string(value) + "; clamping to [0,1]");
        }
    }
    return value < 0.0 ? 0.0 : 1.0;
}

ProbabilityMap ProbabilityMap::zeros(int width, int height, Point origin) {
    if (width < 1 || height < 1) throw BadInput("probability map dimensions must be >= 1");
    ProbabilityMap m;
    m.width = width;
    m.height = height;
    m.origin = origin;
    m.values.assign(static_cast<std::size_t>(width) * height, 0.0f);
    return m;
}

ProbabilityMap ProbabilityMap::from_values(int width, int height, Point origin,
                                           std::vector<float> values) {
    if (width < 1 || height < 1) throw BadInput("probability map dimensions must be >= 1");
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw BadInput("probability map value count does not match dimensions");
    for (float v : values) {
        if (!(v >= 0.0f && v <= 1.0f))
            throw BadInput("probability map value outside [0,1]: " + std::to_string(v));
    }
    ProbabilityMap m;
    m.width = width;
    m.height = height;
    m.origin = origin;
    m.values = std::move(values);
    return m;
}

Raster Raster::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (width < 1 || height < 1) throw BadInput("raster dimensions must be >= 1");
    Raster img;
    img.width = width;
    img.height = height;
    img.rgb.resize(3 * static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

BinaryMask BinaryMask::zeros(int width, int height) {
    if (width < 1 || height < 1) throw BadInput("mask dimensions must be >= 1");
    BinaryMask m;
    m.width = width;
    m.height = height;
    m.values.assign(static_cast<std::size_t>(width) * height, 0);
    return m;
}

std::size_t BinaryMask::foreground_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : values) n += v ? 1 : 0;
    return n;
}

}  // namespace mitodet

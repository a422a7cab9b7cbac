#include "mitodet/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "mitodet/rng.hpp"
#include "mitodet/tta.hpp"

namespace mitodet {

std::size_t select_best_epoch(const MetricSeries& series) {
    if (series.values.empty())
        throw BadInput("select_best_epoch: empty metric series '" + series.metric + "'");
    std::size_t best = 0;
    for (std::size_t i = 1; i < series.values.size(); ++i)
        if (series.values[i] > series.values[best]) best = i;
    return best;
}

namespace {

using PointsByImage = std::map<std::string, std::vector<Point>>;

PointsByImage index_by_image(const std::vector<Annotation>& planted) {
    PointsByImage by_image;
    for (const Annotation& a : planted) by_image[a.image].push_back(a.point);
    return by_image;
}

class OracleSegmenter final : public Segmenter {
public:
    OracleSegmenter(std::vector<Annotation> planted, OracleSegmenterParams params,
                    std::string name)
        : points_(index_by_image(planted)), params_(params), name_(std::move(name)) {
        if (!(params_.p_out >= 0.0 && params_.p_out <= params_.p_in && params_.p_in <= 1.0))
            throw BadInput("oracle segmenter requires 0 <= p_out <= p_in <= 1");
        if (params_.noise_sigma < 0.0) throw BadInput("oracle segmenter noise must be >= 0");
    }

    std::string name() const override { return name_; }

    ProbabilityMap segment(const Raster& tile, const TileRef& ref) const override {
        ProbabilityMap map = ProbabilityMap::zeros(
            tile.width, tile.height,
            Point{static_cast<double>(ref.x), static_cast<double>(ref.y)});
        std::fill(map.values.begin(), map.values.end(), static_cast<float>(params_.p_out));

        const auto it = points_.find(ref.image);
        if (it != points_.end()) {
            const double r = params_.radius;
            const double r2 = r * r;
            for (const Point& p : it->second) {
                // tile-frame coordinates of the planted point
                const double lx = p.x - ref.x;
                const double ly = p.y - ref.y;
                const int x0 = std::max(0, static_cast<int>(std::floor(lx - r)));
                const int x1 = std::min(tile.width - 1, static_cast<int>(std::ceil(lx + r)));
                const int y0 = std::max(0, static_cast<int>(std::floor(ly - r)));
                const int y1 = std::min(tile.height - 1, static_cast<int>(std::ceil(ly + r)));
                for (int y = y0; y <= y1; ++y) {
                    const double dy = y - ly;
                    for (int x = x0; x <= x1; ++x) {
                        const double dx = x - lx;
                        if (dx * dx + dy * dy <= r2)
                            map.at(x, y) = static_cast<float>(params_.p_in);
                    }
                }
            }
        }

        // Emulate a content-based model: the prediction lives in the same
        // frame as the (possibly transformed) tile it was shown.
        const RigidTransform view{ref.view_rotation, ref.view_flip};
        if (!view.is_identity()) map = apply_transform(map, view);

        if (params_.noise_sigma > 0.0) {
            Rng rng(mix_seed({params_.seed, static_cast<std::uint64_t>(ref.x),
                              static_cast<std::uint64_t>(ref.y),
                              static_cast<std::uint64_t>(ref.view_rotation),
                              static_cast<std::uint64_t>(ref.view_flip)}));
            for (float& v : map.values) {
                const double noisy = v + rng.gaussian(0.0, params_.noise_sigma);
                v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
            }
        }
        return map;
    }

private:
    PointsByImage points_;
    OracleSegmenterParams params_;
    std::string name_;
};

class OracleClassifier final : public Classifier {
public:
    OracleClassifier(std::vector<Annotation> planted, OracleClassifierParams params,
                     std::string name)
        : points_(index_by_image(planted)), params_(params), name_(std::move(name)) {
        if (!(params_.sharpness > 0.0)) throw BadInput("oracle classifier sharpness must be > 0");
    }

    std::string name() const override { return name_; }
    int input_size() const override { return params_.input_size; }

    double classify(const Raster&, const PatchRef& ref) const override {
        double d = std::numeric_limits<double>::infinity();
        const auto it = points_.find(ref.image);
        if (it != points_.end())
            for (const Point& p : it->second) d = std::min(d, distance(p, ref.center));
        if (!std::isfinite(d)) return 0.0;
        const double z = params_.sharpness * (params_.radius - d);
        return 1.0 / (1.0 + std::exp(-z));
    }

private:
    PointsByImage points_;
    OracleClassifierParams params_;
    std::string name_;
};

class ConstantClassifier final : public Classifier {
public:
    ConstantClassifier(double value, int input_size, std::string name)
        : value_(value), input_size_(input_size), name_(std::move(name)) {
        if (!(value >= 0.0 && value <= 1.0))
            throw BadInput("constant classifier value must be in [0,1]");
    }
    std::string name() const override { return name_; }
    int input_size() const override { return input_size_; }
    double classify(const Raster&, const PatchRef&) const override { return value_; }

private:
    double value_;
    int input_size_;
    std::string name_;
};

nlohmann::json load_artifact_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open backend artifact '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw BadInput("backend artifact '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

std::vector<Annotation> parse_planted(const nlohmann::json& j, const std::string& path,
                                      const std::vector<std::string>& keep_labels) {
    std::vector<Annotation> planted;
    if (!j.contains("annotations") || !j["annotations"].is_array())
        throw BadInput("backend artifact '" + path + "' is missing the annotations array");
    for (const auto& e : j["annotations"]) {
        Annotation a;
        a.image = e.at("image").get<std::string>();
        a.point = Point{e.at("x").get<double>(), e.at("y").get<double>()};
        a.label = label_from_string(e.value("label", "mitosis"));
        if (std::find(keep_labels.begin(), keep_labels.end(),
                      std::string(to_string(a.label))) != keep_labels.end())
            planted.push_back(std::move(a));
    }
    return planted;
}

std::vector<std::string> parse_labels(const nlohmann::json& j, const char* key,
                                      std::vector<std::string> fallback) {
    if (!j.contains(key)) return fallback;
    std::vector<std::string> labels;
    for (const auto& l : j[key]) labels.push_back(l.get<std::string>());
    return labels;
}

}  // namespace

std::shared_ptr<const Segmenter> oracle_segmenter(std::vector<Annotation> planted,
                                                  const OracleSegmenterParams& params,
                                                  std::string name) {
    return std::make_shared<OracleSegmenter>(std::move(planted), params, std::move(name));
}

std::shared_ptr<const Classifier> oracle_classifier(std::vector<Annotation> planted,
                                                    const OracleClassifierParams& params,
                                                    std::string name) {
    return std::make_shared<OracleClassifier>(std::move(planted), params, std::move(name));
}

std::shared_ptr<const Classifier> constant_classifier(double value, int input_size,
                                                      std::string name) {
    return std::make_shared<ConstantClassifier>(value, input_size, std::move(name));
}

BackendRegistry& BackendRegistry::instance() {
    static BackendRegistry registry;
    return registry;
}

BackendRegistry::BackendRegistry() {
    // Built-in synthetic backends. The whole test suite runs on these; real
    // model adapters register here under their own ids.
    register_segmenter("oracle_disk", [](const BackendSpec& spec) {
        const nlohmann::json j = load_artifact_json(spec.path);
        OracleSegmenterParams p;
        p.radius = j.value("radius", 45.0);
        p.p_in = j.value("p_in", 0.9);
        p.p_out = j.value("p_out", 0.05);
        p.noise_sigma = j.value("noise_sigma", 0.0);
        p.seed = j.value("seed", 0ull);
        const auto labels = parse_labels(j, "disk_labels", {"mitosis", "hard_negative"});
        return oracle_segmenter(parse_planted(j, spec.path, labels), p, spec.name);
    });
    register_classifier("oracle_distance", [](const BackendSpec& spec) {
        const nlohmann::json j = load_artifact_json(spec.path);
        OracleClassifierParams p;
        p.radius = j.value("radius", 30.0);
        p.sharpness = j.value("sharpness", 0.25);
        p.seed = j.value("seed", 0ull);
        p.input_size = spec.input_size;
        const auto labels = parse_labels(j, "positive_labels", {"mitosis"});
        return oracle_classifier(parse_planted(j, spec.path, labels), p, spec.name);
    });
    register_classifier("constant", [](const BackendSpec& spec) {
        const nlohmann::json j = load_artifact_json(spec.path);
        return constant_classifier(j.value("value", 0.5), spec.input_size, spec.name);
    });
}

void BackendRegistry::register_segmenter(const std::string& backend, SegmenterFactory factory) {
    segmenters_[backend] = std::move(factory);
}

void BackendRegistry::register_classifier(const std::string& backend, ClassifierFactory factory) {
    classifiers_[backend] = std::move(factory);
}

std::shared_ptr<const Segmenter> BackendRegistry::make_segmenter(const BackendSpec& spec) const {
    if (spec.kind != "segmenter")
        throw BadInput("backend '" + spec.name + "' has kind '" + spec.kind +
                       "', expected segmenter");
    const auto it = segmenters_.find(spec.backend);
    if (it == segmenters_.end())
        throw BadInput("unknown segmenter backend id '" + spec.backend + "'");
    return it->second(spec);
}

std::shared_ptr<const Classifier> BackendRegistry::make_classifier(const BackendSpec& spec) const {
    if (spec.kind != "classifier")
        throw BadInput("backend '" + spec.name + "' has kind '" + spec.kind +
                       "', expected classifier");
    const auto it = classifiers_.find(spec.backend);
    if (it == classifiers_.end())
        throw BadInput("unknown classifier backend id '" + spec.backend + "'");
    return it->second(spec);
}

}  // namespace mitodet

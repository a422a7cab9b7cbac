#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mitodet/core.hpp"

namespace mitodet {

// Frame provenance handed to scorers alongside the pixels. Content-based
// backends ignore it; the synthetic oracles need it to relate pixels back to
// planted world coordinates. `view` is the rigid transform that was applied
// to the tile content, so a geometry-based segmenter can emulate what a
// content-based model would see.
struct TileRef {
    std::string image;
    int x = 0;  // tile origin in the image frame
    int y = 0;
    int view_rotation = 0;
    bool view_flip = false;
};

struct PatchRef {
    std::string image;   // source image id, or the patch id for loose patches
    Point center;        // patch center in that frame
};

// Scorer implementations must be safe for concurrent read-only invocation;
// the pipeline calls them from its worker pool without serialization. An
// inherently single-threaded adapter has to do its own locking.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual std::string name() const = 0;
    // Output must match the tile's spatial size, values in [0,1] (enforced
    // by the caller via clamp_probability on adapters that misbehave).
    virtual ProbabilityMap segment(const Raster& tile, const TileRef& ref) const = 0;
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string name() const = 0;
    virtual int input_size() const = 0;  // patches are resized to this before scoring
    virtual double classify(const Raster& patch, const PatchRef& ref) const = 0;
};

// Exactly three classifiers; their order fixes the ensemble feature layout
// and is persisted with the fitted forest.
struct EnsembleRoster {
    std::vector<std::shared_ptr<const Classifier>> classifiers;

    void validate() const {
        if (classifiers.size() != 3)
            throw BadInput("ensemble roster must hold exactly 3 classifiers, got " +
                           std::to_string(classifiers.size()));
    }
};

struct MetricSeries {
    std::string metric;
    std::vector<double> values;  // one per epoch
};

// Index of the best epoch; ties go to the earliest.
std::size_t select_best_epoch(const MetricSeries& series);

struct OracleSegmenterParams {
    double radius = 45.0;
    double p_in = 0.9;
    double p_out = 0.05;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Synthetic stand-in for the stage-1 segmentation model: emits p_in inside a
// disk around every planted annotation, p_out elsewhere, plus clamped
// Gaussian noise seeded by (seed, tile origin). Applies the view transform
// so the output lives in the same frame as the (transformed) tile content.
std::shared_ptr<const Segmenter> oracle_segmenter(std::vector<Annotation> planted,
                                                  const OracleSegmenterParams& params,
                                                  std::string name = "oracle_seg");

struct OracleClassifierParams {
    double radius = 30.0;
    double sharpness = 0.25;
    std::uint64_t seed = 0;
    int input_size = 140;
};

// Synthetic classifier scoring sigmoid(sharpness * (radius - d)) where d is
// the distance from the patch center to the nearest planted positive.
// Monotone decreasing in d; > 0.5 exactly on top of a planted point.
std::shared_ptr<const Classifier> oracle_classifier(std::vector<Annotation> planted,
                                                    const OracleClassifierParams& params,
                                                    std::string name = "oracle_cls");

std::shared_ptr<const Classifier> constant_classifier(double value, int input_size,
                                                      std::string name = "constant");

// Named-backend registry. Backends are constructed from a spec entry
// {name, kind, backend id, artifact path, input_size}; oracle backends read
// their planted world from the artifact JSON file. The registry ships with
// "oracle_disk" (segmenter), "oracle_distance" and "constant" (classifiers).
struct BackendSpec {
    std::string name;
    std::string kind;     // "segmenter" | "classifier"
    std::string backend;  // backend id
    std::string path;     // artifact file (backend-specific)
    int input_size = 140;
};

class BackendRegistry {
public:
    using SegmenterFactory = std::function<std::shared_ptr<const Segmenter>(const BackendSpec&)>;
    using ClassifierFactory = std::function<std::shared_ptr<const Classifier>(const BackendSpec&)>;

    static BackendRegistry& instance();

    void register_segmenter(const std::string& backend, SegmenterFactory factory);
    void register_classifier(const std::string& backend, ClassifierFactory factory);

    std::shared_ptr<const Segmenter> make_segmenter(const BackendSpec& spec) const;
    std::shared_ptr<const Classifier> make_classifier(const BackendSpec& spec) const;

private:
    BackendRegistry();
    std::map<std::string, SegmenterFactory> segmenters_;
    std::map<std::string, ClassifierFactory> classifiers_;
};

}  // namespace mitodet

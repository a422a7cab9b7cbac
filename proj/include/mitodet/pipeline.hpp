#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mitodet/candidates.hpp"
#include "mitodet/config.hpp"
#include "mitodet/core.hpp"
#include "mitodet/dataset.hpp"
#include "mitodet/ensemble.hpp"
#include "mitodet/models.hpp"
#include "mitodet/tiling.hpp"

namespace mitodet {

// Stage 1 over one ROI: tile, segment each tile under x3 TTA, invert and
// average the view maps, stitch, binarize, extract hotspot centroids and
// deduplicate across tile overlaps. Scores are stage-1 peak probabilities.
std::vector<Detection> stage1_candidates(const Raster& image, const ImageRef& ref,
                                         const Track1Config& cfg, const Segmenter& segmenter,
                                         std::uint64_t seed, int workers);

// 3 classifiers x 3 TTA views of the candidate patch, model-major. The TTA
// draw is seeded by (seed, image id, candidate_index) so any execution order
// reproduces the same views.
FeatureVector candidate_features(const Raster& image, const ImageRef& ref, const Point& center,
                                 std::size_t candidate_index, const Track1Config& cfg,
                                 const EnsembleRoster& roster, std::uint64_t seed);

struct DetectOutput {
    // score >= decision_threshold, sorted by score descending
    std::vector<Detection> detections;
    // every scored candidate (the same ordering); used for threshold sweeps
    std::vector<Detection> all_candidates;
};

// Full track-1 chain: stage 1, then per candidate a 140-px patch, the 9
// ensemble probabilities and the forest score. A candidate's final score is
// exactly forest_predict_proba of its feature vector.
DetectOutput detect(const Raster& image, const ImageRef& ref, const Track1Config& cfg,
                    const Segmenter& segmenter, const EnsembleRoster& roster,
                    const StumpForest& forest, std::uint64_t seed, int workers);

struct PatchDecision {
    double probability = 0.0;
    bool atypical = false;
};

// Track 2: rescale to cfg.input_size, 5 TTA views x 3 classifiers, mean of
// the 15 probabilities, threshold.
PatchDecision classify_atypical(const Raster& patch, const std::string& patch_id,
                                const Track2Config& cfg, const EnsembleRoster& roster,
                                std::uint64_t seed);

struct SampleImage {
    Raster image;
    ImageRef ref;
    std::vector<Annotation> annotations;
};

struct FitResult {
    StumpForest forest;
    ThresholdReport report;
};

// Trains the verification forest: stage 1 over the training images,
// label_candidates bookkeeping (gt + matched centroids positive, false
// positives negative), optional negative subsampling, fit, then a threshold
// sweep of the scored validation candidates against validation ground truth.
FitResult fit_track1_ensemble(const std::vector<SampleImage>& train,
                              const std::vector<SampleImage>& val, const Track1Config& cfg,
                              const Segmenter& segmenter, const EnsembleRoster& roster,
                              std::uint64_t seed, int workers);

// Instantiates the configured backends through the registry.
std::shared_ptr<const Segmenter> make_segmenter(const Track1Config& cfg);
EnsembleRoster make_roster(const std::vector<BackendSpec>& specs);

}  // namespace mitodet

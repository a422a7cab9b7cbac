#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mitodet/core.hpp"
#include "mitodet/evaluation.hpp"
#include "mitodet/rng.hpp"

namespace mitodet {

struct FeatureLayout {
    int n_models = 3;
    int n_tta = 3;

    int size() const { return n_models * n_tta; }
    bool operator==(const FeatureLayout&) const = default;
};

// Ensemble probabilities in model-major, TTA-minor order:
// [m0t0, m0t1, ..., m0t(k-1), m1t0, ...]. Track 1 uses (3,3) -> 9 entries,
// track 2 (3,5) -> 15.
struct FeatureVector {
    std::vector<double> values;
    FeatureLayout layout;
};

// Builds the vector from per-(model, tta) probabilities. Every slot must be
// present exactly once and in [0,1]; nothing is imputed.
FeatureVector assemble_features(const std::map<std::pair<int, int>, double>& probs,
                                const FeatureLayout& layout);

// Depth-1 tree: x[feature] < threshold goes left, else right. Leaves store
// positive fractions.
struct Stump {
    int feature = 0;
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;
};

struct StumpFit {
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;
    double impurity = 0.0;  // weighted Gini of the two sides
    bool split_found = false;
};

// Midpoints of consecutive distinct sorted values.
std::vector<double> candidate_splits(std::vector<double> values);

// Best split for one feature: the candidate threshold minimizing weighted
// Gini impurity (ties -> smaller threshold). Single-class input or an empty
// candidate set yields a degenerate stump carrying the overall positive
// fraction on both sides.
StumpFit fit_stump(const std::vector<double>& values, const std::vector<int>& labels,
                   const std::vector<double>& splits);
StumpFit fit_stump(const std::vector<double>& values, const std::vector<int>& labels);

// Best stump across the given feature subset on the given sample subset.
// Candidates are compared by (impurity, feature index, threshold).
Stump fit_best_stump(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                     const std::vector<std::size_t>& sample_indices,
                     const std::vector<int>& feature_indices);

struct StumpForestParams {
    int n_estimators = 260;
    int max_depth = 1;  // stumps only; kept for the serialized record

    void validate() const;
};

struct StumpForest {
    StumpForestParams params;
    int n_features = 0;
    std::uint64_t seed = 0;
    std::vector<Stump> trees;
    std::vector<std::string> classifier_names;  // roster order, informational
    FeatureLayout layout;
};

// Seed-derivation and draw helpers, public so tests can replay the exact
// per-tree bootstrap and feature subset.
std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t tree_index);
std::vector<std::size_t> draw_bootstrap(Rng& rng, std::size_t n);
std::vector<int> draw_feature_subset(Rng& rng, int n_features, int subset_size);

// Bagged stumps: each tree fits the best stump over a bootstrap sample
// (size n, with replacement) and a feature subset of max(1, floor(sqrt(d)))
// drawn without replacement, both from Rng(tree_seed(seed, tree)). Trees are
// independent given their seeds, so fitting may run in parallel with
// bit-identical results.
StumpForest fit_forest(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                       const StumpForestParams& params, std::uint64_t seed, int workers = 1);

// Mean over trees of the leaf fraction reached by x.
double forest_predict_proba(const StumpForest& forest, const FeatureVector& x);
double forest_predict_proba(const StumpForest& forest, const std::vector<double>& values);

// Equal-weight aggregation used by track 2.
double average_probs(const FeatureVector& x);
double average_probs(const std::vector<double>& values);

// Caps the negative count at ratio * positives by seeded subsampling without
// replacement; returns the kept indices in ascending order. ratio <= 0
// disables balancing.
std::vector<std::size_t> balance_indices(const std::vector<int>& y, double neg_pos_ratio,
                                         std::uint64_t seed);

struct ThresholdReport {
    double best_threshold = 0.0;
    double best_f1 = 0.0;
    double plateau_low = 0.0;   // maximal contiguous grid interval around the
    double plateau_high = 0.0;  // best threshold with F1 >= best_f1 - epsilon
    double epsilon = 0.01;
    double grid = 0.001;
    std::vector<std::pair<double, double>> curve;  // (threshold, f1)
};

// F1 over the threshold grid {0, grid, 2*grid, ..., 1} with "positive iff
// score >= t". Ties for the best F1 go to the lowest threshold. Requires at
// least one positive label.
ThresholdReport sweep_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                                double epsilon = 0.01, double grid = 0.001);

// Detection flavor: at each threshold the detections with score >= t are
// greedily matched against ground truth at match_radius.
ThresholdReport sweep_threshold(const std::vector<Detection>& detections,
                                const std::vector<Annotation>& gt, double match_radius,
                                double epsilon = 0.01, double grid = 0.001);

// Pooled flavor over pre-matched detections, possibly from several images:
// each entry is (score, matched-against-gt). Greedy matching state over the
// top-k detections never depends on lower-scored ones, so per-image matched
// flags computed once are valid at every threshold.
ThresholdReport sweep_threshold_scored(const std::vector<std::pair<double, bool>>& scored_matched,
                                       std::int64_t total_gt, double epsilon = 0.01,
                                       double grid = 0.001);

}  // namespace mitodet

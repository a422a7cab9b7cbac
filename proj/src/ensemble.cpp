#include "mitodet/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mitodet/parallel.hpp"

namespace mitodet {

FeatureVector assemble_features(const std::map<std::pair<int, int>, double>& probs,
                                const FeatureLayout& layout) {
    if (layout.n_models < 1 || layout.n_tta < 1)
        throw BadInput("feature layout dimensions must be >= 1");
    if (probs.size() != static_cast<std::size_t>(layout.size()))
        throw BadInput("assemble_features: expected " + std::to_string(layout.size()) +
                       " probabilities, got " + std::to_string(probs.size()));

    FeatureVector fv;
    fv.layout = layout;
    fv.values.reserve(static_cast<std::size_t>(layout.size()));
    for (int m = 0; m < layout.n_models; ++m) {
        for (int t = 0; t < layout.n_tta; ++t) {
            const auto it = probs.find({m, t});
            if (it == probs.end())
                throw BadInput("assemble_features: missing probability for model " +
                               std::to_string(m) + ", tta " + std::to_string(t));
            if (!(it->second >= 0.0 && it->second <= 1.0))
                throw BadInput("assemble_features: probability outside [0,1] at model " +
                               std::to_string(m) + ", tta " + std::to_string(t));
            fv.values.push_back(it->second);
        }
    }
    return fv;
}

std::vector<double> candidate_splits(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> splits;
    splits.reserve(values.size());
    for (std::size_t i = 1; i < values.size(); ++i)
        splits.push_back(0.5 * (values[i - 1] + values[i]));
    return splits;
}

namespace {

inline double gini(std::int64_t pos, std::int64_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / total;
    return 2.0 * p * (1.0 - p);
}

}  // namespace

StumpFit fit_stump(const std::vector<double>& values, const std::vector<int>& labels,
                   const std::vector<double>& splits) {
    if (values.empty()) throw BadInput("fit_stump: empty input");
    if (values.size() != labels.size())
        throw BadInput("fit_stump: value/label count mismatch");

    const std::int64_t n = static_cast<std::int64_t>(values.size());
    std::int64_t pos_total = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw BadInput("fit_stump: labels must be 0 or 1");
        pos_total += l;
    }
    const double overall = static_cast<double>(pos_total) / n;

    StumpFit best;
    best.left = best.right = overall;
    best.threshold = values.front();
    best.impurity = gini(pos_total, n);
    best.split_found = false;

    if (pos_total == 0 || pos_total == n) return best;  // single class: degenerate

    for (const double t : splits) {
        std::int64_t nl = 0, pl = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < t) {
                ++nl;
                pl += labels[i];
            }
        }
        const std::int64_t nr = n - nl;
        if (nl == 0 || nr == 0) continue;
        const std::int64_t pr = pos_total - pl;
        const double impurity =
            (static_cast<double>(nl) / n) * gini(pl, nl) + (static_cast<double>(nr) / n) * gini(pr, nr);
        if (!best.split_found || impurity < best.impurity ||
            (impurity == best.impurity && t < best.threshold)) {
            best.split_found = true;
            best.impurity = impurity;
            best.threshold = t;
            best.left = static_cast<double>(pl) / nl;
            best.right = static_cast<double>(pr) / nr;
        }
    }
    return best;
}

StumpFit fit_stump(const std::vector<double>& values, const std::vector<int>& labels) {
    return fit_stump(values, labels, candidate_splits(values));
}

Stump fit_best_stump(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                     const std::vector<std::size_t>& sample_indices,
                     const std::vector<int>& feature_indices) {
    if (sample_indices.empty()) throw BadInput("fit_best_stump: empty sample set");
    if (feature_indices.empty()) throw BadInput("fit_best_stump: empty feature set");

    std::vector<int> labels(sample_indices.size());
    for (std::size_t i = 0; i < sample_indices.size(); ++i) labels[i] = y[sample_indices[i]];

    Stump best;
    bool have = false;
    double best_impurity = 0.0;
    bool best_split = false;
    std::vector<double> column(sample_indices.size());

    for (const int f : feature_indices) {
        for (std::size_t i = 0; i < sample_indices.size(); ++i)
            column[i] = X[sample_indices[i]][static_cast<std::size_t>(f)];
        const StumpFit fit = fit_stump(column, labels);
        // Prefer lower impurity; among equals prefer a real split, then the
        // smaller feature index (iteration order), then smaller threshold
        // (already guaranteed per feature).
        const bool better =
            !have || fit.impurity < best_impurity ||
            (fit.impurity == best_impurity && fit.split_found && !best_split);
        if (better) {
            have = true;
            best_impurity = fit.impurity;
            best_split = fit.split_found;
            best = Stump{f, fit.threshold, fit.left, fit.right};
        }
    }
    return best;
}

void StumpForestParams::validate() const {
    if (n_estimators < 1) throw BadInput("forest needs n_estimators >= 1");
    if (max_depth != 1) throw BadInput("only depth-1 stumps are supported");
}

std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t tree_index) {
    return mix_seed({master_seed, 0x74726565u, static_cast<std::uint64_t>(tree_index)});
}

std::vector<std::size_t> draw_bootstrap(Rng& rng, std::size_t n) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = rng.below(n);
    return indices;
}

std::vector<int> draw_feature_subset(Rng& rng, int n_features, int subset_size) {
    std::vector<int> pool(static_cast<std::size_t>(n_features));
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> subset;
    subset.reserve(static_cast<std::size_t>(subset_size));
    for (int i = 0; i < subset_size && !pool.empty(); ++i) {
        const std::size_t j = rng.below(pool.size());
        subset.push_back(pool[j]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    // ascending order so equal-impurity ties resolve to the smallest index
    std::sort(subset.begin(), subset.end());
    return subset;
}

StumpForest fit_forest(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                       const StumpForestParams& params, std::uint64_t seed, int workers) {
    params.validate();
    if (X.empty()) throw BadInput("fit_forest: no training samples");
    if (X.size() != y.size()) throw BadInput("fit_forest: sample/label count mismatch");

    const FeatureLayout layout = X.front().layout;
    const int d = static_cast<int>(X.front().values.size());
    std::vector<std::vector<double>> rows(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (static_cast<int>(X[i].values.size()) != d)
            throw BadInput("fit_forest: inconsistent feature vector lengths");
        rows[i] = X[i].values;
    }

    StumpForest forest;
    forest.params = params;
    forest.n_features = d;
    forest.seed = seed;
    forest.layout = layout;
    forest.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const int subset_size = std::max(1, static_cast<int>(std::floor(std::sqrt(d))));
    const std::size_t n = X.size();

    parallel_for(forest.trees.size(), workers, [&](std::size_t t) {
        Rng rng(tree_seed(seed, t));
        const std::vector<std::size_t> sample = draw_bootstrap(rng, n);
        const std::vector<int> features = draw_feature_subset(rng, d, subset_size);
        forest.trees[t] = fit_best_stump(rows, y, sample, features);
    });
    return forest;
}

double forest_predict_proba(const StumpForest& forest, const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != forest.n_features)
        throw BadInput("forest_predict_proba: expected " + std::to_string(forest.n_features) +
                       " features, got " + std::to_string(values.size()));
    if (forest.trees.empty()) throw BadInput("forest_predict_proba: empty forest");
    double sum = 0.0;
    for (const Stump& s : forest.trees)
        sum += values[static_cast<std::size_t>(s.feature)] < s.threshold ? s.left : s.right;
    return sum / static_cast<double>(forest.trees.size());
}

double forest_predict_proba(const StumpForest& forest, const FeatureVector& x) {
    return forest_predict_proba(forest, x.values);
}

double average_probs(const std::vector<double>& values) {
    if (values.empty()) throw BadInput("average_probs: empty vector");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double average_probs(const FeatureVector& x) { return average_probs(x.values); }

std::vector<std::size_t> balance_indices(const std::vector<int>& y, double neg_pos_ratio,
                                         std::uint64_t seed) {
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    if (neg_pos_ratio <= 0.0) return all;

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    const std::size_t cap =
        static_cast<std::size_t>(std::llround(neg_pos_ratio * static_cast<double>(pos.size())));
    if (neg.size() <= cap) return all;

    // partial Fisher-Yates, then restore ascending order
    Rng rng(mix_seed({seed, 0x62616cu}));
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + rng.below(neg.size() - i);
        std::swap(neg[i], neg[j]);
    }
    neg.resize(cap);
    std::vector<std::size_t> kept;
    kept.reserve(pos.size() + neg.size());
    kept.insert(kept.end(), pos.begin(), pos.end());
    kept.insert(kept.end(), neg.begin(), neg.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

namespace {

ThresholdReport sweep_curve(const std::vector<double>& thresholds,
                            const std::vector<double>& f1s, double epsilon, double grid) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < f1s.size(); ++i)
        if (f1s[i] > f1s[best]) best = i;  // ties keep the lowest threshold

    ThresholdReport report;
    report.epsilon = epsilon;
    report.grid = grid;
    report.best_threshold = thresholds[best];
    report.best_f1 = f1s[best];

    std::size_t lo = best, hi = best;
    while (lo > 0 && f1s[lo - 1] >= report.best_f1 - epsilon) --lo;
    while (hi + 1 < f1s.size() && f1s[hi + 1] >= report.best_f1 - epsilon) ++hi;
    report.plateau_low = thresholds[lo];
    report.plateau_high = thresholds[hi];

    report.curve.reserve(thresholds.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i)
        report.curve.emplace_back(thresholds[i], f1s[i]);
    return report;
}

std::vector<double> threshold_grid(double grid) {
    if (!(grid > 0.0 && grid < 1.0)) throw BadInput("sweep grid must be in (0,1)");
    std::vector<double> ts;
    // k/m is correctly rounded where k*grid would accumulate error, so use it
    // whenever the grid divides 1 (0.001, 0.01, ...).
    const double m = std::round(1.0 / grid);
    if (std::fabs(m * grid - 1.0) < 1e-9) {
        const auto steps = static_cast<std::size_t>(m);
        ts.reserve(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) ts.push_back(static_cast<double>(k) / m);
    } else {
        for (std::size_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * grid;
            if (t >= 1.0) break;
            ts.push_back(t);
        }
        ts.push_back(1.0);
    }
    return ts;
}

inline double f1_from(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    return tp > 0 ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn) : 0.0;
}

}  // namespace

ThresholdReport sweep_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                                double epsilon, double grid) {
    if (scores.size() != labels.size())
        throw BadInput("sweep_threshold: score/label count mismatch");
    std::int64_t total_pos = 0;
    std::vector<std::pair<double, bool>> scored;
    scored.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw BadInput("sweep_threshold: labels must be 0 or 1");
        total_pos += labels[i];
        scored.emplace_back(scores[i], labels[i] == 1);
    }
    if (total_pos < 1) throw BadInput("sweep_threshold: no positive samples, F1 undefined");
    // a positive sample "matches itself": tp at threshold t is the number of
    // positives scoring >= t, exactly the scored-sweep recurrence
    return sweep_threshold_scored(scored, total_pos, epsilon, grid);
}

ThresholdReport sweep_threshold_scored(const std::vector<std::pair<double, bool>>& scored_matched,
                                       std::int64_t total_gt, double epsilon, double grid) {
    if (epsilon < 0.0) throw BadInput("sweep_threshold: epsilon must be >= 0");
    if (total_gt < 1) throw BadInput("sweep_threshold: no ground-truth positives, F1 undefined");

    std::vector<std::pair<double, bool>> sorted = scored_matched;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> sorted_scores(sorted.size());
    std::vector<std::int64_t> tp_suffix(sorted.size() + 1, 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) sorted_scores[i] = sorted[i].first;
    for (std::size_t i = sorted.size(); i-- > 0;)
        tp_suffix[i] = tp_suffix[i + 1] + (sorted[i].second ? 1 : 0);

    const std::vector<double> ts = threshold_grid(grid);
    std::vector<double> f1s(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const auto first =
            std::lower_bound(sorted_scores.begin(), sorted_scores.end(), ts[k]) -
            sorted_scores.begin();
        const std::int64_t predicted = static_cast<std::int64_t>(sorted_scores.size()) - first;
        const std::int64_t tp = tp_suffix[static_cast<std::size_t>(first)];
        const std::int64_t fp = predicted - tp;
        const std::int64_t fn = total_gt - tp;
        f1s[k] = f1_from(tp, fp, fn);
    }
    return sweep_curve(ts, f1s, epsilon, grid);
}

ThresholdReport sweep_threshold(const std::vector<Detection>& detections,
                                const std::vector<Annotation>& gt, double match_radius,
                                double epsilon, double grid) {
    if (gt.empty()) throw BadInput("sweep_threshold: no ground-truth positives, F1 undefined");

    const MatchResult full = match_detections(detections, gt, match_radius);
    std::vector<bool> matched(detections.size(), false);
    for (const auto& [di, gi] : full.pairs) matched[di] = true;

    std::vector<std::pair<double, bool>> scored;
    scored.reserve(detections.size());
    for (std::size_t i = 0; i < detections.size(); ++i)
        scored.emplace_back(detections[i].score, matched[i]);
    return sweep_threshold_scored(scored, static_cast<std::int64_t>(gt.size()), epsilon, grid);
}

}  // namespace mitodet

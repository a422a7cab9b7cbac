#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mitodet/core.hpp"

namespace mitodet {

struct MatchCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct MatchResult {
    MatchCounts counts;
    // (detection index, ground-truth index) pairs, in match order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Greedy point matcher: detections are visited by score descending (ties by
// (y,x) of the point); each claims the nearest unmatched ground-truth point
// within `radius` (distance ties by gt (y,x)). Matched -> tp, leftover
// detections -> fp, leftover ground truth -> fn.
MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<Annotation>& gt, double radius);

// Maximum-cardinality matching on the same within-radius graph (augmenting
// paths). Never fewer matches than the greedy pass; kept behind a flag for
// sensitivity analysis of the matching protocol.
MatchResult match_detections_optimal(const std::vector<Detection>& preds,
                                     const std::vector<Annotation>& gt, double radius);

enum class Matcher { greedy, optimal };

inline MatchResult match_detections(const std::vector<Detection>& preds,
                                    const std::vector<Annotation>& gt, double radius,
                                    Matcher matcher) {
    return matcher == Matcher::greedy ? match_detections(preds, gt, radius)
                                      : match_detections_optimal(preds, gt, radius);
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// precision = tp/(tp+fp) (0 when tp+fp = 0), recall = tp/(tp+fn) (0 when
// tp+fn = 0), f1 = 2tp/(2tp+fp+fn) (0 when tp = 0). All-zero counts are an
// error.
Prf prf1(const MatchCounts& c);

// (sensitivity + specificity) / 2. Each class must be non-empty.
double balanced_accuracy(std::int64_t tp, std::int64_t fn, std::int64_t tn, std::int64_t fp);

struct GroupMetrics {
    MatchCounts counts;
    Prf prf;
};

struct EvalReport {
    GroupMetrics overall;                       // pooled over everything
    std::map<std::string, GroupMetrics> per_group;  // pooled within group
    Prf macro;                                  // unweighted mean over groups
    double radius = 0.0;
};

// Pools per-image counts within each group, computes pooled (micro) metrics
// per group and overall, plus macro averages for information. Every image
// must have a group assignment.
EvalReport grouped_report(const std::map<std::string, MatchCounts>& per_image,
                          const std::map<std::string, std::string>& groups, double radius);

}  // namespace mitodet

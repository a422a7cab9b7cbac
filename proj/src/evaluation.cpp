#include "mitodet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mitodet {

namespace {

void validate_match_inputs(const std::vector<Detection>& preds, const std::vector<Annotation>& gt,
                           double radius) {
    if (!(radius > 0.0)) throw BadInput("match radius must be > 0");
    const std::string* image = nullptr;
    for (const Detection& d : preds) {
        if (!image) image = &d.image;
        if (d.image != *image)
            throw BadInput("match_detections: mixed image ids ('" + d.image + "' vs '" + *image +
                           "')");
    }
    for (const Annotation& a : gt) {
        if (!image) image = &a.image;
        if (a.image != *image)
            throw BadInput("match_detections: mixed image ids ('" + a.image + "' vs '" + *image +
                           "')");
    }
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<Annotation>& gt, double radius) {
    validate_match_inputs(preds, gt, radius);

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
        return yx_less(preds[a].point, preds[b].point);
    });

    std::vector<bool> gt_taken(gt.size(), false);
    MatchResult result;
    for (std::size_t pi : order) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_gi = gt.size();
        for (std::size_t gi = 0; gi < gt.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double d = distance(preds[pi].point, gt[gi].point);
            if (d > radius) continue;
            if (d < best ||
                (d == best && best_gi < gt.size() && yx_less(gt[gi].point, gt[best_gi].point))) {
                best = d;
                best_gi = gi;
            }
        }
        if (best_gi < gt.size()) {
            gt_taken[best_gi] = true;
            result.pairs.emplace_back(pi, best_gi);
            ++result.counts.tp;
        } else {
            ++result.counts.fp;
        }
    }
    result.counts.fn = static_cast<std::int64_t>(gt.size()) - result.counts.tp;
    return result;
}

namespace {

// edges[p] holds gt candidates of pred p, nearest first
bool augment(const std::vector<std::vector<std::size_t>>& edges, std::size_t p,
             std::vector<bool>& visited, std::vector<std::ptrdiff_t>& gt_owner) {
    for (const std::size_t g : edges[p]) {
        if (visited[g]) continue;
        visited[g] = true;
        if (gt_owner[g] < 0 ||
            augment(edges, static_cast<std::size_t>(gt_owner[g]), visited, gt_owner)) {
            gt_owner[g] = static_cast<std::ptrdiff_t>(p);
            return true;
        }
    }
    return false;
}

}  // namespace

MatchResult match_detections_optimal(const std::vector<Detection>& preds,
                                     const std::vector<Annotation>& gt, double radius) {
    validate_match_inputs(preds, gt, radius);

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
        return yx_less(preds[a].point, preds[b].point);
    });

    std::vector<std::vector<std::size_t>> edges(preds.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t pi = order[rank];
        for (std::size_t gi = 0; gi < gt.size(); ++gi)
            if (distance(preds[pi].point, gt[gi].point) <= radius) edges[rank].push_back(gi);
        std::stable_sort(edges[rank].begin(), edges[rank].end(), [&](std::size_t a, std::size_t b) {
            const double da = distance(preds[pi].point, gt[a].point);
            const double db = distance(preds[pi].point, gt[b].point);
            if (da != db) return da < db;
            return yx_less(gt[a].point, gt[b].point);
        });
    }

    std::vector<std::ptrdiff_t> gt_owner(gt.size(), -1);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        std::vector<bool> visited(gt.size(), false);
        augment(edges, rank, visited, gt_owner);
    }

    MatchResult result;
    for (std::size_t gi = 0; gi < gt.size(); ++gi)
        if (gt_owner[gi] >= 0)
            result.pairs.emplace_back(order[static_cast<std::size_t>(gt_owner[gi])], gi);
    std::sort(result.pairs.begin(), result.pairs.end());
    result.counts.tp = static_cast<std::int64_t>(result.pairs.size());
    result.counts.fp = static_cast<std::int64_t>(preds.size()) - result.counts.tp;
    result.counts.fn = static_cast<std::int64_t>(gt.size()) - result.counts.tp;
    return result;
}

Prf prf1(const MatchCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.fn < 0) throw BadInput("prf1: negative counts");
    if (c.tp + c.fp + c.fn == 0) throw BadInput("prf1: all counts zero, metrics undefined");
    Prf m;
    m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    m.f1 = c.tp > 0 ? 2.0 * c.tp / static_cast<double>(2 * c.tp + c.fp + c.fn) : 0.0;
    return m;
}

double balanced_accuracy(std::int64_t tp, std::int64_t fn, std::int64_t tn, std::int64_t fp) {
    if (tp < 0 || fn < 0 || tn < 0 || fp < 0) throw BadInput("balanced_accuracy: negative counts");
    if (tp + fn == 0) throw BadInput("balanced_accuracy: no positive samples");
    if (tn + fp == 0) throw BadInput("balanced_accuracy: no negative samples");
    const double sensitivity = static_cast<double>(tp) / (tp + fn);
    const double specificity = static_cast<double>(tn) / (tn + fp);
    return 0.5 * (sensitivity + specificity);
}

EvalReport grouped_report(const std::map<std::string, MatchCounts>& per_image,
                          const std::map<std::string, std::string>& groups, double radius) {
    EvalReport report;
    report.radius = radius;
    for (const auto& [image, counts] : per_image) {
        const auto git = groups.find(image);
        if (git == groups.end())
            throw BadInput("grouped_report: image '" + image + "' has no group assignment");
        report.per_group[git->second].counts += counts;
        report.overall.counts += counts;
    }
    double p = 0, r = 0, f = 0;
    for (auto& [group, metrics] : report.per_group) {
        metrics.prf = prf1(metrics.counts);
        p += metrics.prf.precision;
        r += metrics.prf.recall;
        f += metrics.prf.f1;
    }
    report.overall.prf = prf1(report.overall.counts);
    if (!report.per_group.empty()) {
        const double n = static_cast<double>(report.per_group.size());
        report.macro = Prf{p / n, r / n, f / n};
    }
    return report;
}

}  // namespace mitodet

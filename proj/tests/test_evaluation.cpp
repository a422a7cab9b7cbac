#include <doctest.h>

#include <set>

#include "mitodet/evaluation.hpp"
#include "mitodet/rng.hpp"

using namespace mitodet;

namespace {

Annotation gt_at(double x, double y, const std::string& image = "roi") {
    return Annotation{Point{x, y}, Label::mitosis, image};
}

Detection det(double x, double y, double score, const std::string& image = "roi") {
    return make_detection({x, y}, score, Stage::verified, image);
}

}  // namespace

TEST_CASE("exact predictions match one to one") {
    const std::vector<Annotation> gt = {gt_at(10, 10), gt_at(50, 50), gt_at(90, 10)};
    std::vector<Detection> preds;
    for (const Annotation& a : gt) preds.push_back(det(a.point.x, a.point.y, 0.9));
    const MatchResult r = match_detections(preds, gt, 5.0);
    CHECK(r.counts.tp == 3);
    CHECK(r.counts.fp == 0);
    CHECK(r.counts.fn == 0);
    CHECK(r.pairs.size() == 3);
}

TEST_CASE("no predictions means everything is missed") {
    const std::vector<Annotation> gt = {gt_at(10, 10), gt_at(50, 50)};
    const MatchResult r = match_detections({}, gt, 5.0);
    CHECK(r.counts.tp == 0);
    CHECK(r.counts.fn == 2);
}

TEST_CASE("one prediction near two gt points claims only the nearest") {
    const std::vector<Annotation> gt = {gt_at(10, 10), gt_at(16, 10)};
    const MatchResult r = match_detections({det(11, 10, 0.8)}, gt, 30.0);
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fn == 1);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].second == 0);  // nearest gt
}

TEST_CASE("higher-scored predictions claim gt first") {
    // both predictions within radius of a single gt point
    const std::vector<Annotation> gt = {gt_at(50, 50)};
    const std::vector<Detection> preds = {det(58, 50, 0.4), det(44, 50, 0.9)};
    const MatchResult r = match_detections(preds, gt, 10.0);
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fp == 1);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].first == 1);  // the 0.9 one, despite being second in the list
}

TEST_CASE("matching validates inputs") {
    CHECK_THROWS_AS(match_detections({det(1, 1, 0.5, "a")}, {gt_at(2, 2, "b")}, 10.0), BadInput);
    CHECK_THROWS_AS(match_detections({}, {}, 0.0), BadInput);
}

TEST_CASE("growing the radius never loses true positives") {
    Rng rng(2001);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Annotation> gt;
        std::vector<Detection> preds;
        for (int i = 0; i < 15; ++i) gt.push_back(gt_at(rng.uniform(0, 200), rng.uniform(0, 200)));
        for (int i = 0; i < 20; ++i)
            preds.push_back(det(rng.uniform(0, 200), rng.uniform(0, 200), rng.uniform()));
        std::int64_t prev_tp = 0;
        for (const double radius : {5.0, 10.0, 20.0, 40.0, 80.0}) {
            const MatchResult r = match_detections(preds, gt, radius);
            CHECK(r.counts.tp >= prev_tp);
            prev_tp = r.counts.tp;
            // counts partition both sets
            CHECK(r.counts.tp + r.counts.fn == 15);
            CHECK(r.counts.tp + r.counts.fp == 20);
            CHECK(r.counts.tp <= 15);
        }
    }
}

TEST_CASE("optimal matching recovers assignments greedy gives away") {
    // the confident middle prediction grabs G1 under greedy, starving the
    // prediction that can only reach G1
    const std::vector<Annotation> gt = {gt_at(0, 0), gt_at(14, 0)};
    const std::vector<Detection> preds = {det(6, 0, 0.9), det(1, 0, 0.5)};

    const MatchResult greedy = match_detections(preds, gt, 10.0);
    CHECK(greedy.counts.tp == 1);
    CHECK(greedy.counts.fp == 1);
    CHECK(greedy.counts.fn == 1);

    const MatchResult optimal = match_detections_optimal(preds, gt, 10.0);
    CHECK(optimal.counts.tp == 2);
    CHECK(optimal.counts.fp == 0);
    CHECK(optimal.counts.fn == 0);
}

TEST_CASE("optimal matching never finds fewer pairs than greedy") {
    Rng rng(909);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Annotation> gt;
        std::vector<Detection> preds;
        for (int i = 0; i < 12; ++i) gt.push_back(gt_at(rng.uniform(0, 120), rng.uniform(0, 120)));
        for (int i = 0; i < 15; ++i)
            preds.push_back(det(rng.uniform(0, 120), rng.uniform(0, 120), rng.uniform()));
        const MatchResult greedy = match_detections(preds, gt, 20.0);
        const MatchResult optimal = match_detections_optimal(preds, gt, 20.0);
        CHECK(optimal.counts.tp >= greedy.counts.tp);
        CHECK(optimal.counts.tp + optimal.counts.fn == 12);
        CHECK(optimal.counts.tp + optimal.counts.fp == 15);
        // matched pairs are a valid within-radius one-to-one assignment
        std::set<std::size_t> used_preds, used_gt;
        for (const auto& [pi, gi] : optimal.pairs) {
            CHECK(distance(preds[pi].point, gt[gi].point) <= 20.0);
            CHECK(used_preds.insert(pi).second);
            CHECK(used_gt.insert(gi).second);
        }
    }
}

TEST_CASE("prf1 closed forms") {
    const Prf perfect = prf1({5, 0, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const Prf half = prf1({1, 1, 1});
    CHECK(half.precision == 0.5);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == 0.5);

    const Prf none = prf1({0, 3, 2});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);

    CHECK_THROWS_AS(prf1({0, 0, 0}), BadInput);
    CHECK_THROWS_AS(prf1({-1, 1, 1}), BadInput);
}

TEST_CASE("balanced accuracy closed forms") {
    CHECK(balanced_accuracy(10, 0, 10, 0) == 1.0);
    CHECK(balanced_accuracy(8, 2, 5, 5) == doctest::Approx(0.65));
    CHECK(balanced_accuracy(10, 0, 0, 10) == 0.5);  // predict-all-positive
    CHECK_THROWS_AS(balanced_accuracy(0, 0, 5, 5), BadInput);
    CHECK_THROWS_AS(balanced_accuracy(5, 5, 0, 0), BadInput);
}

TEST_CASE("grouped report pools counts within and across groups") {
    std::map<std::string, MatchCounts> per_image;
    per_image["a"] = {1, 0, 0};
    per_image["b"] = {0, 1, 1};
    std::map<std::string, std::string> groups = {{"a", "tumor_1"}, {"b", "tumor_2"}};

    const EvalReport report = grouped_report(per_image, groups, 30.0);
    CHECK(report.overall.counts.tp == 1);
    CHECK(report.overall.counts.fp == 1);
    CHECK(report.overall.counts.fn == 1);
    CHECK(report.overall.prf.f1 == doctest::Approx(0.5));
    CHECK(report.per_group.at("tumor_1").prf.f1 == 1.0);
    CHECK(report.per_group.at("tumor_2").prf.f1 == 0.0);
    CHECK(report.macro.f1 == doctest::Approx(0.5));
    CHECK(report.radius == 30.0);

    // overall counts equal the sum over groups
    MatchCounts sum;
    for (const auto& [gid, metrics] : report.per_group) sum += metrics.counts;
    CHECK(sum.tp == report.overall.counts.tp);
    CHECK(sum.fp == report.overall.counts.fp);
    CHECK(sum.fn == report.overall.counts.fn);
}

TEST_CASE("single group equals overall") {
    std::map<std::string, MatchCounts> per_image = {{"a", {3, 1, 2}}};
    std::map<std::string, std::string> groups = {{"a", "only"}};
    const EvalReport report = grouped_report(per_image, groups, 25.0);
    CHECK(report.per_group.at("only").prf.f1 == report.overall.prf.f1);
    CHECK(report.macro.f1 == report.overall.prf.f1);
}

TEST_CASE("empty predictions give zero recall everywhere") {
    std::map<std::string, MatchCounts> per_image = {{"a", {0, 0, 4}}, {"b", {0, 0, 2}}};
    std::map<std::string, std::string> groups = {{"a", "g1"}, {"b", "g2"}};
    const EvalReport report = grouped_report(per_image, groups, 30.0);
    for (const auto& [gid, metrics] : report.per_group) {
        CHECK(metrics.prf.recall == 0.0);
        CHECK(metrics.prf.f1 == 0.0);
    }
}

TEST_CASE("unassigned image is an error") {
    std::map<std::string, MatchCounts> per_image = {{"a", {1, 0, 0}}};
    CHECK_THROWS_AS(grouped_report(per_image, {}, 30.0), BadInput);
}

#include "mitodet/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "mitodet/evaluation.hpp"
#include "mitodet/rng.hpp"

namespace mitodet {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::gt: return "gt";
        case Provenance::tp: return "tp";
        case Provenance::fn: return "fn";
        case Provenance::fp: return "fp";
    }
    return "?";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "gt") return Provenance::gt;
    if (s == "tp") return Provenance::tp;
    if (s == "fn") return Provenance::fn;
    if (s == "fp") return Provenance::fp;
    throw BadInput("unknown provenance: '" + std::string(s) + "'");
}

BinaryMask synthesize_mask(const std::vector<Annotation>& annotations, int width, int height,
                           const MaskSpec& spec, bool include_hard_negatives) {
    spec.validate();
    BinaryMask mask = BinaryMask::zeros(width, height);
    const double r2 = static_cast<double>(spec.radius) * spec.radius;

    for (const Annotation& a : annotations) {
        if (a.label != Label::mitosis &&
            !(include_hard_negatives && a.label == Label::hard_negative))
            continue;
        if (!(a.point.x >= 0.0 && a.point.x < width && a.point.y >= 0.0 && a.point.y < height))
            throw BadInput("annotation at (" + std::to_string(a.point.x) + "," +
                           std::to_string(a.point.y) + ") lies outside the " +
                           std::to_string(width) + "x" + std::to_string(height) + " image");

        const int x0 = std::max(0, static_cast<int>(std::floor(a.point.x - spec.radius)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(a.point.x + spec.radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(a.point.y - spec.radius)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(a.point.y + spec.radius)));
        for (int py = y0; py <= y1; ++py) {
            const double dy = py - a.point.y;
            for (int px = x0; px <= x1; ++px) {
                const double dx = px - a.point.x;
                if (dx * dx + dy * dy <= r2) mask.at(px, py) = 1;
            }
        }
    }
    return mask;
}

Raster extract_patch(const Raster& image, const Point& center, const PatchSpec& spec) {
    spec.validate();
    if (!(center.x >= 0.0 && center.x < image.width && center.y >= 0.0 && center.y < image.height))
        throw BadInput("patch center (" + std::to_string(center.x) + "," +
                       std::to_string(center.y) + ") lies outside the image");
    const int cx = static_cast<int>(std::llround(center.x));
    const int cy = static_cast<int>(std::llround(center.y));
    const int x0 = cx - spec.size / 2;
    const int y0 = cy - spec.size / 2;
    return crop_raster(image, x0, y0, spec.size, spec.size, spec.border);
}

LabeledPatchSet label_candidates(const std::vector<Annotation>& gt,
                                 const std::vector<Detection>& stage1, double match_radius) {
    for (const Annotation& a : gt) {
        if (a.label != Label::mitosis)
            throw BadInput("label_candidates: ground truth must be mitosis annotations");
    }

    const MatchResult match = match_detections(stage1, gt, match_radius);

    std::vector<bool> gt_matched(gt.size(), false);
    std::vector<bool> det_matched(stage1.size(), false);
    for (const auto& [di, gi] : match.pairs) {
        det_matched[di] = true;
        gt_matched[gi] = true;
    }

    LabeledPatchSet set;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
        set.positives.push_back(LabeledPoint{
            gt[gi].point, gt_matched[gi] ? Provenance::gt : Provenance::fn, gt[gi].image});
        if (gt_matched[gi]) ++set.counts.gt;
        else ++set.counts.fn;
    }
    for (std::size_t di = 0; di < stage1.size(); ++di) {
        if (det_matched[di]) {
            set.positives.push_back(LabeledPoint{stage1[di].point, Provenance::tp, stage1[di].image});
            ++set.counts.tp;
        } else {
            set.negatives.push_back(LabeledPoint{stage1[di].point, Provenance::fp, stage1[di].image});
            ++set.counts.fp;
        }
    }
    return set;
}

std::vector<TrainingCrop> sample_training_crops(const Raster& image, const BinaryMask& mask,
                                                int crop, int n, double p_foreground,
                                                std::uint64_t seed) {
    if (image.width != mask.width || image.height != mask.height)
        throw BadInput("sample_training_crops: image and mask shapes disagree");
    if (crop < 1 || crop > image.width || crop > image.height)
        throw BadInput("sample_training_crops: crop must fit inside the image");
    if (!(p_foreground >= 0.0 && p_foreground <= 1.0))
        throw BadInput("sample_training_crops: p_foreground must be in [0,1]");
    if (n < 0) throw BadInput("sample_training_crops: n must be >= 0");

    std::vector<std::pair<int, int>> foreground;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) foreground.emplace_back(x, y);

    double p_fg = p_foreground;
    if (foreground.empty() && p_fg > 0.0) {
        warn("sample_training_crops: mask has no foreground, sampling uniformly");
        p_fg = 0.0;
    }

    const int max_x = image.width - crop;
    const int max_y = image.height - crop;
    Rng rng(mix_seed({seed, 0x63726f70u}));

    std::vector<TrainingCrop> crops;
    crops.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int x0, y0;
        if (rng.bernoulli(p_fg)) {
            const auto [fx, fy] = foreground[rng.below(foreground.size())];
            x0 = std::clamp(fx - crop / 2, 0, max_x);
            y0 = std::clamp(fy - crop / 2, 0, max_y);
        } else {
            x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_x) + 1));
            y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(max_y) + 1));
        }
        TrainingCrop tc;
        tc.x = x0;
        tc.y = y0;
        tc.image = crop_raster(image, x0, y0, crop, crop, BorderPolicy::zero);
        tc.mask = BinaryMask::zeros(crop, crop);
        for (int y = 0; y < crop; ++y)
            for (int x = 0; x < crop; ++x) tc.mask.at(x, y) = mask.at(x0 + x, y0 + y);
        crops.push_back(std::move(tc));
    }
    return crops;
}

}  // namespace mitodet

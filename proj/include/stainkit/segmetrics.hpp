#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "stainkit/image.hpp"

namespace stainkit {

// Pairwise overlap statistics between the instances of a predicted and a
// ground-truth label map. Background (id 0) is never an instance.
struct OverlapTable {
    std::vector<std::uint32_t> pred_ids;  // sorted ascending
    std::vector<std::uint32_t> gt_ids;    // sorted ascending
    std::map<std::uint32_t, std::size_t> pred_area;
    std::map<std::uint32_t, std::size_t> gt_area;
    // intersection[{p, g}] present only when the two instances overlap.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> intersection;

    std::size_t inter(std::uint32_t p, std::uint32_t g) const {
        auto it = intersection.find({p, g});
        return it == intersection.end() ? 0 : it->second;
    }
    double iou(std::uint32_t p, std::uint32_t g) const {
        const std::size_t i = inter(p, g);
        if (i == 0) return 0.0;
        const std::size_t u = pred_area.at(p) + gt_area.at(g) - i;
        return static_cast<double>(i) / static_cast<double>(u);
    }
};

OverlapTable build_overlap_table(const LabelMap& pred, const LabelMap& gt);

// Instance-level detection counts at an IoU threshold.
struct MatchCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

// Greedy one-to-one matching of predictions to ground truth at IoU > threshold
// (strict inequality), in descending IoU order; ties broken by lower predicted
// id, then lower ground-truth id. Returns 1.0 when both maps are empty.
double f1_at_iou(const LabelMap& pred, const LabelMap& gt, double threshold = 0.5,
                 MatchCounts* counts = nullptr);
double f1_at_iou(const OverlapTable& table, double threshold = 0.5,
                 MatchCounts* counts = nullptr);

// Aggregated Jaccard index: each ground-truth instance is matched to the
// overlapping prediction maximizing IoU (ties by lower prediction id; a
// prediction may be the best match of several ground-truth instances). The
// numerator accumulates matched intersections; the denominator accumulates
// the matched unions plus the areas of predictions never matched. Returns 1.0
// when both maps are empty and 0.0 when only one side is empty.
double aggregated_jaccard(const LabelMap& pred, const LabelMap& gt);
double aggregated_jaccard(const OverlapTable& table);

// Foreground Dice coefficient over the binarized maps (any id > 0 is
// foreground). Returns 1.0 when both are empty.
double binary_dice(const LabelMap& pred, const LabelMap& gt);

struct SegReport {
    double f1 = 0.0;
    double aji = 0.0;
    double dice = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

SegReport evaluate_segmentation(const LabelMap& pred, const LabelMap& gt,
                                double iou_threshold = 0.5);

// Connected components of the foreground (mask value != 0) at 4- or
// 8-connectivity. Component ids are 1..k in order of first raster-scan
// encounter.
LabelMap connected_components(const std::vector<std::uint8_t>& mask, int width, int height,
                              int connectivity = 8);

}  // namespace stainkit

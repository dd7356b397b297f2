#include "stainkit/segmetrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "stainkit/error.hpp"

namespace stainkit {

namespace {

void require_same_size(const LabelMap& a, const LabelMap& b) {
    if (a.width != b.width || a.height != b.height)
        raise(ErrorCode::ParameterError, "label maps differ in size");
}

}  // namespace

OverlapTable build_overlap_table(const LabelMap& pred, const LabelMap& gt) {
    require_same_size(pred, gt);
    OverlapTable table;
    std::set<std::uint32_t> pred_set, gt_set;
    for (std::size_t i = 0; i < pred.ids.size(); ++i) {
        const std::uint32_t p = pred.ids[i];
        const std::uint32_t g = gt.ids[i];
        if (p != 0) {
            ++table.pred_area[p];
            pred_set.insert(p);
        }
        if (g != 0) {
            ++table.gt_area[g];
            gt_set.insert(g);
        }
        if (p != 0 && g != 0) ++table.intersection[{p, g}];
    }
    table.pred_ids.assign(pred_set.begin(), pred_set.end());
    table.gt_ids.assign(gt_set.begin(), gt_set.end());
    return table;
}

double f1_at_iou(const OverlapTable& table, double threshold, MatchCounts* counts) {
    struct Candidate {
        double iou;
        std::uint32_t pred;
        std::uint32_t gt;
    };
    std::vector<Candidate> candidates;
    for (const auto& [key, inter] : table.intersection) {
        (void)inter;
        const double iou = table.iou(key.first, key.second);
        if (iou > threshold) candidates.push_back({iou, key.first, key.second});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.pred != b.pred) return a.pred < b.pred;
        return a.gt < b.gt;
    });

    std::set<std::uint32_t> used_pred, used_gt;
    int tp = 0;
    for (const Candidate& c : candidates) {
        if (used_pred.count(c.pred) || used_gt.count(c.gt)) continue;
        used_pred.insert(c.pred);
        used_gt.insert(c.gt);
        ++tp;
    }
    const int fp = static_cast<int>(table.pred_ids.size()) - tp;
    const int fn = static_cast<int>(table.gt_ids.size()) - tp;
    if (counts) *counts = {tp, fp, fn};
    if (table.pred_ids.empty() && table.gt_ids.empty()) return 1.0;
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

double f1_at_iou(const LabelMap& pred, const LabelMap& gt, double threshold, MatchCounts* counts) {
    return f1_at_iou(build_overlap_table(pred, gt), threshold, counts);
}

double aggregated_jaccard(const OverlapTable& table) {
    if (table.gt_ids.empty() && table.pred_ids.empty()) return 1.0;
    if (table.gt_ids.empty() || table.pred_ids.empty()) return 0.0;

    std::size_t inter_sum = 0;
    std::size_t union_sum = 0;
    std::set<std::uint32_t> used_pred;
    for (const std::uint32_t g : table.gt_ids) {
        std::uint32_t best_pred = 0;
        double best_iou = 0.0;
        bool found = false;
        for (const auto& [key, inter] : table.intersection) {
            (void)inter;
            if (key.second != g) continue;
            const double iou = table.iou(key.first, g);
            if (!found || iou > best_iou || (iou == best_iou && key.first < best_pred)) {
                best_iou = iou;
                best_pred = key.first;
                found = true;
            }
        }
        if (found) {
            const std::size_t i = table.inter(best_pred, g);
            inter_sum += i;
            // Full union of the pair; a prediction matched to several
            // ground-truth instances contributes its area to each union.
            union_sum += table.pred_area.at(best_pred) + table.gt_area.at(g) - i;
            used_pred.insert(best_pred);
        } else {
            union_sum += table.gt_area.at(g);
        }
    }
    for (const std::uint32_t p : table.pred_ids)
        if (!used_pred.count(p)) union_sum += table.pred_area.at(p);
    return union_sum > 0 ? static_cast<double>(inter_sum) / static_cast<double>(union_sum) : 0.0;
}

double aggregated_jaccard(const LabelMap& pred, const LabelMap& gt) {
    return aggregated_jaccard(build_overlap_table(pred, gt));
}

double binary_dice(const LabelMap& pred, const LabelMap& gt) {
    require_same_size(pred, gt);
    std::size_t inter = 0, a = 0, b = 0;
    for (std::size_t i = 0; i < pred.ids.size(); ++i) {
        const bool p = pred.ids[i] != 0;
        const bool g = gt.ids[i] != 0;
        a += p;
        b += g;
        inter += p && g;
    }
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

SegReport evaluate_segmentation(const LabelMap& pred, const LabelMap& gt, double iou_threshold) {
    const OverlapTable table = build_overlap_table(pred, gt);
    SegReport report;
    MatchCounts counts;
    report.f1 = f1_at_iou(table, iou_threshold, &counts);
    report.aji = aggregated_jaccard(table);
    report.dice = binary_dice(pred, gt);
    report.tp = counts.tp;
    report.fp = counts.fp;
    report.fn = counts.fn;
    return report;
}

LabelMap connected_components(const std::vector<std::uint8_t>& mask, int width, int height,
                              int connectivity) {
    if (width < 1 || height < 1)
        raise(ErrorCode::ParameterError, "component labeling needs a non-empty mask");
    if (mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        raise(ErrorCode::ParameterError, "mask size does not match its dimensions");
    if (connectivity != 4 && connectivity != 8)
        raise(ErrorCode::ParameterError, "connectivity must be 4 or 8");

    const std::size_t n = mask.size();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    const auto find = [&parent](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    const auto unite = [&](std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (!mask[i]) continue;
            const auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
            if (x > 0 && mask[i - 1]) unite(u32(i), u32(i - 1));
            if (y > 0 && mask[i - width]) unite(u32(i), u32(i - width));
            if (connectivity == 8 && y > 0) {
                if (x > 0 && mask[i - width - 1]) unite(u32(i), u32(i - width - 1));
                if (x + 1 < width && mask[i - width + 1]) unite(u32(i), u32(i - width + 1));
            }
        }
    }

    LabelMap out(width, height);
    std::map<std::uint32_t, std::uint32_t> root_to_id;
    std::uint32_t next_id = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const std::uint32_t root = find(static_cast<std::uint32_t>(i));
        auto it = root_to_id.find(root);
        if (it == root_to_id.end()) it = root_to_id.emplace(root, next_id++).first;
        out.ids[i] = it->second;
    }
    return out;
}

}  // namespace stainkit

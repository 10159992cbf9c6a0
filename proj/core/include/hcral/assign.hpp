#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hcral/box.hpp"

namespace hcral {

/// Anchors grouped by pyramid level (CSR layout over a flat vector), one
/// stride per level. Every level must be nonempty.
struct AnchorSet {
    std::vector<Box> anchors;
    std::vector<std::size_t> level_begin;  // num_levels + 1 offsets
    std::vector<double> level_strides;

    std::size_t size() const { return anchors.size(); }
    std::size_t num_levels() const { return level_strides.size(); }
    std::span<const Box> level(std::size_t i) const {
        return std::span<const Box>(anchors).subspan(level_begin[i],
                                                     level_begin[i + 1] - level_begin[i]);
    }
};

struct GroundTruth {
    Box box;
    int cls = 0;
};

enum class AssignMode { Atss, Eatss };
enum class RankIouSource { PredBox, AnchorBox };

struct AssignConfig {
    int k = 9;  // nearest candidates per level
    int l = 3;  // extra anchors per ground truth in the expansion pass
    AssignMode mode = AssignMode::Eatss;
    RankIouSource rank_iou = RankIouSource::PredBox;
};

/// Per-anchor labels: gt_index[a] >= 0 with its class for positives, -1 for
/// negatives. Positives and negatives partition the anchor set. dis_f holds
/// the per-ground-truth expansion radius (max center distance among that
/// ground truth's positives; NaN when it received none).
struct Assignment {
    std::vector<int> gt_index;
    std::vector<int> gt_class;
    std::vector<double> dis_f;
    std::vector<char> expanded;  // 1 where the expansion pass added the anchor
    std::vector<int> gts_without_positives;

    bool is_positive(std::size_t anchor) const { return gt_index[anchor] >= 0; }
    std::size_t num_positives() const;
};

/// Per-anchor predicted state consumed by the expansion ranking.
struct Predictions {
    std::span<const double> scores;
    std::span<const Box> boxes;
};

/// Adaptive training sample selection: per ground truth, the k nearest
/// anchors by center distance on every level form the candidate set; the
/// IoU threshold is candidate mean + standard deviation (population form);
/// positives additionally need their center inside the ground truth box.
/// An anchor claimed by several ground truths goes to the one with the
/// highest IoU (ties to the lower index). No ground truths: all negative.
Assignment atss_assign(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                       const AssignConfig& cfg);

/// Expansion pass on top of ATSS: per ground truth with at least one
/// positive, anchors within its dis_f radius that are still negative are
/// ranked and the top l join the positive set.
Assignment eatss_assign(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                        const AssignConfig& cfg, const Predictions& preds);

/// Ranking of an expansion candidate: IoU of the ranking box against the
/// ground truth minus the center distance normalized by dis_f. Higher is
/// better; callers break ties by anchor index. Requires dis_f > 0.
double rank_score(const Box& anchor, const Box& gt, double dis_f, const Box& rank_box);

}  // namespace hcral

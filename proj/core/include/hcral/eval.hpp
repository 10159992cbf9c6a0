#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hcral/assign.hpp"
#include "hcral/box.hpp"
#include "hcral/scene.hpp"

namespace hcral {

struct Detection {
    Box box;
    int cls = 0;
    double score = 0;
    std::size_t anchor = 0;
};

struct EvalConfig {
    double nms_iou = 0.6;
    double ap_iou = 0.5;
    double score_thresh = 0.05;
};

/// Greedy per-class suppression: after sorting by score, a detection
/// survives unless a kept same-class detection overlaps it above the
/// threshold (strictly).
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh);

/// Decodes every anchor, keeps (anchor, class) pairs scoring at or above
/// the threshold, and runs per-class suppression.
std::vector<Detection> collect_detections(const SceneBatch& scene, const EvalConfig& cfg);

struct MatchedPair {
    std::size_t det = 0;  // index into the detection span as passed in
    int gt = 0;
    double iou = 0;
};

struct ApResult {
    double ap = 0;
    int n_gts = 0;
    std::size_t n_detections = 0;
    std::vector<MatchedPair> matches;
};

/// Single-threshold average precision, classes pooled into one
/// precision-recall curve. Detections are taken in score order; each one
/// greedily claims the best still-free same-class ground truth with overlap
/// at or above the threshold, or counts as a false positive. The curve is
/// integrated with all-point interpolation. No ground truths: AP = 0.
ApResult average_precision(std::span<const Detection> dets,
                           std::span<const GroundTruth> gts, double iou_thresh);

struct ConsistencyStats {
    double pearson = 0;
    double region1_fraction = 0;  // score - iou + alpha >= 0
    double region2_fraction = 0;
    double mean_iou = 0;
    std::size_t n = 0;
};

/// Score/IoU agreement over the positive anchors of an assignment: Pearson
/// correlation of (matched-class score, matched IoU), the fraction on each
/// side of the consistency line, and the mean matched IoU. A degenerate
/// (zero-variance) side yields correlation 0. Throws std::invalid_argument
/// with fewer than 2 positives.
ConsistencyStats consistency_stats(const SceneBatch& scene, const Assignment& assign,
                                   double alpha);

}  // namespace hcral

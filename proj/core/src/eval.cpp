#include "hcral/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hcral/rci.hpp"

namespace hcral {

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.cls == d.cls && iou(k.box, d.box) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<Detection> collect_detections(const SceneBatch& scene, const EvalConfig& cfg) {
    const std::vector<Box> boxes = decode_boxes(scene);
    std::vector<Detection> dets;
    for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
        for (int c = 0; c < scene.params.n_classes; ++c) {
            const double p = sigmoid(scene.params.logit(a, c));
            if (p >= cfg.score_thresh) dets.push_back({boxes[a], c, p, a});
        }
    }
    return nms(std::move(dets), cfg.nms_iou);
}

ApResult average_precision(std::span<const Detection> dets,
                           std::span<const GroundTruth> gts, double iou_thresh) {
    ApResult out;
    out.n_gts = static_cast<int>(gts.size());
    out.n_detections = dets.size();
    if (gts.empty() || dets.empty()) return out;

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<char> taken(gts.size(), 0);
    std::vector<double> precision(dets.size()), recall(dets.size());
    int tp = 0;
    int fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Detection& d = dets[order[i]];
        int best = -1;
        double best_iou = 0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].cls != d.cls) continue;
            const double v = iou(d.box, gts[g].box);
            if (v >= iou_thresh && v > best_iou) {
                best = static_cast<int>(g);
                best_iou = v;
            }
        }
        if (best >= 0) {
            taken[best] = 1;
            ++tp;
            out.matches.push_back({order[i], best, best_iou});
        } else {
            ++fp;
        }
        precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
        recall[i] = static_cast<double>(tp) / static_cast<double>(gts.size());
    }

    // All-point interpolation: each recall increment is scored with the best
    // precision at or beyond it.
    double ap = 0;
    double prev_recall = 0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        if (recall[i] <= prev_recall) continue;
        double best_p = 0;
        for (std::size_t j = i; j < precision.size(); ++j) best_p = std::max(best_p, precision[j]);
        ap += (recall[i] - prev_recall) * best_p;
        prev_recall = recall[i];
    }
    out.ap = ap;
    return out;
}

ConsistencyStats consistency_stats(const SceneBatch& scene, const Assignment& assign,
                                   double alpha) {
    std::vector<double> scores;
    std::vector<double> ious;
    for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
        if (!assign.is_positive(a)) continue;
        const Box pred = decode_box(scene.anchors.anchors[a], stride_of(scene.anchors, a),
                                    scene.params.deltas[a]);
        scores.push_back(sigmoid(scene.params.logit(a, assign.gt_class[a])));
        ious.push_back(iou(pred, scene.gts[assign.gt_index[a]].box));
    }
    if (scores.size() < 2)
        throw std::invalid_argument("consistency statistics need at least 2 positives");

    const double n = static_cast<double>(scores.size());
    const double mean_s = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    const double mean_i = std::accumulate(ious.begin(), ious.end(), 0.0) / n;
    double cov = 0;
    double var_s = 0;
    double var_i = 0;
    std::size_t region1 = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double ds = scores[i] - mean_s;
        const double di = ious[i] - mean_i;
        cov += ds * di;
        var_s += ds * ds;
        var_i += di * di;
        if (rci(scores[i], ious[i], alpha) >= 0) ++region1;
    }
    ConsistencyStats out;
    out.n = scores.size();
    out.pearson = (var_s > 0 && var_i > 0) ? cov / std::sqrt(var_s * var_i) : 0.0;
    out.region1_fraction = static_cast<double>(region1) / n;
    out.region2_fraction = 1.0 - out.region1_fraction;
    out.mean_iou = mean_i;
    return out;
}

}  // namespace hcral

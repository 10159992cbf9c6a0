#include "hcral/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hcral {

namespace {

double center_distance(const Box& a, const Box& b) {
    const double dx = a.center_x() - b.center_x();
    const double dy = a.center_y() - b.center_y();
    return std::sqrt(dx * dx + dy * dy);
}

bool center_inside(const Box& anchor, const Box& gt) {
    const double cx = anchor.center_x();
    const double cy = anchor.center_y();
    return cx >= gt.x1 && cx <= gt.x2 && cy >= gt.y1 && cy <= gt.y2;
}

}  // namespace

std::size_t Assignment::num_positives() const {
    std::size_t n = 0;
    for (int g : gt_index) n += g >= 0 ? 1 : 0;
    return n;
}

Assignment atss_assign(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                       const AssignConfig& cfg) {
    const std::size_t n = anchors.size();
    if (n == 0) throw std::invalid_argument("empty anchor set");
    if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
    for (std::size_t lvl = 0; lvl < anchors.num_levels(); ++lvl)
        if (static_cast<std::size_t>(cfg.k) > anchors.level(lvl).size())
            throw std::invalid_argument("k exceeds per-level anchor count");

    Assignment out;
    out.gt_index.assign(n, -1);
    out.gt_class.assign(n, -1);
    out.expanded.assign(n, 0);
    out.dis_f.assign(gts.size(), std::numeric_limits<double>::quiet_NaN());
    if (gts.empty()) return out;

    // Best claim per anchor across ground truths; highest IoU wins, ties to
    // the lower ground-truth index (claims are visited in gt order).
    std::vector<double> best_iou(n, -1.0);

    std::vector<std::size_t> order;
    std::vector<std::size_t> candidates;
    std::vector<double> cand_iou;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const Box& gt_box = gts[g].box;
        candidates.clear();
        for (std::size_t lvl = 0; lvl < anchors.num_levels(); ++lvl) {
            const std::size_t begin = anchors.level_begin[lvl];
            const std::size_t count = anchors.level_begin[lvl + 1] - begin;
            order.resize(count);
            std::iota(order.begin(), order.end(), begin);
            std::partial_sort(order.begin(), order.begin() + cfg.k, order.end(),
                              [&](std::size_t a, std::size_t b) {
                                  const double da = center_distance(anchors.anchors[a], gt_box);
                                  const double db = center_distance(anchors.anchors[b], gt_box);
                                  if (da != db) return da < db;
                                  return a < b;
                              });
            candidates.insert(candidates.end(), order.begin(), order.begin() + cfg.k);
        }

        cand_iou.resize(candidates.size());
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            cand_iou[i] = iou(anchors.anchors[candidates[i]], gt_box);
            sum += cand_iou[i];
            sum_sq += cand_iou[i] * cand_iou[i];
        }
        const double mean = sum / static_cast<double>(candidates.size());
        const double var = std::max(0.0, sum_sq / static_cast<double>(candidates.size()) - mean * mean);
        const double threshold = mean + std::sqrt(var);

        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const std::size_t a = candidates[i];
            if (cand_iou[i] < threshold) continue;
            if (!center_inside(anchors.anchors[a], gt_box)) continue;
            if (cand_iou[i] > best_iou[a]) {
                best_iou[a] = cand_iou[i];
                out.gt_index[a] = static_cast<int>(g);
                out.gt_class[a] = gts[g].cls;
            }
        }
    }

    for (std::size_t g = 0; g < gts.size(); ++g) {
        double max_dist = -1.0;
        for (std::size_t a = 0; a < n; ++a)
            if (out.gt_index[a] == static_cast<int>(g))
                max_dist = std::max(max_dist, center_distance(anchors.anchors[a], gts[g].box));
        if (max_dist >= 0)
            out.dis_f[g] = max_dist;
        else
            out.gts_without_positives.push_back(static_cast<int>(g));
    }
    return out;
}

double rank_score(const Box& anchor, const Box& gt, double dis_f, const Box& rank_box) {
    if (!(dis_f > 0)) throw std::invalid_argument("dis_f must be positive");
    return iou(rank_box, gt) - center_distance(anchor, gt) / dis_f;
}

Assignment eatss_assign(const AnchorSet& anchors, std::span<const GroundTruth> gts,
                        const AssignConfig& cfg, const Predictions& preds) {
    if (cfg.l < 0) throw std::invalid_argument("l must be >= 0");
    if (preds.boxes.size() != anchors.size())
        throw std::invalid_argument("predictions must cover every anchor");

    Assignment out = atss_assign(anchors, gts, cfg);
    if (cfg.l == 0 || gts.empty()) return out;

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const double dis_f = out.dis_f[g];
        if (!(dis_f > 0)) continue;  // no positives, or a lone center anchor

        ranked.clear();
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (out.gt_index[a] >= 0) continue;
            if (center_distance(anchors.anchors[a], gts[g].box) > dis_f) continue;
            const Box& rank_box = cfg.rank_iou == RankIouSource::PredBox
                                      ? preds.boxes[a]
                                      : anchors.anchors[a];
            ranked.emplace_back(rank_score(anchors.anchors[a], gts[g].box, dis_f, rank_box), a);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& lhs, const auto& rhs) {
            if (lhs.first != rhs.first) return lhs.first > rhs.first;
            return lhs.second < rhs.second;
        });
        const std::size_t take = std::min<std::size_t>(ranked.size(), cfg.l);
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t a = ranked[i].second;
            out.gt_index[a] = static_cast<int>(g);
            out.gt_class[a] = gts[g].cls;
            out.expanded[a] = 1;
        }
    }
    return out;
}

}  // namespace hcral

#include "hcral/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hcral {

namespace {

constexpr double kProbFloor = 1e-6;

double clamp_p(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

// First-order updates over the flat logit vector and the per-anchor delta
// 4-vectors. Adam keeps one moment pair per scalar parameter.
struct Optimizer {
    OptConfig cfg;
    long t = 0;
    std::vector<double> m_logits, v_logits;
    std::vector<std::array<double, 4>> m_deltas, v_deltas;

    Optimizer(const OptConfig& c, std::size_t n_logits, std::size_t n_anchors) : cfg(c) {
        if (cfg.kind == OptKind::Adam) {
            m_logits.assign(n_logits, 0);
            v_logits.assign(n_logits, 0);
            m_deltas.assign(n_anchors, {0, 0, 0, 0});
            v_deltas.assign(n_anchors, {0, 0, 0, 0});
        }
    }

    double adam_step(double g, double& m, double& v) const {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
        const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
        return cfg.lr * mh / (std::sqrt(vh) + eps);
    }

    void apply(DetectorParams& params, const std::vector<double>& g_logits,
               const std::vector<std::array<double, 4>>& g_deltas) {
        ++t;
        if (cfg.kind == OptKind::Sgd) {
            for (std::size_t i = 0; i < params.logits.size(); ++i)
                params.logits[i] -= cfg.lr * g_logits[i];
            for (std::size_t a = 0; a < params.deltas.size(); ++a)
                for (int k = 0; k < 4; ++k) params.deltas[a][k] -= cfg.lr * g_deltas[a][k];
            return;
        }
        for (std::size_t i = 0; i < params.logits.size(); ++i)
            params.logits[i] -= adam_step(g_logits[i], m_logits[i], v_logits[i]);
        for (std::size_t a = 0; a < params.deltas.size(); ++a)
            for (int k = 0; k < 4; ++k)
                params.deltas[a][k] -= adam_step(g_deltas[a][k], m_deltas[a][k], v_deltas[a][k]);
    }
};

}  // namespace

double focal_loss(std::span<const ClsSample> samples, double alpha, double gamma,
                  double normalizer) {
    double total = 0;
    for (const ClsSample& s : samples) {
        const double p = clamp_p(s.p);
        const double pt = s.p_star ? p : 1.0 - p;
        const double at = s.p_star ? alpha : 1.0 - alpha;
        total += -at * std::pow(1.0 - pt, gamma) * std::log(pt);
    }
    return total / normalizer;
}

std::vector<double> focal_gradient(std::span<const ClsSample> samples, double alpha,
                                   double gamma, double normalizer) {
    std::vector<double> grads(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const ClsSample& s = samples[i];
        const double p = clamp_p(s.p);
        const double pt = s.p_star ? p : 1.0 - p;
        const double at = s.p_star ? alpha : 1.0 - alpha;
        const double sign = s.p_star ? 1.0 : -1.0;
        grads[i] = sign * at * std::pow(1.0 - pt, gamma) *
                   (gamma * pt * std::log(pt) - (1.0 - pt)) / normalizer;
    }
    return grads;
}

TrainReport train(SceneBatch& scene, const LossConfig& loss_cfg,
                  const AssignConfig& assign_cfg, const OptConfig& opt_cfg,
                  const EvalConfig& eval_cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n_anchors = scene.anchors.size();
    const int n_classes = scene.params.n_classes;
    if (n_anchors == 0 || n_classes < 1) throw std::invalid_argument("empty scene");
    if (opt_cfg.steps < 0 || !(opt_cfg.lr > 0))
        throw std::invalid_argument("invalid optimizer config");

    std::vector<Box> boxes = decode_boxes(scene);
    std::vector<double> top_score(n_anchors, 0);
    for (std::size_t a = 0; a < n_anchors; ++a)
        for (int c = 0; c < n_classes; ++c)
            top_score[a] = std::max(top_score[a], sigmoid(scene.params.logit(a, c)));

    const Predictions preds{top_score, boxes};
    const Assignment assign = assign_cfg.mode == AssignMode::Eatss
                                  ? eatss_assign(scene.anchors, scene.gts, assign_cfg, preds)
                                  : atss_assign(scene.anchors, scene.gts, assign_cfg);

    std::vector<std::size_t> positives;
    for (std::size_t a = 0; a < n_anchors; ++a)
        if (assign.is_positive(a)) positives.push_back(a);

    TrainReport report;
    report.n_anchors = n_anchors;
    report.n_positives = positives.size();

    ClsConfig cls_cfg = loss_cfg.cls;
    RegConfig reg_cfg = loss_cfg.reg;
    if (loss_cfg.mode == LossMode::GhmcGiou) {
        cls_cfg.use_omega = false;
        cls_cfg.use_rci_gate = false;
    }
    if (loss_cfg.mode != LossMode::Hcral) {
        reg_cfg.use_rci = false;
        reg_cfg.use_cf = false;
    }

    Optimizer opt(opt_cfg, scene.params.logits.size(), n_anchors);
    EmaState ema;
    std::vector<ClsSample> cls_samples(n_anchors * static_cast<std::size_t>(n_classes));
    std::vector<double> matched_iou(n_anchors, 0);

    for (int step = 0; step < opt_cfg.steps; ++step) {
        boxes = decode_boxes(scene);
        for (const Box& b : boxes)
            if (!b.valid())
                throw std::runtime_error("non-finite decode at step " + std::to_string(step));

        std::vector<double> best_iou(n_anchors, 0);
        for (std::size_t a = 0; a < n_anchors; ++a)
            for (const GroundTruth& gt : scene.gts)
                best_iou[a] = std::max(best_iou[a], iou(boxes[a], gt.box));
        double mean_pos_iou = 0;
        for (std::size_t a : positives) {
            matched_iou[a] = iou(boxes[a], scene.gts[assign.gt_index[a]].box);
            mean_pos_iou += matched_iou[a];
        }
        if (!positives.empty()) mean_pos_iou /= static_cast<double>(positives.size());

        for (std::size_t a = 0; a < n_anchors; ++a) {
            for (int c = 0; c < n_classes; ++c) {
                ClsSample& s = cls_samples[a * n_classes + c];
                s.p = sigmoid(scene.params.logit(a, c));
                if (assign.is_positive(a) && c == assign.gt_class[a]) {
                    s.p_star = 1;
                    s.iou_with_gt = matched_iou[a];
                } else {
                    s.p_star = 0;
                    s.iou_with_gt = best_iou[a];
                }
            }
        }

        double loss_cls = 0;
        std::vector<double> g_cls;
        if (loss_cfg.mode == LossMode::FocalGiou) {
            const double norm = std::max<double>(1.0, static_cast<double>(positives.size()));
            loss_cls = focal_loss(cls_samples, loss_cfg.focal_alpha, loss_cfg.focal_gamma, norm);
            g_cls = focal_gradient(cls_samples, loss_cfg.focal_alpha, loss_cfg.focal_gamma, norm);
        } else {
            loss_cls = hcra_c_loss(cls_samples, cls_cfg).loss;
            g_cls = hcra_c_gradient(cls_samples, cls_cfg);
        }

        double loss_reg = 0;
        std::vector<BoxGrad> g_reg;
        EmaState next_ema = ema;
        std::vector<RegSample> reg_samples;
        reg_samples.reserve(positives.size());
        for (std::size_t a : positives)
            reg_samples.push_back({boxes[a], scene.gts[assign.gt_index[a]].box,
                                   sigmoid(scene.params.logit(a, assign.gt_class[a]))});
        if (!reg_samples.empty()) {
            const RegLossResult rl = hcra_r_loss(reg_samples, reg_cfg, ema);
            loss_reg = rl.loss;
            next_ema = rl.state;
            g_reg = hcra_r_gradient(reg_samples, reg_cfg, ema);
        }

        const double total = loss_cls + loss_reg;
        if (!std::isfinite(total))
            throw std::runtime_error("non-finite loss at step " + std::to_string(step));
        report.steps.push_back({step, loss_cls, loss_reg, total, mean_pos_iou});

        std::vector<std::array<double, 4>> g_deltas(n_anchors, {0, 0, 0, 0});
        for (std::size_t i = 0; i < positives.size(); ++i) {
            const std::size_t a = positives[i];
            g_deltas[a] = delta_gradient(scene.anchors.anchors[a], stride_of(scene.anchors, a),
                                         scene.params.deltas[a], g_reg[i]);
        }
        opt.apply(scene.params, g_cls, g_deltas);
        ema = next_ema;
    }
    report.final_ema_r = ema.r;

    boxes = decode_boxes(scene);
    double final_iou = 0;
    for (std::size_t a : positives)
        final_iou += iou(boxes[a], scene.gts[assign.gt_index[a]].box);
    report.final_mean_iou =
        positives.empty() ? 0 : final_iou / static_cast<double>(positives.size());

    const std::vector<Detection> dets = collect_detections(scene, eval_cfg);
    report.final_ap = average_precision(dets, scene.gts, eval_cfg.ap_iou).ap;
    if (positives.size() >= 2)
        report.consistency = consistency_stats(scene, assign, loss_cfg.cls.alpha);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace hcral

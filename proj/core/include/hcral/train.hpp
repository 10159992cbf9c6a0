#pragma once

#include <cstddef>
#include <vector>

#include "hcral/assign.hpp"
#include "hcral/cls_loss.hpp"
#include "hcral/eval.hpp"
#include "hcral/reg_loss.hpp"
#include "hcral/scene.hpp"

namespace hcral {

enum class LossMode { Hcral, FocalGiou, GhmcGiou };
enum class OptKind { Sgd, Adam };

struct OptConfig {
    OptKind kind = OptKind::Adam;
    int steps = 500;
    double lr = 0.02;
};

struct LossConfig {
    LossMode mode = LossMode::Hcral;
    ClsConfig cls;
    RegConfig reg;
    // Focal baseline shape; unused by the other modes.
    double focal_alpha = 0.25;
    double focal_gamma = 2.0;
};

struct StepRecord {
    int step = 0;
    double loss_cls = 0;
    double loss_reg = 0;
    double loss_total = 0;
    double mean_iou = 0;  // matched IoU over positives at this step's decode
};

struct TrainReport {
    std::vector<StepRecord> steps;
    std::size_t n_anchors = 0;
    std::size_t n_positives = 0;
    double final_mean_iou = 0;
    double final_ap = 0;
    ConsistencyStats consistency;  // zeros when fewer than 2 positives
    double final_ema_r = 1.0;
    double wall_seconds = 0;  // measured, never serialized
};

/// Focal modulation of the binary cross-entropy; the local classification
/// baseline. Normalized by the positive count (at least 1).
double focal_loss(std::span<const ClsSample> samples, double alpha, double gamma,
                  double normalizer);
std::vector<double> focal_gradient(std::span<const ClsSample> samples, double alpha,
                                   double gamma, double normalizer);

/// Assigns once on the initial decode, then runs the configured number of
/// first-order steps: decode, classification + regression losses per the
/// selected mode, analytic gradients chained to the per-anchor parameters,
/// one optimizer update, one running-mean update. Zero steps returns the
/// initial metrics. Throws std::runtime_error naming the step when the
/// decode or the total loss turns non-finite.
TrainReport train(SceneBatch& scene, const LossConfig& loss_cfg,
                  const AssignConfig& assign_cfg, const OptConfig& opt_cfg,
                  const EvalConfig& eval_cfg = {});

}  // namespace hcral

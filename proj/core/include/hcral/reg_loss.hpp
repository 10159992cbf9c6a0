#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hcral/box.hpp"
#include "hcral/rci.hpp"

namespace hcral {

/// A positive regression sample: predicted box, its matched ground truth,
/// and the classification score of the matched class.
struct RegSample {
    Box pred_box;
    Box gt_box;
    double score = 0;
};

struct RegConfig {
    double alpha = -0.1;  // consistency offset, shared with classification
    double ep = 0.001;    // ratio stabilizer of the consistency coefficient
    // Suppression shape of t = exp(-iou^2 / gamma). Absent (flat mode) the
    // factor t is replaced by flat_weight.
    std::optional<double> gamma = 1.2;
    double flat_weight = 1.5;
    double ema_momentum = 0.1;
    bool use_rci = true;  // off: consistency coefficient == 1
    bool use_cf = true;   // off: conditioning factor == 1 (plain GIoU loss)
    // Center-offset exponent in the conditioning factor: rho^2/c^2 when 2
    // (the dimensionless convention), rho/c^2 when 1.
    int center_offset_exponent = 2;
    // Literal running-mean mode: every sample is scaled by the running mean
    // itself instead of dividing each coefficient by it.
    bool literal_ema_scaling = false;
    // Branch the consistency coefficient on s - alpha - iou instead of the
    // residual s - iou + alpha, unifying the two offset conventions.
    bool unify_alpha_sign = false;
    double task_weight = 1.0;  // 2.5 for RetinaNet-style runs
};

/// Running mean of the batch consistency coefficient. Single writer per
/// training run; updates are sequential by step.
struct EmaState {
    double r = 1.0;
    long step = 0;
};

/// Conditioning factor t * exp(R) * iou where R is the center-offset term
/// and t suppresses already-high-IoU samples (or is flat_weight when gamma
/// is absent). Zero whenever the boxes do not overlap.
double cf_reg(const RegSample& sample, const RegConfig& cfg);

/// Consistency coefficient of ratio form:
/// ((s-a)^2 + iou^2 + ep) / (2(s-a) iou + ep) on the overshoot branch and
/// its reciprocal on the other; >= 1 iff the residual is >= 0 (for
/// s - alpha >= 0), exactly 1 on the line s - alpha = iou. The sample form
/// computes the IoU from its boxes and defers to the scalar form.
double rci_reg(double score, double iou_val, const RegConfig& cfg);
double rci_reg(const RegSample& sample, const RegConfig& cfg);

/// Convex-combination update r <- (1-m) r + m value. Throws
/// std::invalid_argument for m outside (0,1] or a nonpositive value.
EmaState ema_update(const EmaState& state, double batch_mean_rci_reg, double momentum);

struct RegLossResult {
    double loss = 0;
    std::vector<double> weights;  // detached per-sample r_i * CF_i
    EmaState state;               // input state folded with this batch's mean
};

/// GIoU loss scaled by the detached product of the normalized consistency
/// coefficient and the conditioning factor, averaged over the positives and
/// scaled by task_weight. Normalization divides each sample's coefficient
/// by the incoming running mean (state as passed in); the returned state
/// has the current batch mean folded in for the next step. Throws
/// std::invalid_argument on an empty batch.
RegLossResult hcra_r_loss(std::span<const RegSample> samples, const RegConfig& cfg,
                          const EmaState& state);

/// Per-sample partials of the loss with respect to the predicted box
/// corners, with the weights frozen: w_i * dL_GIoU / d(pred) scaled like
/// the loss. Uses the same incoming state as hcra_r_loss so both see
/// identical weights.
std::vector<BoxGrad> hcra_r_gradient(std::span<const RegSample> samples,
                                     const RegConfig& cfg, const EmaState& state);

}  // namespace hcral

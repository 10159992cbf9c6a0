#pragma once

#include <span>
#include <vector>

#include "hcral/rci.hpp"

namespace hcral {

/// One binary one-vs-all classification sample. p is the post-sigmoid
/// score, p_star the {0,1} label. iou_with_gt is the IoU of the sample's
/// predicted box against its matched ground truth (positives) or the best
/// overlapping ground truth of any class (negatives; 0 with no overlap).
struct ClsSample {
    double p = 0;
    int p_star = 0;
    double iou_with_gt = 0;
};

enum class Normalizer { TotalCount, PositiveCount };

struct ClsConfig {
    double theta = 5.0;   // gate sharpness
    int m_bins = 20;      // gradient-density bins M
    double mu = 0.7;      // negative-branch decay center
    double alpha = -0.1;  // consistency offset of the residual
    Normalizer normalizer = Normalizer::TotalCount;
    bool use_omega = true;     // off: omega == 1 (reduces toward GHM-C)
    bool use_rci_gate = true;  // off: gate == 1
    // The overshoot branch compares p > iou as written; switching this on
    // compares the full residual instead (p > iou - alpha).
    bool gate_alpha_shifted = false;
};

/// IoU-aware sample weight: positives get their IoU, negatives get
/// 1 - iou * (iou - mu)^2 which decays as the negative's overlap grows
/// past mu.
double omega(const ClsSample& sample, double mu);

/// Consistency gate: 1 for negatives, 0 for positives whose score does not
/// exceed their IoU, sigmoid(theta * rci) for overshooting positives.
double rci_cls_gate(const ClsSample& sample, double theta, double alpha,
                    bool alpha_shifted_compare = false);

struct ClsLossResult {
    double loss = 0;
    std::vector<double> weights;  // per-sample omega * beta * gate, detached
};

/// Weighted binary cross-entropy over the batch. Weights are computed in a
/// first pass (gradient-density bins over the whole batch, then
/// omega * beta * gate per sample) and treated as constants; the loss is
/// sum(w_i * CE_i) / normalizer. Probabilities are clamped to
/// [1e-6, 1 - 1e-6] before the logs. Throws std::invalid_argument on an
/// empty batch.
ClsLossResult hcra_c_loss(std::span<const ClsSample> samples, const ClsConfig& cfg);

/// d(loss)/d(logit) per sample with the weights frozen:
/// w_i * (p_i - p*_i) / normalizer.
std::vector<double> hcra_c_gradient(std::span<const ClsSample> samples,
                                    const ClsConfig& cfg);

}  // namespace hcral

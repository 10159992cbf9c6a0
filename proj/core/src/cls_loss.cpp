#include "hcral/cls_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hcral/ghm.hpp"

namespace hcral {

namespace {

constexpr double kProbClamp = 1e-6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double binary_cross_entropy(double p, int p_star) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return p_star == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double normalizer_value(std::span<const ClsSample> samples, Normalizer mode) {
    if (mode == Normalizer::TotalCount) return static_cast<double>(samples.size());
    std::size_t n_pos = 0;
    for (const auto& s : samples) n_pos += s.p_star == 1 ? 1 : 0;
    return static_cast<double>(std::max<std::size_t>(n_pos, 1));
}

std::vector<double> detached_weights(std::span<const ClsSample> samples,
                                     const ClsConfig& cfg) {
    std::vector<double> norms;
    norms.reserve(samples.size());
    for (const auto& s : samples) norms.push_back(gradient_norm(s.p, s.p_star));
    const GradientDensityBins bins = build_bins(norms, cfg.m_bins);
    std::vector<double> weights = beta_weights(bins, norms);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (cfg.use_omega) weights[i] *= omega(samples[i], cfg.mu);
        if (cfg.use_rci_gate)
            weights[i] *= rci_cls_gate(samples[i], cfg.theta, cfg.alpha,
                                       cfg.gate_alpha_shifted);
    }
    return weights;
}

}  // namespace

double omega(const ClsSample& sample, double mu) {
    if (sample.p_star == 1) return sample.iou_with_gt;
    const double d = sample.iou_with_gt - mu;
    return 1.0 - sample.iou_with_gt * d * d;
}

double rci_cls_gate(const ClsSample& sample, double theta, double alpha,
                    bool alpha_shifted_compare) {
    if (sample.p_star != 1) return 1.0;
    const double residual = rci(sample.p, sample.iou_with_gt, alpha);
    const bool overshoot = alpha_shifted_compare ? residual > 0
                                                 : sample.p > sample.iou_with_gt;
    if (!overshoot) return 0.0;
    return sigmoid(theta * residual);
}

ClsLossResult hcra_c_loss(std::span<const ClsSample> samples, const ClsConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("empty classification batch");
    ClsLossResult result;
    result.weights = detached_weights(samples, cfg);
    const double norm = normalizer_value(samples, cfg.normalizer);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        total += result.weights[i] *
                 binary_cross_entropy(samples[i].p, samples[i].p_star);
    result.loss = total / norm;
    return result;
}

std::vector<double> hcra_c_gradient(std::span<const ClsSample> samples,
                                    const ClsConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("empty classification batch");
    std::vector<double> grads = detached_weights(samples, cfg);
    const double norm = normalizer_value(samples, cfg.normalizer);
    for (std::size_t i = 0; i < samples.size(); ++i)
        grads[i] *= (samples[i].p - static_cast<double>(samples[i].p_star)) / norm;
    return grads;
}

}  // namespace hcral

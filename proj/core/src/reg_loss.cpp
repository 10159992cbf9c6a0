#include "hcral/reg_loss.hpp"

#include <cmath>
#include <stdexcept>

namespace hcral {

namespace {

std::vector<double> detached_weights(std::span<const RegSample> samples,
                                     const RegConfig& cfg, const EmaState& state,
                                     double* batch_mean_out) {
    std::vector<double> coeffs(samples.size(), 1.0);
    double mean = 1.0;
    if (cfg.use_rci) {
        double sum = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            coeffs[i] = rci_reg(samples[i], cfg);
            sum += coeffs[i];
        }
        mean = sum / static_cast<double>(samples.size());
    }
    if (batch_mean_out) *batch_mean_out = mean;

    std::vector<double> weights(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cf = cfg.use_cf ? cf_reg(samples[i], cfg) : 1.0;
        double r_i = 1.0;
        if (cfg.use_rci)
            r_i = cfg.literal_ema_scaling ? state.r : coeffs[i] / state.r;
        weights[i] = r_i * cf;
    }
    return weights;
}

}  // namespace

double cf_reg(const RegSample& sample, const RegConfig& cfg) {
    const EnclosureMeasure m = measure(sample.pred_box, sample.gt_box);
    double offset = 0.0;
    if (m.enclosing_diag_sq > 0) {
        offset = cfg.center_offset_exponent == 1
                     ? std::sqrt(m.center_distance_sq) / m.enclosing_diag_sq
                     : m.center_distance_sq / m.enclosing_diag_sq;
    }
    const double t = cfg.gamma ? std::exp(-(m.iou * m.iou) / *cfg.gamma)
                               : cfg.flat_weight;
    return t * std::exp(offset) * m.iou;
}

double rci_reg(double score, double iou_val, const RegConfig& cfg) {
    const double a = score - cfg.alpha;
    const double num = a * a + iou_val * iou_val + cfg.ep;
    const double den = 2.0 * a * iou_val + cfg.ep;
    if (num == 0.0 && den == 0.0) return 1.0;  // ep = 0 with s - alpha = iou = 0
    const double residual =
        cfg.unify_alpha_sign ? a - iou_val : rci(score, iou_val, cfg.alpha);
    return residual >= 0 ? num / den : den / num;
}

double rci_reg(const RegSample& sample, const RegConfig& cfg) {
    return rci_reg(sample.score, iou(sample.pred_box, sample.gt_box), cfg);
}

EmaState ema_update(const EmaState& state, double batch_mean_rci_reg, double momentum) {
    if (!(momentum > 0.0) || momentum > 1.0)
        throw std::invalid_argument("ema momentum must be in (0, 1]");
    if (!(batch_mean_rci_reg > 0.0))
        throw std::invalid_argument("ema input must be positive");
    EmaState next;
    next.r = (1.0 - momentum) * state.r + momentum * batch_mean_rci_reg;
    next.step = state.step + 1;
    return next;
}

RegLossResult hcra_r_loss(std::span<const RegSample> samples, const RegConfig& cfg,
                          const EmaState& state) {
    if (samples.empty()) throw std::invalid_argument("empty regression batch");
    RegLossResult result;
    double batch_mean = 1.0;
    result.weights = detached_weights(samples, cfg, state, &batch_mean);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        total += result.weights[i] * (1.0 - giou(samples[i].pred_box, samples[i].gt_box));
    result.loss = cfg.task_weight * total / static_cast<double>(samples.size());
    result.state = cfg.use_rci ? ema_update(state, batch_mean, cfg.ema_momentum)
                               : state;
    return result;
}

std::vector<BoxGrad> hcra_r_gradient(std::span<const RegSample> samples,
                                     const RegConfig& cfg, const EmaState& state) {
    if (samples.empty()) throw std::invalid_argument("empty regression batch");
    const std::vector<double> weights =
        detached_weights(samples, cfg, state, nullptr);
    const double scale = cfg.task_weight / static_cast<double>(samples.size());
    std::vector<BoxGrad> grads(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        BoxGrad g = giou_gradient(samples[i].pred_box, samples[i].gt_box);
        for (int k = 0; k < 4; ++k) g[k] *= weights[i] * scale;
        grads[i] = g;
    }
    return grads;
}

}  // namespace hcral

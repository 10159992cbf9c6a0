#include "hcral/ghm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcral {

namespace {
constexpr double kLastEdgeEps = 1e-6;
}

double gradient_norm(double p, int p_star) {
    return std::abs(p - static_cast<double>(p_star));
}

int GradientDensityBins::bin_index(double g) const {
    if (!(g >= 0.0) || g > edges.back())
        throw std::invalid_argument("gradient norm outside [0, 1]");
    const int idx = static_cast<int>(g * m_bins);
    return std::min(idx, m_bins - 1);
}

double GradientDensityBins::density(double g) const {
    // Uniform widths: GD = count / (1/M) = count * M.
    return static_cast<double>(counts[bin_index(g)]) * m_bins;
}

GradientDensityBins build_bins(std::span<const double> gradient_norms, int m_bins) {
    if (m_bins < 1) throw std::invalid_argument("m_bins must be >= 1");
    if (gradient_norms.empty())
        throw std::invalid_argument("no samples to bin");

    GradientDensityBins bins;
    bins.m_bins = m_bins;
    bins.edges.resize(m_bins + 1);
    for (int i = 0; i < m_bins; ++i)
        bins.edges[i] = static_cast<double>(i) / m_bins;
    bins.edges[m_bins] = 1.0 + kLastEdgeEps;
    bins.counts.assign(m_bins, 0);
    for (double g : gradient_norms)
        ++bins.counts[bins.bin_index(g)];
    bins.total_n = static_cast<int>(gradient_norms.size());
    return bins;
}

std::vector<double> beta_weights(const GradientDensityBins& bins,
                                 std::span<const double> gradient_norms) {
    std::vector<double> betas;
    betas.reserve(gradient_norms.size());
    for (double g : gradient_norms) {
        const int idx = bins.bin_index(g);
        if (bins.counts[idx] == 0)
            throw std::logic_error("queried gradient norm falls in an empty bin");
        betas.push_back(static_cast<double>(bins.total_n) /
                        (static_cast<double>(bins.counts[idx]) * bins.m_bins));
    }
    return betas;
}

}  // namespace hcral

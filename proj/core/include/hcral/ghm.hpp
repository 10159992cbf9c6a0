#pragma once

#include <span>
#include <vector>

namespace hcral {

/// Histogram of gradient norms over M uniform bins spanning [0,1].
/// The last edge is extended by a small epsilon so a norm of exactly 1.0
/// falls into bin M-1. Density uses the nominal width 1/M. Immutable after
/// build_bins; safe to share across threads.
struct GradientDensityBins {
    int m_bins = 0;
    std::vector<double> edges;  // m_bins + 1 boundaries
    std::vector<int> counts;    // per-bin sample counts, sums to total_n
    int total_n = 0;

    int bin_index(double gradient_norm) const;

    /// Gradient density GD(g): count of g's bin divided by the bin width,
    /// i.e. count * M for uniform bins.
    double density(double gradient_norm) const;
};

/// Gradient norm of a sigmoid cross-entropy sample: |p - p*|.
double gradient_norm(double p, int p_star);

/// Bins the given norms into m_bins uniform subintervals of [0,1].
/// Throws std::invalid_argument on an empty input or m_bins < 1.
GradientDensityBins build_bins(std::span<const double> gradient_norms, int m_bins);

/// Per-sample harmonizing weights beta_i = N / GD(g_i). Requires the bins
/// to have been built over a population containing every queried norm;
/// querying a norm that lands in an empty bin throws std::logic_error.
std::vector<double> beta_weights(const GradientDensityBins& bins,
                                 std::span<const double> gradient_norms);

}  // namespace hcral

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "hcral/ghm.hpp"
#include "hcral/rng.hpp"

using namespace hcral;

TEST_CASE("gradient norm is the absolute score-label gap") {
    CHECK(gradient_norm(0.3, 1) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(gradient_norm(0.3, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(gradient_norm(1.0, 1) == 0.0);
    CHECK(gradient_norm(0.0, 0) == 0.0);
}

TEST_CASE("a point mass lands in one bin with density count times m") {
    const std::vector<double> norms(10, 0.05);
    const GradientDensityBins bins = build_bins(norms, 20);
    CHECK(bins.total_n == 10);
    CHECK(std::accumulate(bins.counts.begin(), bins.counts.end(), 0) == 10);
    CHECK(bins.counts[bins.bin_index(0.05)] == 10);
    CHECK(bins.density(0.05) == 200.0);
    for (double beta : beta_weights(bins, norms))
        CHECK(beta == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("one sample per bin gives uniform unit weights") {
    const int m = 20;
    std::vector<double> norms;
    for (int i = 0; i < m; ++i) norms.push_back((i + 0.5) / m);
    const GradientDensityBins bins = build_bins(norms, m);
    for (double beta : beta_weights(bins, norms)) CHECK(beta == 1.0);
}

TEST_CASE("dense bins get small weights, sparse bins large ones") {
    std::vector<double> norms(90, 0.01);
    norms.insert(norms.end(), 10, 0.99);
    const GradientDensityBins bins = build_bins(norms, 20);
    const std::vector<double> betas = beta_weights(bins, norms);
    for (int i = 0; i < 90; ++i) CHECK(betas[i] == doctest::Approx(100.0 / 1800.0));
    for (int i = 90; i < 100; ++i) CHECK(betas[i] == doctest::Approx(0.5));
    // Every dense-bin weight sits strictly below every sparse-bin weight.
    CHECK(*std::max_element(betas.begin(), betas.begin() + 90) <
          *std::min_element(betas.begin() + 90, betas.end()));
}

TEST_CASE("degenerate single-sample single-bin population") {
    const std::vector<double> norms = {0.4};
    const GradientDensityBins bins = build_bins(norms, 1);
    CHECK(beta_weights(bins, norms)[0] == 1.0);
}

TEST_CASE("a norm of exactly one falls in the last bin") {
    const std::vector<double> norms = {1.0, 0.0};
    const GradientDensityBins bins = build_bins(norms, 20);
    CHECK(bins.bin_index(1.0) == 19);
    CHECK(bins.bin_index(0.0) == 0);
    CHECK(bins.counts[19] == 1);
    CHECK(bins.counts[0] == 1);
}

TEST_CASE("bin construction rejects bad input") {
    CHECK_THROWS_AS(build_bins({}, 20), std::invalid_argument);
    const std::vector<double> one = {0.5};
    CHECK_THROWS_AS(build_bins(one, 0), std::invalid_argument);
}

TEST_CASE("querying an empty bin is an error") {
    const std::vector<double> norms = {0.05};
    const GradientDensityBins bins = build_bins(norms, 20);
    const std::vector<double> other = {0.95};
    CHECK_THROWS_AS(beta_weights(bins, other), std::logic_error);
}

TEST_CASE("counts always sum to the population and weights stay positive") {
    Rng rng(21);
    for (int run = 0; run < 50; ++run) {
        std::vector<double> norms;
        const int n = rng.uniform_int(1, 200);
        for (int i = 0; i < n; ++i) norms.push_back(rng.uniform());
        const GradientDensityBins bins = build_bins(norms, 20);
        CHECK(std::accumulate(bins.counts.begin(), bins.counts.end(), 0) == n);
        for (double beta : beta_weights(bins, norms)) CHECK(beta > 0.0);
    }
}

TEST_CASE("weights are invariant to sample order") {
    Rng rng(22);
    std::vector<double> norms;
    for (int i = 0; i < 60; ++i) norms.push_back(rng.uniform());
    const std::vector<double> base = beta_weights(build_bins(norms, 20), norms);

    std::vector<std::size_t> perm(norms.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    std::vector<double> shuffled;
    for (std::size_t i : perm) shuffled.push_back(norms[i]);

    const std::vector<double> permuted = beta_weights(build_bins(shuffled, 20), shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(permuted[i] == base[perm[i]]);
}

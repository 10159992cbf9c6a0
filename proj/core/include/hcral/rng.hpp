#pragma once

#include <cstdint>
#include <random>

namespace hcral {

/// Seeded generator with hand-rolled draws so sequences are identical
/// across standard libraries (std distributions are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(engine_() % span);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace hcral

#ifndef STAPCRB_RANDOM_HPP
#define STAPCRB_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include "stapcrb/common.hpp"

namespace stapcrb {

/// Stream identifiers mixed into derived seeds. Values are part of the
/// reproducibility contract and must not change.
enum class StreamTag : std::uint64_t {
  kTarget = 0x7461726765740001ULL,        // placement + signal phases, per trial
  kInterference = 0x696e746572660002ULL,  // clutter/noise draws, per (point, trial)
  kTraining = 0x747261696e000003ULL,      // CNN init + shuffling, per point
  kOracle = 0x6f7261636c650004ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Folds a path of integers into a seed: splitmix64 chained over
/// (master, tag, path...). Independent of scheduling by construction.
std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                          std::initializer_list<std::uint64_t> path);

/// Per-trial random source. Never shared between workers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }
  /// Circular complex normal CN(0, 1): real and imaginary parts ~ N(0, 1/2).
  cplx complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace stapcrb

#endif  // STAPCRB_RANDOM_HPP

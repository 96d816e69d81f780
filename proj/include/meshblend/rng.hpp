#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace meshblend {

// Seeded generator with distribution helpers whose output depends only on the
// engine bits, so results are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller.
  double normal();

  // Uniformly random permutation of [0, n) by Fisher-Yates.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace meshblend

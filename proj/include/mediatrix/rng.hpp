#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mediatrix/errors.hpp"

namespace mediatrix {

// Stable seed derivation so per-row / per-resample streams never depend on
// how many draws earlier rows consumed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(master ^ 0x6d656469ULL) + splitmix64(stream) +
                    0x9e3779b97f4a7c15ULL * index);
}

// Stream tags for derive_seed.
inline constexpr std::uint64_t kStreamDataset = 1;
inline constexpr std::uint64_t kStreamBootstrap = 2;
inline constexpr std::uint64_t kStreamMonteCarlo = 3;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double u01() { return (gen_() >> 11) * 0x1.0p-53; }

  // Inverse-CDF draw from an unnormalized mass vector.
  int sample(std::span<const double> probs) {
    double total = 0;
    for (double p : probs) total += p;
    if (!(total > 0)) {
      fail(ErrorCode::Internal, "sampling from an all-zero mass vector");
    }
    double u = u01() * total;
    double acc = 0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0) continue;
      acc += probs[i];
      last_positive = static_cast<int>(i);
      if (u < acc) return last_positive;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mediatrix

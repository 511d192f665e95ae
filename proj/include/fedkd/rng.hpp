#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fedkd {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Every source of randomness in the simulator draws from its own stream so
// that stages can run in any interleaving without perturbing each other.
enum class SeedStream : std::uint64_t {
  kData = 1,
  kPartition,
  kWeights,
  kInitPublic,
  kInitLocal,
  kSubset,
  kKd,
  kLocal,
  kDropout,
};

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// mt19937_64 with hand-rolled sampling on top. The standard library leaves
// distribution algorithms implementation-defined, so the ones needed here are
// spelled out to keep seeded results stable across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Standard normal (Box-Muller, pairs cached).
  double normal();

  // Gamma(shape) with unit scale, shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);

  // Proportions summing to 1 from a symmetric Dirichlet(alpha).
  std::vector<double> dirichlet(double alpha, std::size_t k);

  // Unbiased integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // k distinct indices from [0, n), returned ascending.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedkd

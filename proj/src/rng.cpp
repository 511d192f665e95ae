#include "fedkd/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "fedkd/errors.hpp"

namespace fedkd {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return h;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - uniform() keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw ParameterError("gamma shape must be positive");
  }
  if (shape < 1.0) {
    const double u = 1.0 - uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

std::vector<double> Rng::dirichlet(double alpha, std::size_t k) {
  if (!(alpha > 0.0)) {
    throw ParameterError("dirichlet alpha must be positive");
  }
  if (k == 0) {
    throw ParameterError("dirichlet needs at least one component");
  }
  std::vector<double> draws(k);
  for (auto& d : draws) {
    d = gamma(alpha);
  }
  const double total = std::accumulate(draws.begin(), draws.end(), 0.0);
  if (!(total > 0.0)) {
    std::fill(draws.begin(), draws.end(), 1.0 / static_cast<double>(k));
    return draws;
  }
  for (auto& d : draws) {
    d /= total;
  }
  return draws;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) {
    throw ParameterError("below(0) is undefined");
  }
  // Rejection keeps the draw unbiased.
  const std::uint64_t residue = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - residue;
  std::uint64_t x = next_u64();
  while (x > limit) {
    x = next_u64();
  }
  return x % n;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) {
    throw ParameterError("cannot sample more items than the population holds");
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace fedkd

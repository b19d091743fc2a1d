#include "mtp/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace mtp {

Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (std::uint64_t p : path) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

namespace {

// Box-Muller on our own uniforms keeps streams identical across standard
// library implementations.
double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

LocalVec random_direction(Rng& rng, int dim) {
  LocalVec v{};
  if (dim == 1) {
    v[0] = (rng() >> 63) ? 1.0 : -1.0;
    return v;
  }
  if (dim == 2) {
    const double a = 2.0 * std::numbers::pi * uniform01(rng);
    v[0] = std::cos(a);
    v[1] = std::sin(a);
    return v;
  }
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[i] = standard_normal(rng);
      n2 += v[i] * v[i];
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < dim; ++i) v[i] *= inv;
  return v;
}

LocalVec random_in_unit_ball(Rng& rng, int dim) {
  if (dim == 1) {
    LocalVec v{};
    v[0] = 2.0 * uniform01(rng) - 1.0;
    return v;
  }
  LocalVec v = random_direction(rng, dim);
  const double rho = std::pow(uniform01(rng), 1.0 / dim);
  for (int i = 0; i < dim; ++i) v[i] *= rho;
  return v;
}

}  // namespace mtp

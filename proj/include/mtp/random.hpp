#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mtp/torus.hpp"

namespace mtp {

using Rng = std::mt19937_64;

/// Independent stream derived from a user seed and a path of stream ids
/// (e.g. {entry index, chunk}). Identical inputs give identical streams, so
/// results do not depend on how work is split across workers.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform direction on S^{d-1} (for d = 1 one of {-1, +1}).
LocalVec random_direction(Rng& rng, int dim);

/// Uniform point of the closed unit ball of R^d.
LocalVec random_in_unit_ball(Rng& rng, int dim);

}  // namespace mtp

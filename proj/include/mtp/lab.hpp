#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtp/family.hpp"
#include "mtp/shape.hpp"

namespace mtp {

/// A contiguous block of family indices treated as one generation.
struct Generation {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
  /// Label echoed into reports (e.g. the denominator Q).
  double label = 0.0;
};

/// Denominators q in [Q, 2Q) for each Q, clipped to the family's range;
/// empty generations are dropped.
std::vector<Generation> diophantine_generations(const LimsupFamily& family, std::span<const std::uint64_t> Qs);
/// Indices [J, 2J) for each J.
std::vector<Generation> dyadic_generations(const LimsupFamily& family, std::span<const std::uint64_t> Js);
/// Q (or J) = 2^lo, ..., 2^hi.
std::vector<std::uint64_t> powers_of_two(int lo, int hi);

struct CoveringOptions {
  /// Largest number of distinct occupied cells one generation may produce.
  std::uint64_t max_cells = 100'000'000;
  unsigned workers = 1;
};

struct CoveringCountCurve {
  std::vector<double> labels;
  std::vector<double> scales;
  std::vector<std::uint64_t> counts;
  /// Slope of log N against log(1/delta).
  double fitted_slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

/// For each generation, counts grid cells of side delta meeting the union of
/// that generation's subsets, where delta is the smallest full width of the
/// generation's first subset rounded down to a power of two. Throws
/// BudgetExceeded past max_cells.
CoveringCountCurve covering_counts(const LimsupFamily& family, std::span<const Generation> generations,
                                   const CoveringOptions& options = {});

/// Dyadic cube of side 2^{-level} with integer corner k (each k_i < 2^level).
struct DyadicCube {
  int level = 0;
  std::vector<std::uint64_t> corner;
};

struct ContentEstimate {
  DyadicCube cube;
  double t = 0.0;
  /// Depth attaining the minimum.
  int depth = 0;
  double value = 0.0;
  /// Sum of |D|^t over occupied sub-cubes at each depth, cube level first.
  std::vector<double> per_depth;
  std::vector<std::uint64_t> occupied;
};

/// Uniform-depth dyadic cover estimate of M^t_inf(E cap cube): the minimum
/// over depths level..max_depth of (occupied sub-cubes) * (sqrt(d) 2^{-depth})^t.
/// A sub-cube is occupied when it meets the axis-aligned bounding box of some
/// shape.
ContentEstimate outer_content_estimate(std::span<const Shape> shapes, const DyadicCube& cube, double t, int max_depth);
/// Same for a finite point set.
ContentEstimate outer_content_estimate(std::span<const TorusPoint> points, const DyadicCube& cube, double t,
                                       int max_depth);

struct IntersectionGeneration {
  double label = 0.0;
  double scale = 0.0;
  std::uint64_t count = 0;
  bool empty = false;
};

struct IntersectionReport {
  std::vector<std::vector<double>> taus;
  std::vector<double> formula_values;
  double target = 0.0;
  std::vector<IntersectionGeneration> generations;
  double fitted_slope = 0.0;
  bool slope_available = false;
  std::vector<double> residuals;
  /// Covering-count slope of each family on its own.
  std::vector<double> individual_slopes;
  std::size_t empty_generations = 0;
};

/// Intersects the per-generation unions of 2-4 Diophantine families of the
/// same dimension, counts cells of the finest generation scale meeting the
/// intersection, and fits the slope. Generations are [Q, 2Q) for each Q.
IntersectionReport intersection_experiment(std::span<const LimsupFamily> families,
                                           std::span<const std::uint64_t> Qs,
                                           const CoveringOptions& options = {});

}  // namespace mtp

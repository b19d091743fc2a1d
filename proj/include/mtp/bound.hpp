#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtp/family.hpp"
#include "mtp/riesz.hpp"

namespace mtp {

enum class BoundMethod { energy_ratio, singular_value, subset_search };
std::string_view to_string(BoundMethod m);

struct TGridPoint {
  double t = 0.0;
  /// max_j R_j(t) over the regression indices.
  double sup_stat = 0.0;
  /// OLS slope of log R_j(t) against log(1/r_j).
  double slope = 0.0;
  bool bounded = false;
};

struct BoundOptions {
  std::uint64_t j_min = 1;
  /// 0 selects 10^4 for exact ratios and 10^2 for Monte Carlo ratios.
  std::uint64_t j_max = 0;
  double t_tol = 1e-3;
  /// R_j(t) counts as bounded when the regression slope is at most this.
  double slope_tol = 0.0;
  std::size_t coarse_points = 24;
  /// Indices used in the regression, log-spaced over [j_min, j_max];
  /// 0 selects every index for exact ratios and 64 for Monte Carlo ratios.
  std::size_t max_regression_points = 0;
  /// Geometry samples per entry for Monte Carlo ratios.
  std::uint64_t samples = 20'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Also compute s on [j_min, j_max / 2].
  bool half_window_diagnostic = true;
};

struct DimensionReport {
  double s = 0.0;
  BoundMethod method = BoundMethod::energy_ratio;
  /// How R_j(t) was evaluated: "closed_form", "monte_carlo" or "singular_value".
  std::string ratio_model;
  std::vector<TGridPoint> t_grid;
  std::uint64_t j_min = 0;
  std::uint64_t j_max = 0;
  std::size_t regression_points = 0;
  double t_tol = 0.0;
  double slope_tol = 0.0;
  /// Bounded flags needed majority smoothing to become monotone.
  bool smoothed = false;
  /// s recomputed on [j_min, j_max / 2]; negative when not computed.
  double s_half_window = -1.0;
  std::string label = "finite-window estimate";
  /// Subset search only: the shrink map that produced s, and s per map.
  std::string winning_map;
  std::vector<std::pair<std::string, double>> candidates;
};

/// s = sup{t : sup_j I_t(U_j) lambda(B_j) / lambda(U_j)^2 < inf} over a
/// finite index window. Intervals use the closed-form energy; other shapes
/// use per-entry Monte Carlo caches shared by every t.
DimensionReport bound_energy_ratio(const LimsupFamily& family, const BoundOptions& options = {});

/// Same search with R_j(t) = lambda(B_j) / phi^t(U_j); every U_j must be a
/// ball, box or ellipsoid, and boxes cannot be mixed with the others.
DimensionReport bound_singular_value(const LimsupFamily& family, const BoundOptions& options = {});

/// Sends U_j to an open subset V_j.
struct ShrinkMap {
  std::string name;
  std::function<Shape(const Shape&)> apply;
};

ShrinkMap identity_map();
/// Largest centred ball inside a ball, box or ellipsoid.
ShrinkMap inscribed_ball_map();
/// Centred box with half the half-widths (boxes) or half-widths a_i / sqrt(d)
/// (balls, ellipsoids).
ShrinkMap central_sub_box_map();

/// bound_energy_ratio for every {V_j = map(U_j)} family, keeping the largest
/// s. Each map's output is checked by sampling to lie inside U_j.
DimensionReport bound_subset_search(const LimsupFamily& family, std::span<const ShrinkMap> maps,
                                    const BoundOptions& options = {});

/// D(tau) = min_j (d + 1 + j tau_j - sum_{i <= j} tau_i) / (1 + tau_j), for
/// tau sorted ascending with tau_1 >= 1/d.
double dimension_formula_D(std::span<const double> tau);
/// Sorts a copy of tau first.
double dimension_formula_D_sorted(std::span<const double> tau);

/// Log-spaced distinct indices in [lo, hi]; every index when count is 0 or
/// at least the window size.
std::vector<std::uint64_t> regression_indices(std::uint64_t lo, std::uint64_t hi, std::size_t count);

}  // namespace mtp

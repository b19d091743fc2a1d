#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mtp/family.hpp"
#include "mtp/shape.hpp"

namespace mtp {

/// Largest radius accepted by vitali_select: 5r stays below 1/4.
inline constexpr double kMaxVitaliRadius = 1.0 / 20.0;

/// Union measures are exact in d = 1 (merged arcs) and use an occupancy
/// grid of side 2^{-grid_bits} otherwise; a cell counts as covered when its
/// centre lies in some ball.
struct UnionMeasureOptions {
  /// 0 selects the default: 9 bits for d = 2, 6 bits for d >= 3.
  int grid_bits = 0;
};

struct UnionMeasure {
  double value = 0.0;
  bool exact = false;
  /// Grid resolution used; 0 when exact.
  int grid_bits = 0;
};

int default_grid_bits(int dim);
UnionMeasure union_measure(std::span<const Ball> balls, const UnionMeasureOptions& options = {});

/// Incrementally maintained measure of a growing union of balls.
class UnionAccumulator {
 public:
  UnionAccumulator(int dim, const UnionMeasureOptions& options = {});
  ~UnionAccumulator();
  UnionAccumulator(UnionAccumulator&&) noexcept;
  UnionAccumulator& operator=(UnionAccumulator&&) noexcept;

  void add(const Ball& b);
  double value() const;
  bool exact() const;
  int grid_bits() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CoverSelection {
  /// Positions (into the input list) of the kept, pairwise disjoint balls,
  /// in selection order.
  std::vector<std::size_t> kept_indices;
  double expansion_factor = 5.0;
  /// Measure of the union of the expanded kept balls.
  double coverage_measure = 0.0;
  bool coverage_exact = false;
  /// Sum of the kept balls' measures.
  double disjoint_sum = 0.0;
};

/// Greedy Vitali selection: balls by radius descending (ties by position),
/// keep each ball whose distance to every kept ball exceeds the sum of
/// radii. Every input ball then lies inside some kept ball scaled by 3,
/// hence by 5. Radii must be below 1/20.
CoverSelection vitali_select(std::span<const Ball> balls, const UnionMeasureOptions& options = {});

struct TruncationWindow {
  std::uint64_t n = 1;
  std::uint64_t m_n = 1;
  double achieved_measure = 0.0;
  bool exact = false;
  int grid_bits = 0;
};

struct TruncationOptions {
  /// Largest index scanned before giving up.
  std::uint64_t max_j = 1'000'000;
  UnionMeasureOptions grid{};
};

/// Smallest m_n >= n with lambda(B_n u ... u B_{m_n}) > 1 - 1/n. Throws
/// BudgetExceeded when the scan budget (or a finite family) runs out first.
TruncationWindow find_truncation(const LimsupFamily& family, std::uint64_t n, const TruncationOptions& options = {});

struct SelectedUnion {
  TruncationWindow window;
  CoverSelection selection;
  /// Family indices j of the kept balls, ascending.
  std::vector<std::uint64_t> kept;
  /// lambda of the union of kept balls (they are disjoint, so this is the
  /// disjoint sum).
  double selected_measure = 0.0;
  /// 5^{-d} (1 - 1/n).
  double lower_target = 0.0;
  /// selected_measure - lower_target; positive when the chain holds.
  double measure_bound_check = 0.0;
  bool bound_holds = false;
};

SelectedUnion build_selected_union(const LimsupFamily& family, const TruncationWindow& window,
                                   const UnionMeasureOptions& options = {});

}  // namespace mtp

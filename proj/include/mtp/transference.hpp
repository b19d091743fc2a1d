#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtp/family.hpp"
#include "mtp/riesz.hpp"
#include "mtp/vitali.hpp"
#include "mtp/weighted_measure.hpp"

namespace mtp {

/// nu_n: the kept balls B_j with weights lambda(B_j) / sum_k lambda(B_k),
/// i.e. normalised Lebesgue measure on the disjoint union.
WeightedShapeMeasure build_nu(const LimsupFamily& family, std::span<const std::uint64_t> kept);
WeightedShapeMeasure build_nu(const LimsupFamily& family, const SelectedUnion& selected);

/// mu_n: the mass nu_n puts on B_j spread uniformly over U_j.
WeightedShapeMeasure build_mu(const LimsupFamily& family, std::span<const std::uint64_t> kept);
WeightedShapeMeasure build_mu(const LimsupFamily& family, const SelectedUnion& selected);

/// The objects of one stage n: truncation window, Vitali selection, nu_n
/// and mu_n.
struct TransferenceStage {
  SelectedUnion selected;
  WeightedShapeMeasure nu;
  WeightedShapeMeasure mu;
};

TransferenceStage build_transference(const LimsupFamily& family, std::uint64_t n,
                                     const TruncationOptions& options = {});

struct DensityProbeOptions {
  /// Probe radii below this are rejected.
  double radius_floor = 0.0;
  /// Samples per atom that straddles the probe boundary (d >= 2 or
  /// indicator atoms).
  std::uint64_t samples = 4096;
  std::uint64_t seed = 0;
};

struct DensityProbe {
  Ball ball;
  /// mu(ball) / lambda(ball).
  double ratio = 0.0;
  double std_error = 0.0;
  bool exact = true;
};

/// Ten times the largest ball radius in indices [n, m_n].
double default_probe_floor(const LimsupFamily& family, const TruncationWindow& window);

/// mu(ball) / lambda(ball). Atoms entirely inside or outside the probe are
/// counted directly; straddling atoms use exact arc overlap in d = 1 and
/// Monte Carlo otherwise.
DensityProbe density_probe(const WeightedShapeMeasure& mu, const Ball& ball, const DensityProbeOptions& options = {});

struct EnergyReportOptions {
  MeasureEnergyOptions energy{};
  /// Compute I_t(nu_n) and the quantities derived from it.
  bool include_nu = true;
};

/// Every term of the energy estimate for mu_n, next to the bound it is
/// compared with.
struct MuEnergyReport {
  double t = 0.0;
  double c = 0.0;
  double K = 0.0;
  int dim = 1;
  std::size_t atoms = 0;

  MeasureEnergy mu_energy;

  /// 4 * 5^{2d} * sum_j I_t(U_j) (lambda(B_j) / lambda(U_j))^2.
  double diagonal_bound = 0.0;
  /// Diagonal terms exceeding their individual bound.
  std::size_t diagonal_violations = 0;

  /// (1-c)^{-t}.
  double separation_factor = 1.0;
  /// sum_{j != k} (1-c)^{-t} |x_j - x_k|^{-t} w_j w_k.
  double off_diagonal_separation_bound = 0.0;
  bool off_diagonal_within_bound = false;

  /// max_j I_t(U_j) lambda(B_j) / lambda(U_j)^2 and whether it stays below K.
  double condition_max = 0.0;
  bool condition_holds = false;

  /// sum over kept j of lambda(B_j); below 1 for disjoint balls.
  double C_d = 0.0;

  MeasureEnergy nu_energy;
  double lebesgue_energy = 0.0;
  /// I_t(nu_n) <= 4 * 5^{2d} I_t(lambda).
  bool nu_within_lebesgue_bound = false;
  /// separation bound / off-diagonal part of I_t(nu_n).
  double C_td_empirical = 0.0;

  /// diagonal_bound + off_diagonal_separation_bound.
  double rhs_measured = 0.0;
  /// 4 * 5^{2d} C_d K + 4 * 5^{2d} C_td_empirical I_t(lambda).
  double rhs_final = 0.0;
  bool energy_within_measured = false;
  bool energy_within_final = false;
};

/// Throws InvalidArgument when some U_j is not inside B(x_j, c r_j); the
/// message suggests doubling the radii.
MuEnergyReport mu_energy_bound_report(const LimsupFamily& family, std::span<const std::uint64_t> kept, double t,
                                      double c, double K, const EnergyReportOptions& options = {});

/// Regression of I_t(mu_n) against log2(n) over all replicate values.
struct TrendTest {
  std::vector<double> n;
  std::vector<double> values;
  double slope = 0.0;
  double slope_std_error = 0.0;
  /// One-sided p-value for a positive slope.
  double p_value = 1.0;
  /// slope <= 0, or the positive slope is not significant at `alpha`.
  bool non_positive_growth = false;
  double alpha = 0.05;
};

TrendTest energy_trend(std::span<const double> n, std::span<const double> values, double alpha = 0.05);

}  // namespace mtp

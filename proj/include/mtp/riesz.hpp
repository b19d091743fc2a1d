#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mtp/shape.hpp"
#include "mtp/weighted_measure.hpp"

namespace mtp {

enum class EnergyMethod { closed_form, quadrature, monte_carlo };
std::string_view to_string(EnergyMethod m);

/// Estimate of a (possibly singular) double integral. std_error is zero
/// exactly when the method is closed_form.
struct RieszEstimate {
  double value = 0.0;
  double std_error = 0.0;
  EnergyMethod method = EnergyMethod::closed_form;
  std::uint64_t samples = 0;
  double t = 0.0;
};

/// pair: independent uniform point pairs, kernel averaged directly. Finite
/// variance only for t < d/2.
/// radial: first point uniform, second integrated along a random ray from it
/// (exactly for convex shapes, by hit counting with a rho^{d-1-t} radial law
/// for indicator shapes). Bounded estimator for every t < d.
enum class SamplingMode { pair, radial };
std::string_view to_string(SamplingMode m);

struct EnergyOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Distinguishes independent estimates drawn from one seed.
  std::uint64_t stream = 0;
  SamplingMode mode = SamplingMode::pair;
  unsigned workers = 1;
};

/// I_t of an interval of the given length: 2 L^{2-t} / ((1-t)(2-t)).
double interval_energy(double length, double t);

/// Interval energy restricted to pairs closer than `cutoff`.
double interval_energy_truncated(double length, double t, double cutoff);

/// I_t(U) = int_U int_U |x-y|^{-t} dx dy, for 0 < t < d.
RieszEstimate energy_set(const Shape& u, double t, const EnergyOptions& options = {});

/// J_t(U, V) = int_U int_V |x-y|^{-t} dx dy.
RieszEstimate energy_cross(const Shape& u, const Shape& v, double t, const EnergyOptions& options = {});

/// Energy of U restricted to pairs with |x-y|^{-s} > m, i.e. |x-y| < m^{-1/s};
/// requires 0 < t < s < d and m > 0.
RieszEstimate energy_truncated(const Shape& u, double t, double s, double m,
                               const EnergyOptions& options = {});

/// energy_truncated at several m from one shared set of samples, so the
/// results are exactly monotone in m.
std::vector<RieszEstimate> energy_truncated_sweep(const Shape& u, double t, double s,
                                                  std::span<const double> ms,
                                                  const EnergyOptions& options = {});

/// I_t of Lebesgue measure on T^d. Closed form for d = 1.
RieszEstimate lebesgue_energy(int dim, double t, const EnergyOptions& options = {});

struct MeasureEnergyOptions {
  EnergyOptions diagonal{};
  /// Pair samples for each off-diagonal atom pair.
  std::uint64_t cross_samples = 512;
};

/// I_t(mu) split the way the transference argument splits it: one diagonal
/// term per atom plus the sum over distinct atom pairs.
struct MeasureEnergy {
  RieszEstimate total;
  double diagonal = 0.0;
  double diagonal_std_error = 0.0;
  double off_diagonal = 0.0;
  double off_diagonal_std_error = 0.0;
  /// w_j^2 I_t(U_j) / lambda(U_j)^2 for each atom.
  std::vector<double> diagonal_terms;
  /// I_t(U_j) for each atom.
  std::vector<double> atom_energies;
};

MeasureEnergy energy_measure_terms(const WeightedShapeMeasure& mu, double t,
                                   const MeasureEnergyOptions& options = {});

/// I_t(mu) = sum_{j,k} w_j w_k J_t(U_j, U_k) / (lambda(U_j) lambda(U_k)).
RieszEstimate energy_measure(const WeightedShapeMeasure& mu, double t,
                             const MeasureEnergyOptions& options = {});

/// Semi-axes sorted non-increasing.
class SingularValueProfile {
 public:
  explicit SingularValueProfile(std::vector<double> semi_axes);
  /// Semi-axes of a ball, box (half-widths) or ellipsoid.
  static SingularValueProfile of(const Shape& s);

  std::span<const double> semi_axes() const { return axes_; }
  int dim() const { return static_cast<int>(axes_.size()); }

 private:
  std::vector<double> axes_;
};

/// phi^s = a_1 ... a_m a_{m+1}^{s-m} with m < s <= m+1, for 0 < s <= d.
double singular_value_fn(const SingularValueProfile& p, double s);
/// log phi^s, without underflow for tiny axes.
double log_singular_value_fn(const SingularValueProfile& p, double s);

/// lambda(U)^2 / I_t(U), a lower bound for the t-dimensional Hausdorff
/// content of U.
double content_lower_bound(const Shape& u, double t, const EnergyOptions& options = {});

/// Geometry samples of one shape, stored so the mean kernel
/// I_t(U)/lambda(U)^2 can be re-evaluated at any t on the same draws.
/// Intervals use the closed form; other closed-form shapes store radial exit
/// distances; indicator shapes store pair distances.
class KernelSampleCache {
 public:
  static KernelSampleCache build(const Shape& u, std::uint64_t samples, std::uint64_t seed,
                                 std::uint64_t stream);

  /// I_t(U) / lambda(U)^2 with its standard error.
  RieszEstimate mean_kernel(double t) const;
  /// Same, restricted to pairs closer than `cutoff`.
  RieszEstimate mean_kernel_truncated(double t, double cutoff) const;

  int dim() const { return dim_; }
  double shape_measure() const { return measure_; }
  std::size_t size() const { return values_.size(); }

 private:
  enum class Kind { interval, radial, pair };
  Kind kind_ = Kind::interval;
  int dim_ = 1;
  double measure_ = 0.0;
  double length_ = 0.0;
  std::vector<double> values_;
};

}  // namespace mtp

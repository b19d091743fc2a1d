#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtp/shape.hpp"

namespace mtp {

/// One (B_j, U_j) pair of a limsup family.
struct BallSeqEntry {
  std::uint64_t index = 0;
  Ball ball;
  Shape subset;
};

/// Descriptive facts a generator declares about its sequence.
struct FamilyTraits {
  std::string kind;
  int dim = 1;
  /// Number of entries; nullopt for unbounded generators.
  std::optional<std::uint64_t> size;
  bool radii_nonincreasing = false;
  /// Some c < 1 with U_j inside B(x_j, c r_j) for every j, when known.
  std::optional<double> separation;
  /// Generator parameters, echoed into reports.
  std::vector<std::pair<std::string, double>> params;
  /// Approximation exponents of a Diophantine family (empty otherwise).
  std::vector<double> tau;
};

/// An indexed generator j -> (B_j, U_j), j = 1, 2, ...  Entries are computed
/// on demand and depend only on j, so any subset of indices can be visited
/// in any order or concurrently.
class LimsupFamily {
 public:
  using Generator = std::function<BallSeqEntry(std::uint64_t)>;

  LimsupFamily(FamilyTraits traits, Generator generator);

  /// Throws InvalidArgument when j is 0 or past the end of a finite family.
  BallSeqEntry entry(std::uint64_t j) const;

  const FamilyTraits& traits() const { return traits_; }
  int dim() const { return traits_.dim; }
  const std::string& kind() const { return traits_.kind; }
  std::optional<std::uint64_t> size() const { return traits_.size; }
  /// Largest index that may be requested, `wanted` capped by the size.
  std::uint64_t clamp_index(std::uint64_t wanted) const;

 private:
  FamilyTraits traits_;
  Generator gen_;
};

/// Radius law of the random families: lambda(B_j) = 1 / (j + offset), so
/// sum lambda(B_j) diverges and uniformly random centres cover almost every
/// point infinitely often.
struct RandomLaw {
  /// 0 selects the smallest offset keeping every radius below 1/20.
  std::uint64_t offset = 0;
  std::uint64_t seed = 0;
};

std::uint64_t default_random_offset(int dim);
double random_law_radius(int dim, std::uint64_t j, std::uint64_t offset);
/// Uniform centre of entry j, drawn from its own stream.
TorusPoint random_center(int dim, std::uint64_t j, std::uint64_t seed);

/// U_j = B_j.
LimsupFamily make_random_balls(int dim, const RandomLaw& law = {});

/// U_j = B(x_j, r_j^{d/sigma}), 0 < sigma <= d.
LimsupFamily make_shrunken_balls(int dim, double sigma, const RandomLaw& law = {});

/// U_j = B(x_j, rho_j) with log(1/rho_j) = log(1/r_j)^power: lambda(U_j)
/// decays faster than every power of r_j. power > 1.
LimsupFamily make_rapidly_shrinking_balls(int dim, double power, const RandomLaw& law = {});

/// U_j is an axis-aligned ellipsoid or box centred at x_j with semi-axes
/// scale * r_j^{exponents[i]}. Exponents must be >= 1 and scale in (0, 1].
LimsupFamily make_affine_family(int dim, ShapeKind kind, std::span<const double> exponents, double scale,
                                const RandomLaw& law = {});

/// Finite family from explicit pairs (indexed from 1). Each subset must lie
/// inside its ball; indicator subsets are checked by sampling.
LimsupFamily make_custom_family(std::vector<std::pair<Ball, Shape>> entries, bool radii_nonincreasing = false);

/// Same subsets, every ball radius doubled. Restores a separation constant
/// c <= 1/2 for families whose subsets touch the ball boundary.
LimsupFamily with_doubled_radii(const LimsupFamily& family);

struct DiophantineOptions {
  /// Enclosing radius is ball_scale * q^{-(1+1/d)}; 0 selects sqrt(d).
  double ball_scale = 0.0;
  /// First denominator; 0 selects the smallest q whose boxes and balls fit
  /// the torus bounding-radius cap.
  std::uint64_t q_min = 0;
};

/// Geometry of one W(tau) box, without the bounding-radius cap applied.
struct DiophantineBox {
  std::uint64_t q = 0;
  std::vector<std::uint64_t> p;
  std::vector<double> center;
  std::vector<double> half_widths;
  double ball_radius = 0.0;
};

/// All q^d boxes of denominator q, p in lexicographic order.
std::vector<DiophantineBox> diophantine_boxes(int dim, std::span<const double> tau, std::uint64_t q,
                                              double ball_scale = 0.0);

/// W(tau) family: entries enumerate q = q_min..q_max and p in {0..q-1}^d;
/// U = box centred at p/q with half-widths q^{-(1+tau_i)}, B = ball of
/// radius ball_scale * q^{-(1+1/d)} around it. tau must be sorted ascending
/// with tau_1 >= 1/d.
LimsupFamily make_diophantine(int dim, std::span<const double> tau, std::uint64_t q_max,
                              const DiophantineOptions& options = {});

/// First and last family index with denominator in [q_lo, q_hi], clipped to
/// the family's denominators. nullopt when the range is empty.
std::optional<std::pair<std::uint64_t, std::uint64_t>> diophantine_index_range(const LimsupFamily& family,
                                                                              std::uint64_t q_lo,
                                                                              std::uint64_t q_hi);

/// Denominator range [q_min, q_max] of a Diophantine family.
std::pair<std::uint64_t, std::uint64_t> diophantine_q_range(const LimsupFamily& family);

/// Samples of each subset that fall outside the entry's ball (closure, with
/// relative slack 1e-9). Zero for a valid entry.
std::uint64_t count_containment_violations(const BallSeqEntry& e, std::uint64_t samples, std::uint64_t seed);

}  // namespace mtp

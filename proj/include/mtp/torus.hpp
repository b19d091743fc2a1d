#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace mtp {

/// Largest torus dimension supported by the fixed-capacity point type.
inline constexpr int kMaxDim = 8;

/// Coordinates relative to some origin, not wrapped. Used for displacements
/// and for shape-local geometry.
using LocalVec = std::array<double, kMaxDim>;

/// A point of T^d = R^d / Z^d. Coordinates are always reduced into [0, 1).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::span<const double> coords);
  TorusPoint(std::initializer_list<double> coords);

  /// Builds a point from already-reduced coordinates without checking them.
  static TorusPoint from_wrapped(const LocalVec& coords, int dim);

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  /// This point translated by `v` and reduced mod 1.
  TorusPoint shifted(const LocalVec& v) const;

  friend bool operator==(const TorusPoint& a, const TorusPoint& b);

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

/// Reduces x into [0, 1).
double wrap_unit(double x);

/// Minimal-image displacement `to - from`, each component in [-1/2, 1/2].
LocalVec min_image(const TorusPoint& from, const TorusPoint& to);

/// Euclidean distance realised by the nearest integer translate. Throws
/// InvalidArgument on dimension mismatch.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

/// Squared distance without the dimension check, for inner loops where the
/// caller guarantees matching dimensions.
double torus_distance_sq_unchecked(const TorusPoint& a, const TorusPoint& b);

double norm(const LocalVec& v, int dim);
double dot(const LocalVec& a, const LocalVec& b, int dim);

}  // namespace mtp

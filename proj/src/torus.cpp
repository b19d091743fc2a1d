#include "mtp/torus.hpp"

#include <cmath>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

double wrap_unit(double x) {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint::TorusPoint(std::span<const double> coords) {
  if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InvalidArgument("torus point dimension must be in [1, " + std::to_string(kMaxDim) +
                          "], got " + std::to_string(coords.size()));
  }
  dim_ = static_cast<int>(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) throw InvalidArgument("torus point coordinate is not finite");
    c_[i] = wrap_unit(coords[i]);
  }
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}

TorusPoint TorusPoint::from_wrapped(const LocalVec& coords, int dim) {
  TorusPoint p;
  p.dim_ = dim;
  p.c_ = coords;
  return p;
}

TorusPoint TorusPoint::shifted(const LocalVec& v) const {
  TorusPoint p = *this;
  for (int i = 0; i < dim_; ++i) p.c_[i] = wrap_unit(c_[i] + v[i]);
  return p;
}

bool operator==(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim_ != b.dim_) return false;
  for (int i = 0; i < a.dim_; ++i) {
    if (a.c_[i] != b.c_[i]) return false;
  }
  return true;
}

LocalVec min_image(const TorusPoint& from, const TorusPoint& to) {
  if (from.dim() != to.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(from.dim()) + " vs " +
                          std::to_string(to.dim()));
  }
  LocalVec v{};
  for (int i = 0; i < from.dim(); ++i) {
    double u = to[i] - from[i];
    u -= std::nearbyint(u);
    v[i] = u;
  }
  return v;
}

double torus_distance_sq_unchecked(const TorusPoint& a, const TorusPoint& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double u = std::fabs(a[i] - b[i]);
    if (u > 0.5) u = 1.0 - u;
    s += u * u;
  }
  return s;
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
  return std::sqrt(torus_distance_sq_unchecked(a, b));
}

double norm(const LocalVec& v, int dim) { return std::sqrt(dot(v, v, dim)); }

double dot(const LocalVec& a, const LocalVec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mtp

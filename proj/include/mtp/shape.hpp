#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "mtp/random.hpp"
#include "mtp/torus.hpp"

namespace mtp {

/// Every shape's bounding ball must be strictly smaller than this, so that
/// the minimal-image metric is unambiguous on any shape.
inline constexpr double kMaxBoundingRadius = 0.25;

enum class ShapeKind { ball, box, ellipsoid, indicator };

std::string_view to_string(ShapeKind kind);

struct Ball {
  TorusPoint center;
  double radius = 0.0;
};

/// Axis-aligned open box.
struct Box {
  TorusPoint center;
  LocalVec half_widths{};
};

/// Axis-aligned open ellipsoid; semi_axes[i] is the half-length along axis i.
struct Ellipsoid {
  TorusPoint center;
  LocalVec semi_axes{};
};

/// Open set given by a membership predicate, restricted to its bounding ball.
struct Indicator {
  Ball bounding;
  std::shared_ptr<const std::function<bool(const TorusPoint&)>> membership;
  double measure = 0.0;
  double measure_std_error = 0.0;
  bool measure_from_hint = false;
};

struct MeasureOptions {
  std::uint64_t samples = 200'000;
  std::uint64_t seed = 0;
};

/// A measurable open subset of T^d. Immutable; cheap to copy.
class Shape {
 public:
  static Shape ball(const TorusPoint& center, double radius);
  static Shape ball(const Ball& b) { return ball(b.center, b.radius); }
  static Shape box(const TorusPoint& center, std::span<const double> half_widths);
  static Shape ellipsoid(const TorusPoint& center, std::span<const double> semi_axes);
  /// Without a hint the Lebesgue measure is estimated once, here, by hit
  /// counting over the bounding ball. Throws EstimatorFailure when no sample
  /// hits the set.
  static Shape indicator(const Ball& bounding, std::function<bool(const TorusPoint&)> membership,
                         std::optional<double> measure_hint = std::nullopt,
                         const MeasureOptions& options = {});

  ShapeKind kind() const;
  int dim() const { return center().dim(); }
  const TorusPoint& center() const;
  Ball bounding_ball() const;

  /// Ball, box or ellipsoid: convex with closed-form geometry.
  bool is_closed_form() const { return kind() != ShapeKind::indicator; }
  /// A closed-form shape in d = 1, i.e. an open arc.
  bool is_interval() const { return is_closed_form() && dim() == 1; }

  /// Per-axis half extents (radius repeated for balls). Closed-form shapes only.
  LocalVec half_extents() const;

  bool contains(const TorusPoint& p) const;
  /// Membership of center + offset; offset is a local (unwrapped) vector.
  bool contains_offset(const LocalVec& offset) const;

  const std::variant<Ball, Box, Ellipsoid, Indicator>& variant() const { return v_; }

 private:
  explicit Shape(std::variant<Ball, Box, Ellipsoid, Indicator> v) : v_(std::move(v)) {}
  std::variant<Ball, Box, Ellipsoid, Indicator> v_;
};

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
};

/// Lebesgue measure: closed form for ball, box, ellipsoid; the construction
/// time estimate (or hint) for indicator shapes.
MeasureEstimate measure(const Shape& s);

struct Diameter {
  double value = 0.0;
  bool upper_bound_only = false;
};

/// Exact diameter for closed-form shapes; bounding-ball diameter, flagged as
/// an upper bound, for indicator shapes.
Diameter diameter(const Shape& s);

double unit_ball_volume(int dim);
/// Surface area of S^{d-1}; equals 2 for d = 1.
double unit_sphere_area(int dim);

/// Throws InvalidArgument unless `inner` lies in the closure of `outer`
/// (checked through inner's bounding ball, with a relative slack of 1e-9).
void require_inside(const Shape& inner, const Ball& outer, std::string_view what);
bool bounding_inside(const Shape& inner, const Ball& outer, double slack_factor = 1.0);

/// Uniform sampling from a shape. Inverse transform for closed forms,
/// rejection from the bounding ball for indicators.
class ShapeSampler {
 public:
  explicit ShapeSampler(const Shape& shape);

  /// Offset from shape.center() of a uniform point of the shape.
  LocalVec offset(Rng& rng);
  TorusPoint point(Rng& rng) { return shape_->center().shifted(offset(rng)); }

  /// Rejection statistics; both zero for closed-form shapes.
  std::uint64_t attempts() const { return attempts_; }
  std::uint64_t accepted() const { return accepted_; }

 private:
  const Shape* shape_;
  std::uint64_t attempts_ = 0;
  std::uint64_t accepted_ = 0;
};

/// Distance from center + offset to the boundary along unit direction `dir`.
/// Closed-form (convex) shapes only; offset must lie inside the shape.
double exit_distance(const Shape& s, const LocalVec& offset, const LocalVec& dir);

}  // namespace mtp

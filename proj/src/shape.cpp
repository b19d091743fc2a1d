#include "mtp/shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

namespace {

constexpr std::uint64_t kRejectionWarmup = 10'000;
constexpr double kMinRejectionRate = 1e-3;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_center(const TorusPoint& c) {
  if (c.dim() < 1) throw InvalidArgument("shape center has no coordinates");
}

void check_bounding_radius(double r, std::string_view what) {
  if (!(r < kMaxBoundingRadius)) {
    throw InvalidArgument(std::string(what) + " bounding radius " + std::to_string(r) +
                          " must be < 1/4 on the torus");
  }
}

LocalVec copy_positive(std::span<const double> xs, int dim, std::string_view what) {
  if (static_cast<int>(xs.size()) != dim) {
    throw InvalidArgument(std::string(what) + " needs " + std::to_string(dim) + " values, got " +
                          std::to_string(xs.size()));
  }
  LocalVec v{};
  for (int i = 0; i < dim; ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) {
      throw InvalidArgument(std::string(what) + " must be positive and finite");
    }
    v[i] = xs[i];
  }
  return v;
}

double integer_power(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::ball: return "ball";
    case ShapeKind::box: return "box";
    case ShapeKind::ellipsoid: return "ellipsoid";
    case ShapeKind::indicator: return "indicator";
  }
  return "unknown";
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

double unit_sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

Shape Shape::ball(const TorusPoint& center, double radius) {
  check_center(center);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
  check_bounding_radius(radius, "ball");
  return Shape(Ball{center, radius});
}

Shape Shape::box(const TorusPoint& center, std::span<const double> half_widths) {
  check_center(center);
  Box b{center, copy_positive(half_widths, center.dim(), "box half-widths")};
  check_bounding_radius(norm(b.half_widths, center.dim()), "box");
  return Shape(b);
}

Shape Shape::ellipsoid(const TorusPoint& center, std::span<const double> semi_axes) {
  check_center(center);
  Ellipsoid e{center, copy_positive(semi_axes, center.dim(), "ellipsoid semi-axes")};
  check_bounding_radius(*std::max_element(e.semi_axes.begin(), e.semi_axes.begin() + center.dim()),
                        "ellipsoid");
  return Shape(e);
}

Shape Shape::indicator(const Ball& bounding, std::function<bool(const TorusPoint&)> membership,
                       std::optional<double> measure_hint, const MeasureOptions& options) {
  check_center(bounding.center);
  if (!(bounding.radius > 0.0)) throw InvalidArgument("indicator bounding radius must be positive");
  check_bounding_radius(bounding.radius, "indicator");
  if (!membership) throw InvalidArgument("indicator shape needs a membership predicate");
  Indicator ind;
  ind.bounding = bounding;
  ind.membership = std::make_shared<const std::function<bool(const TorusPoint&)>>(std::move(membership));
  const int d = bounding.center.dim();
  const double ball_volume = unit_ball_volume(d) * integer_power(bounding.radius, d);
  if (measure_hint) {
    if (!(*measure_hint > 0.0) || *measure_hint > ball_volume * (1.0 + 1e-12)) {
      throw InvalidArgument("indicator measure hint must lie in (0, volume of bounding ball]");
    }
    ind.measure = *measure_hint;
    ind.measure_from_hint = true;
  } else {
    if (options.samples == 0) throw InvalidArgument("indicator measure needs a positive sample budget");
    Rng rng = make_stream(options.seed, {0x6d656173ULL});
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      LocalVec u = random_in_unit_ball(rng, d);
      for (int k = 0; k < d; ++k) u[k] *= bounding.radius;
      if ((*ind.membership)(bounding.center.shifted(u))) ++hits;
    }
    if (hits == 0) {
      throw EstimatorFailure("indicator shape has zero estimated measure after " +
                             std::to_string(options.samples) + " samples");
    }
    const double p = static_cast<double>(hits) / static_cast<double>(options.samples);
    ind.measure = p * ball_volume;
    ind.measure_std_error = ball_volume * std::sqrt(p * (1.0 - p) / static_cast<double>(options.samples));
  }
  return Shape(std::move(ind));
}

ShapeKind Shape::kind() const {
  return std::visit(Overloaded{[](const Ball&) { return ShapeKind::ball; },
                               [](const Box&) { return ShapeKind::box; },
                               [](const Ellipsoid&) { return ShapeKind::ellipsoid; },
                               [](const Indicator&) { return ShapeKind::indicator; }},
                    v_);
}

const TorusPoint& Shape::center() const {
  return std::visit(Overloaded{[](const Ball& b) -> const TorusPoint& { return b.center; },
                               [](const Box& b) -> const TorusPoint& { return b.center; },
                               [](const Ellipsoid& e) -> const TorusPoint& { return e.center; },
                               [](const Indicator& i) -> const TorusPoint& { return i.bounding.center; }},
                    v_);
}

Ball Shape::bounding_ball() const {
  const int d = dim();
  return std::visit(
      Overloaded{[](const Ball& b) { return b; },
                 [d](const Box& b) { return Ball{b.center, norm(b.half_widths, d)}; },
                 [d](const Ellipsoid& e) {
                   return Ball{e.center, *std::max_element(e.semi_axes.begin(), e.semi_axes.begin() + d)};
                 },
                 [](const Indicator& i) { return i.bounding; }},
      v_);
}

LocalVec Shape::half_extents() const {
  const int d = dim();
  return std::visit(Overloaded{[d](const Ball& b) {
                                 LocalVec v{};
                                 for (int i = 0; i < d; ++i) v[i] = b.radius;
                                 return v;
                               },
                               [](const Box& b) { return b.half_widths; },
                               [](const Ellipsoid& e) { return e.semi_axes; },
                               [](const Indicator&) -> LocalVec {
                                 throw InvalidArgument("indicator shapes have no closed-form extents");
                               }},
                    v_);
}

bool Shape::contains_offset(const LocalVec& o) const {
  const int d = dim();
  return std::visit(Overloaded{[&](const Ball& b) { return dot(o, o, d) < b.radius * b.radius; },
                               [&](const Box& b) {
                                 for (int i = 0; i < d; ++i) {
                                   if (!(std::fabs(o[i]) < b.half_widths[i])) return false;
                                 }
                                 return true;
                               },
                               [&](const Ellipsoid& e) {
                                 double s = 0.0;
                                 for (int i = 0; i < d; ++i) {
                                   const double q = o[i] / e.semi_axes[i];
                                   s += q * q;
                                 }
                                 return s < 1.0;
                               },
                               [&](const Indicator& ind) {
                                 if (!(dot(o, o, d) < ind.bounding.radius * ind.bounding.radius)) return false;
                                 return (*ind.membership)(ind.bounding.center.shifted(o));
                               }},
                    v_);
}

bool Shape::contains(const TorusPoint& p) const { return contains_offset(min_image(center(), p)); }

MeasureEstimate measure(const Shape& s) {
  const int d = s.dim();
  return std::visit(Overloaded{[d](const Ball& b) {
                                 return MeasureEstimate{unit_ball_volume(d) * integer_power(b.radius, d), 0.0, true};
                               },
                               [d](const Box& b) {
                                 double v = 1.0;
                                 for (int i = 0; i < d; ++i) v *= 2.0 * b.half_widths[i];
                                 return MeasureEstimate{v, 0.0, true};
                               },
                               [d](const Ellipsoid& e) {
                                 double v = unit_ball_volume(d);
                                 for (int i = 0; i < d; ++i) v *= e.semi_axes[i];
                                 return MeasureEstimate{v, 0.0, true};
                               },
                               [](const Indicator& i) {
                                 return MeasureEstimate{i.measure, i.measure_std_error, i.measure_from_hint};
                               }},
                    s.variant());
}

Diameter diameter(const Shape& s) {
  // For a box the bounding radius is the half-diagonal, so this is exact too.
  return {2.0 * s.bounding_ball().radius, s.kind() == ShapeKind::indicator};
}

bool bounding_inside(const Shape& inner, const Ball& outer, double slack_factor) {
  const Ball b = inner.bounding_ball();
  const double reach = torus_distance(b.center, outer.center) + b.radius;
  return reach <= slack_factor * outer.radius * (1.0 + 1e-9);
}

void require_inside(const Shape& inner, const Ball& outer, std::string_view what) {
  if (!bounding_inside(inner, outer)) {
    throw InvalidArgument(std::string(what) + ": subset is not contained in its ball");
  }
}

ShapeSampler::ShapeSampler(const Shape& shape) : shape_(&shape) {}

LocalVec ShapeSampler::offset(Rng& rng) {
  const int d = shape_->dim();
  switch (shape_->kind()) {
    case ShapeKind::ball: {
      const double r = std::get<Ball>(shape_->variant()).radius;
      LocalVec u = random_in_unit_ball(rng, d);
      for (int i = 0; i < d; ++i) u[i] *= r;
      return u;
    }
    case ShapeKind::box: {
      const auto& h = std::get<Box>(shape_->variant()).half_widths;
      LocalVec u{};
      for (int i = 0; i < d; ++i) u[i] = (2.0 * uniform01(rng) - 1.0) * h[i];
      return u;
    }
    case ShapeKind::ellipsoid: {
      const auto& a = std::get<Ellipsoid>(shape_->variant()).semi_axes;
      LocalVec u = random_in_unit_ball(rng, d);
      for (int i = 0; i < d; ++i) u[i] *= a[i];
      return u;
    }
    case ShapeKind::indicator: {
      const auto& ind = std::get<Indicator>(shape_->variant());
      for (;;) {
        ++attempts_;
        LocalVec u = random_in_unit_ball(rng, d);
        for (int i = 0; i < d; ++i) u[i] *= ind.bounding.radius;
        if ((*ind.membership)(ind.bounding.center.shifted(u))) {
          ++accepted_;
          return u;
        }
        if (attempts_ >= kRejectionWarmup &&
            static_cast<double>(accepted_) < kMinRejectionRate * static_cast<double>(attempts_)) {
          throw EstimatorFailure("rejection sampling efficiency fell below 1e-3 for an indicator shape");
        }
      }
    }
  }
  throw InvalidArgument("unknown shape kind");
}

double exit_distance(const Shape& s, const LocalVec& p, const LocalVec& w) {
  const int d = s.dim();
  switch (s.kind()) {
    case ShapeKind::ball: {
      const double r = std::get<Ball>(s.variant()).radius;
      const double b = dot(p, w, d);
      const double c = dot(p, p, d) - r * r;
      return std::max(0.0, -b + std::sqrt(std::max(0.0, b * b - c)));
    }
    case ShapeKind::ellipsoid: {
      const auto& a = std::get<Ellipsoid>(s.variant()).semi_axes;
      double qa = 0.0, qb = 0.0, qc = -1.0;
      for (int i = 0; i < d; ++i) {
        const double inv2 = 1.0 / (a[i] * a[i]);
        qa += w[i] * w[i] * inv2;
        qb += p[i] * w[i] * inv2;
        qc += p[i] * p[i] * inv2;
      }
      return std::max(0.0, (-qb + std::sqrt(std::max(0.0, qb * qb - qa * qc))) / qa);
    }
    case ShapeKind::box: {
      const auto& h = std::get<Box>(s.variant()).half_widths;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < d; ++i) {
        if (w[i] > 0.0) best = std::min(best, (h[i] - p[i]) / w[i]);
        else if (w[i] < 0.0) best = std::min(best, (-h[i] - p[i]) / w[i]);
      }
      return std::max(0.0, best);
    }
    case ShapeKind::indicator: break;
  }
  throw InvalidArgument("exit distance needs a closed-form shape");
}

}  // namespace mtp

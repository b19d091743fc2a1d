#include "mtp/family.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

namespace {

constexpr double kVitaliRadius = 1.0 / 20.0;

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw InvalidArgument("dimension must be in 1.." + std::to_string(kMaxDim) + ", got " + std::to_string(dim));
  }
}

std::uint64_t resolve_offset(int dim, const RandomLaw& law) {
  return law.offset == 0 ? default_random_offset(dim) : law.offset;
}

double param(const FamilyTraits& t, std::string_view name) {
  for (const auto& [k, v] : t.params) {
    if (k == name) return v;
  }
  throw InvalidArgument("family '" + t.kind + "' has no parameter " + std::string(name));
}

std::uint64_t int_pow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void check_tau(int dim, std::span<const double> tau) {
  check_dim(dim);
  if (static_cast<int>(tau.size()) != dim) {
    throw InvalidArgument("tau needs " + std::to_string(dim) + " entries, got " + std::to_string(tau.size()));
  }
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!std::isfinite(tau[i])) throw InvalidArgument("tau entries must be finite");
    if (tau[i] < 1.0 / dim - 1e-12) {
      throw InvalidArgument("tau_" + std::to_string(i + 1) + " = " + std::to_string(tau[i]) + " is below 1/d");
    }
    if (i > 0 && tau[i] < tau[i - 1]) throw InvalidArgument("tau must be sorted ascending");
  }
}

double resolve_ball_scale(int dim, double scale) {
  if (scale == 0.0) return std::sqrt(static_cast<double>(dim));
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("ball_scale must be positive");
  return scale;
}

double box_corner(int dim, std::span<const double> tau, std::uint64_t q) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) acc += std::pow(static_cast<double>(q), -2.0 * (1.0 + tau[i]));
  return std::sqrt(acc);
}

double dioph_ball_radius(int dim, double scale, std::uint64_t q) {
  return scale * std::pow(static_cast<double>(q), -(1.0 + 1.0 / dim));
}

}  // namespace

LimsupFamily::LimsupFamily(FamilyTraits traits, Generator generator)
    : traits_(std::move(traits)), gen_(std::move(generator)) {
  check_dim(traits_.dim);
  if (!gen_) throw InvalidArgument("limsup family needs a generator");
  if (traits_.size && *traits_.size == 0) throw InvalidArgument("limsup family is empty");
}

BallSeqEntry LimsupFamily::entry(std::uint64_t j) const {
  if (j == 0) throw InvalidArgument("family indices start at 1");
  if (traits_.size && j > *traits_.size) {
    throw InvalidArgument("index " + std::to_string(j) + " is past the end of family '" + traits_.kind +
                          "' (size " + std::to_string(*traits_.size) + ")");
  }
  return gen_(j);
}

std::uint64_t LimsupFamily::clamp_index(std::uint64_t wanted) const {
  return traits_.size ? std::min(wanted, *traits_.size) : wanted;
}

std::uint64_t default_random_offset(int dim) {
  check_dim(dim);
  const double need = std::pow(1.0 / kVitaliRadius, dim) / unit_ball_volume(dim);
  return std::max<std::uint64_t>(50, static_cast<std::uint64_t>(std::ceil(need)) + 3);
}

double random_law_radius(int dim, std::uint64_t j, std::uint64_t offset) {
  const double vol = 1.0 / static_cast<double>(j + offset);
  return std::pow(vol / unit_ball_volume(dim), 1.0 / dim);
}

TorusPoint random_center(int dim, std::uint64_t j, std::uint64_t seed) {
  Rng rng = make_stream(seed, {0x46414d, j});
  LocalVec c{};
  for (int i = 0; i < dim; ++i) c[i] = uniform01(rng);
  return TorusPoint::from_wrapped(c, dim);
}

namespace {

template <class SubsetFn>
LimsupFamily random_family(int dim, const RandomLaw& law, FamilyTraits traits, SubsetFn subset) {
  check_dim(dim);
  const std::uint64_t offset = resolve_offset(dim, law);
  if (!(random_law_radius(dim, 1, offset) < kMaxBoundingRadius)) {
    throw InvalidArgument("random-law offset " + std::to_string(offset) + " gives radii >= 1/4");
  }
  traits.dim = dim;
  traits.radii_nonincreasing = true;
  traits.params.insert(traits.params.begin(), {{"offset", static_cast<double>(offset)},
                                               {"seed", static_cast<double>(law.seed)}});
  const std::uint64_t seed = law.seed;
  return LimsupFamily(std::move(traits), [dim, offset, seed, subset](std::uint64_t j) {
    const double r = random_law_radius(dim, j, offset);
    const TorusPoint x = random_center(dim, j, seed);
    return BallSeqEntry{j, Ball{x, r}, subset(x, r)};
  });
}

}  // namespace

LimsupFamily make_random_balls(int dim, const RandomLaw& law) {
  FamilyTraits t;
  t.kind = "random_balls";
  return random_family(dim, law, std::move(t), [](const TorusPoint& x, double r) { return Shape::ball(x, r); });
}

LimsupFamily make_shrunken_balls(int dim, double sigma, const RandomLaw& law) {
  check_dim(dim);
  if (!(sigma > 0.0) || sigma > dim) throw InvalidArgument("sigma must lie in (0, d]");
  FamilyTraits t;
  t.kind = "shrunken_balls";
  t.params = {{"sigma", sigma}};
  const double power = dim / sigma;
  if (power > 1.0) {
    const double r1 = random_law_radius(dim, 1, resolve_offset(dim, law));
    t.separation = std::pow(r1, power - 1.0);
  }
  return random_family(dim, law, std::move(t), [power](const TorusPoint& x, double r) {
    return Shape::ball(x, std::pow(r, power));
  });
}

LimsupFamily make_rapidly_shrinking_balls(int dim, double power, const RandomLaw& law) {
  if (!(power > 1.0)) throw InvalidArgument("power must exceed 1");
  check_dim(dim);
  FamilyTraits t;
  t.kind = "rapidly_shrinking_balls";
  t.params = {{"power", power}};
  // Finite in floating point: stop at the last j with rho^d a normal double.
  const double log_r_min = -std::pow(700.0 / dim, 1.0 / power);
  const double j_last =
      std::exp(-dim * log_r_min) / unit_ball_volume(dim) - static_cast<double>(resolve_offset(dim, law));
  if (j_last < 1.0) throw InvalidArgument("power too large: the first subset radius underflows");
  if (j_last < 1e18) t.size = static_cast<std::uint64_t>(j_last);
  return random_family(dim, law, std::move(t), [power](const TorusPoint& x, double r) {
    const double rho = std::exp(-std::pow(std::log(1.0 / r), power));
    if (!(rho > 0.0)) throw InvalidArgument("subset radius underflows; use a smaller index window");
    return Shape::ball(x, rho);
  });
}

LimsupFamily make_affine_family(int dim, ShapeKind kind, std::span<const double> exponents, double scale,
                                const RandomLaw& law) {
  check_dim(dim);
  if (kind != ShapeKind::ellipsoid && kind != ShapeKind::box) {
    throw InvalidArgument("affine families use ellipsoids or boxes");
  }
  if (static_cast<int>(exponents.size()) != dim) throw InvalidArgument("one exponent per axis is required");
  for (double a : exponents) {
    if (!(a >= 1.0) || !std::isfinite(a)) throw InvalidArgument("affine exponents must be >= 1");
  }
  if (!(scale > 0.0) || scale > 1.0) throw InvalidArgument("affine scale must lie in (0, 1]");
  if (kind == ShapeKind::box && scale * std::sqrt(static_cast<double>(dim)) > 1.0) {
    throw InvalidArgument("box scale must be at most 1/sqrt(d) to fit inside the ball");
  }
  FamilyTraits t;
  t.kind = kind == ShapeKind::box ? "affine_boxes" : "affine_ellipsoids";
  t.params = {{"scale", scale}};
  for (int i = 0; i < dim; ++i) t.params.emplace_back("a" + std::to_string(i + 1), exponents[i]);
  const double reach = kind == ShapeKind::box ? scale * std::sqrt(static_cast<double>(dim)) : scale;
  if (reach < 1.0) t.separation = reach;
  LocalVec a{};
  std::copy(exponents.begin(), exponents.end(), a.begin());
  return random_family(dim, law, std::move(t), [dim, kind, a, scale](const TorusPoint& x, double r) {
    std::vector<double> axes(dim);
    for (int i = 0; i < dim; ++i) axes[i] = scale * std::pow(r, a[i]);
    return kind == ShapeKind::box ? Shape::box(x, axes) : Shape::ellipsoid(x, axes);
  });
}

LimsupFamily make_custom_family(std::vector<std::pair<Ball, Shape>> entries, bool radii_nonincreasing) {
  if (entries.empty()) throw InvalidArgument("custom family needs at least one entry");
  const int dim = entries.front().first.center.dim();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& [ball, subset] = entries[k];
    if (ball.center.dim() != dim || subset.dim() != dim) {
      throw InvalidArgument("custom family entry " + std::to_string(k + 1) + " has a different dimension");
    }
    Shape::ball(ball);  // validates the radius
    const std::string what = "subset of custom entry " + std::to_string(k + 1);
    if (subset.is_closed_form()) {
      require_inside(subset, ball, what);
    } else {
      const BallSeqEntry e{k + 1, ball, subset};
      if (count_containment_violations(e, 1000, k) != 0) {
        throw InvalidArgument(what + " has sampled points outside its ball");
      }
    }
    if (radii_nonincreasing && k > 0 && ball.radius > entries[k - 1].first.radius) {
      throw InvalidArgument("custom family declared non-increasing radii but entry " + std::to_string(k + 1) +
                            " grows");
    }
  }
  FamilyTraits t;
  t.kind = "custom";
  t.dim = dim;
  t.size = entries.size();
  t.radii_nonincreasing = radii_nonincreasing;
  auto shared = std::make_shared<const std::vector<std::pair<Ball, Shape>>>(std::move(entries));
  return LimsupFamily(std::move(t), [shared](std::uint64_t j) {
    const auto& [b, u] = (*shared)[j - 1];
    return BallSeqEntry{j, b, u};
  });
}

LimsupFamily with_doubled_radii(const LimsupFamily& family) {
  FamilyTraits t = family.traits();
  t.kind += "+doubled";
  if (t.separation) {
    t.separation = *t.separation / 2.0;
  } else {
    t.separation = 0.5;
  }
  return LimsupFamily(std::move(t), [family](std::uint64_t j) {
    BallSeqEntry e = family.entry(j);
    e.ball.radius *= 2.0;
    if (!(e.ball.radius < kMaxBoundingRadius)) {
      throw InvalidArgument("doubled radius of entry " + std::to_string(j) + " reaches 1/4");
    }
    return e;
  });
}

std::vector<DiophantineBox> diophantine_boxes(int dim, std::span<const double> tau, std::uint64_t q,
                                              double ball_scale) {
  check_tau(dim, tau);
  if (q == 0) throw InvalidArgument("denominator q must be positive");
  const double scale = resolve_ball_scale(dim, ball_scale);
  const std::uint64_t count = int_pow(q, dim);
  std::vector<double> hw(dim);
  for (int i = 0; i < dim; ++i) hw[i] = std::pow(static_cast<double>(q), -(1.0 + tau[i]));
  const double br = dioph_ball_radius(dim, scale, q);
  std::vector<DiophantineBox> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    DiophantineBox b;
    b.q = q;
    b.p.resize(dim);
    b.center.resize(dim);
    std::uint64_t rest = k;
    for (int i = dim - 1; i >= 0; --i) {
      b.p[i] = rest % q;
      rest /= q;
    }
    for (int i = 0; i < dim; ++i) b.center[i] = static_cast<double>(b.p[i]) / static_cast<double>(q);
    b.half_widths = hw;
    b.ball_radius = br;
    out.push_back(std::move(b));
  }
  return out;
}

LimsupFamily make_diophantine(int dim, std::span<const double> tau, std::uint64_t q_max,
                              const DiophantineOptions& options) {
  check_tau(dim, tau);
  if (q_max < 2) throw InvalidArgument("Q_max must be at least 2");
  const double scale = resolve_ball_scale(dim, options.ball_scale);
  std::uint64_t q_min = options.q_min;
  if (q_min == 0) {
    q_min = 1;
    while (!(dioph_ball_radius(dim, scale, q_min) < kMaxBoundingRadius &&
             box_corner(dim, tau, q_min) < kMaxBoundingRadius)) {
      ++q_min;
    }
  }
  if (q_min > q_max) throw InvalidArgument("no denominator up to Q_max fits the torus radius cap");
  if (!(dioph_ball_radius(dim, scale, q_min) < kMaxBoundingRadius)) {
    throw InvalidArgument("q_min = " + std::to_string(q_min) + " gives enclosing balls of radius >= 1/4");
  }
  if (box_corner(dim, tau, q_min) > dioph_ball_radius(dim, scale, q_min) * (1.0 + 1e-9)) {
    throw InvalidArgument("ball_scale too small: boxes stick out of their enclosing balls");
  }

  // offsets[k] = number of entries with denominator below q_min + k.
  auto offsets = std::make_shared<std::vector<std::uint64_t>>();
  offsets->reserve(q_max - q_min + 2);
  offsets->push_back(0);
  for (std::uint64_t q = q_min; q <= q_max; ++q) {
    const std::uint64_t c = int_pow(q, dim);
    if (offsets->back() > UINT64_MAX - c) throw InvalidArgument("Diophantine family too large to index");
    offsets->push_back(offsets->back() + c);
  }

  FamilyTraits t;
  t.kind = "diophantine";
  t.dim = dim;
  t.size = offsets->back();
  t.radii_nonincreasing = true;
  t.tau.assign(tau.begin(), tau.end());
  t.params = {{"q_min", static_cast<double>(q_min)},
              {"q_max", static_cast<double>(q_max)},
              {"ball_scale", scale}};
  const double c = box_corner(dim, tau, q_min) / dioph_ball_radius(dim, scale, q_min);
  if (c < 1.0) t.separation = c;

  LocalVec hw_exp{};
  for (int i = 0; i < dim; ++i) hw_exp[i] = -(1.0 + tau[i]);
  return LimsupFamily(std::move(t), [dim, q_min, scale, offsets, hw_exp](std::uint64_t j) {
    const std::uint64_t k = j - 1;
    const auto it = std::upper_bound(offsets->begin(), offsets->end(), k);
    const std::uint64_t slot = static_cast<std::uint64_t>(it - offsets->begin()) - 1;
    const std::uint64_t q = q_min + slot;
    std::uint64_t rest = k - (*offsets)[slot];
    LocalVec center{};
    for (int i = dim - 1; i >= 0; --i) {
      center[i] = static_cast<double>(rest % q) / static_cast<double>(q);
      rest /= q;
    }
    const TorusPoint x = TorusPoint::from_wrapped(center, dim);
    std::vector<double> hw(dim);
    for (int i = 0; i < dim; ++i) hw[i] = std::pow(static_cast<double>(q), hw_exp[i]);
    return BallSeqEntry{j, Ball{x, dioph_ball_radius(dim, scale, q)}, Shape::box(x, hw)};
  });
}

std::pair<std::uint64_t, std::uint64_t> diophantine_q_range(const LimsupFamily& family) {
  if (family.kind().rfind("diophantine", 0) != 0) throw InvalidArgument("not a Diophantine family");
  return {static_cast<std::uint64_t>(param(family.traits(), "q_min")),
          static_cast<std::uint64_t>(param(family.traits(), "q_max"))};
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> diophantine_index_range(const LimsupFamily& family,
                                                                              std::uint64_t q_lo,
                                                                              std::uint64_t q_hi) {
  const auto [q_min, q_max] = diophantine_q_range(family);
  const std::uint64_t lo = std::max(q_lo, q_min);
  const std::uint64_t hi = std::min(q_hi, q_max);
  if (lo > hi) return std::nullopt;
  const int d = family.dim();
  std::uint64_t first = 1;
  for (std::uint64_t q = q_min; q < lo; ++q) first += int_pow(q, d);
  std::uint64_t last = first - 1;
  for (std::uint64_t q = lo; q <= hi; ++q) last += int_pow(q, d);
  return std::make_pair(first, last);
}

std::uint64_t count_containment_violations(const BallSeqEntry& e, std::uint64_t samples, std::uint64_t seed) {
  Rng rng = make_stream(seed, {0x434f4e, e.index});
  ShapeSampler sampler(e.subset);
  const double limit = e.ball.radius * (1.0 + 1e-9);
  std::uint64_t bad = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (torus_distance(sampler.point(rng), e.ball.center) > limit) ++bad;
  }
  return bad;
}

}  // namespace mtp

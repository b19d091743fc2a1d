#include "mtp/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtp/errors.hpp"
#include "mtp/parallel.hpp"

namespace mtp {

namespace {

constexpr std::uint64_t kChunk = 1u << 16;

// Stream tags keep the different estimators of one seed independent.
constexpr std::uint64_t kTagSet = 0x5345;
constexpr std::uint64_t kTagCross = 0x4352;
constexpr std::uint64_t kTagTrunc = 0x5452;
constexpr std::uint64_t kTagLebesgue = 0x4c45;
constexpr std::uint64_t kTagCache = 0x4341;

void check_exponent(double t, int dim) {
  if (!(t > 0.0)) throw InvalidArgument("Riesz exponent t must be positive, got " + std::to_string(t));
  if (!(t < dim)) {
    throw InvalidArgument("Riesz exponent t = " + std::to_string(t) + " must be below the dimension " +
                          std::to_string(dim));
  }
}

void check_samples(std::uint64_t n) {
  if (n < 2) throw InvalidArgument("Monte Carlo estimates need at least 2 samples");
}

template <class MakeDraw>
MomentAccumulator sample_mean(std::uint64_t n, std::uint64_t seed, std::uint64_t tag, std::uint64_t stream,
                              unsigned workers, MakeDraw make_draw) {
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  std::vector<MomentAccumulator> parts(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    Rng rng = make_stream(seed, {tag, stream, static_cast<std::uint64_t>(c)});
    auto draw = make_draw();
    const std::uint64_t count = std::min<std::uint64_t>(kChunk, n - c * kChunk);
    MomentAccumulator acc;
    for (std::uint64_t i = 0; i < count; ++i) acc.add(draw(rng));
    parts[c] = acc;
  });
  MomentAccumulator total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

// Fills one geometry value per sample: pair distance or radial exit distance.
template <class MakeDraw>
std::vector<double> sample_values(std::uint64_t n, std::uint64_t seed, std::uint64_t tag, std::uint64_t stream,
                                  MakeDraw make_draw) {
  std::vector<double> out(n);
  const std::uint64_t chunks = (n + kChunk - 1) / kChunk;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    Rng rng = make_stream(seed, {tag, stream, c});
    auto draw = make_draw();
    const std::uint64_t count = std::min<std::uint64_t>(kChunk, n - c * kChunk);
    for (std::uint64_t i = 0; i < count; ++i) out[c * kChunk + i] = draw(rng);
  }
  return out;
}

double interval_length(const Shape& u) { return 2.0 * u.half_extents()[0]; }

double local_pair_distance(ShapeSampler& s, Rng& rng, int d) {
  const LocalVec a = s.offset(rng);
  const LocalVec b = s.offset(rng);
  double q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    q += diff * diff;
  }
  return std::sqrt(q);
}

double radial_exit(const Shape& u, ShapeSampler& s, Rng& rng) {
  const LocalVec o = s.offset(rng);
  const LocalVec w = random_direction(rng, u.dim());
  return exit_distance(u, o, w);
}

// Radial estimator for indicator shapes: second point at distance rho with
// density proportional to rho^{d-1-t} on [0, reach], kept when inside U.
double radial_indicator_hit(const Shape& u, ShapeSampler& s, Rng& rng, double t, double reach) {
  const int d = u.dim();
  const LocalVec o = s.offset(rng);
  const LocalVec w = random_direction(rng, d);
  const double rho = reach * std::pow(uniform01(rng), 1.0 / (d - t));
  LocalVec y{};
  for (int i = 0; i < d; ++i) y[i] = o[i] + rho * w[i];
  return u.contains_offset(y) ? 1.0 : 0.0;
}

bool same_shape(const Shape& a, const Shape& b) {
  if (a.kind() != b.kind() || a.dim() != b.dim()) return false;
  if (a.kind() == ShapeKind::indicator) {
    return std::get<Indicator>(a.variant()).membership == std::get<Indicator>(b.variant()).membership &&
           a.bounding_ball().radius == b.bounding_ball().radius && a.center() == b.center();
  }
  if (!(a.center() == b.center())) return false;
  const LocalVec ea = a.half_extents();
  const LocalVec eb = b.half_extents();
  for (int i = 0; i < a.dim(); ++i) {
    if (ea[i] != eb[i]) return false;
  }
  return true;
}

// Relative variance contributed by an estimated shape measure raised to `power`.
double measure_rel_var(const MeasureEstimate& m, double power) {
  if (m.exact || m.value <= 0.0) return 0.0;
  const double r = power * m.std_error / m.value;
  return r * r;
}

RieszEstimate scaled(const MomentAccumulator& acc, double scale, double extra_rel_var, double t) {
  RieszEstimate e;
  e.value = scale * acc.mean;
  const double rel = acc.mean != 0.0 ? acc.std_error_of_mean() / std::fabs(acc.mean) : 0.0;
  e.std_error = std::fabs(e.value) * std::sqrt(rel * rel + extra_rel_var);
  if (acc.mean == 0.0) e.std_error = scale * acc.std_error_of_mean();
  e.method = EnergyMethod::monte_carlo;
  e.samples = acc.n;
  e.t = t;
  return e;
}

RieszEstimate closed_form(double value, double t) {
  return RieszEstimate{value, 0.0, EnergyMethod::closed_form, 0, t};
}

double truncation_cutoff(double s, double m) {
  if (!(m > 0.0)) throw InvalidArgument("truncation level m must be positive");
  return std::pow(m, -1.0 / s);
}

}  // namespace

std::string_view to_string(EnergyMethod m) {
  switch (m) {
    case EnergyMethod::closed_form: return "closed_form";
    case EnergyMethod::quadrature: return "quadrature";
    case EnergyMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

std::string_view to_string(SamplingMode m) { return m == SamplingMode::pair ? "pair" : "radial"; }

double interval_energy(double length, double t) {
  if (!(length > 0.0)) throw InvalidArgument("interval length must be positive");
  if (!(t > 0.0) || !(t < 1.0)) throw InvalidArgument("t must lie in (0, 1) for an interval");
  return 2.0 * std::pow(length, 2.0 - t) / ((1.0 - t) * (2.0 - t));
}

double interval_energy_truncated(double length, double t, double cutoff) {
  const double a = std::min(cutoff, length);
  if (a <= 0.0) return 0.0;
  return 2.0 * (length * std::pow(a, 1.0 - t) / (1.0 - t) - std::pow(a, 2.0 - t) / (2.0 - t));
}

RieszEstimate energy_set(const Shape& u, double t, const EnergyOptions& o) {
  const int d = u.dim();
  check_exponent(t, d);
  if (u.is_interval()) return closed_form(interval_energy(interval_length(u), t), t);
  check_samples(o.samples);
  const MeasureEstimate lam = measure(u);

  if (o.mode == SamplingMode::pair) {
    auto acc = sample_mean(o.samples, o.seed, kTagSet, o.stream, o.workers, [&] {
      return [&u, d, t, s = ShapeSampler(u)](Rng& rng) mutable {
        return std::pow(local_pair_distance(s, rng, d), -t);
      };
    });
    return scaled(acc, lam.value * lam.value, measure_rel_var(lam, 2.0), t);
  }

  const double area = unit_sphere_area(d);
  if (u.is_closed_form()) {
    auto acc = sample_mean(o.samples, o.seed, kTagSet, o.stream, o.workers, [&] {
      return [&u, d, t, area, s = ShapeSampler(u)](Rng& rng) mutable {
        return area * std::pow(radial_exit(u, s, rng), d - t) / (d - t);
      };
    });
    return scaled(acc, lam.value, 0.0, t);
  }
  const double reach = 2.0 * u.bounding_ball().radius;
  const double weight = area * std::pow(reach, d - t) / (d - t);
  auto acc = sample_mean(o.samples, o.seed, kTagSet, o.stream, o.workers, [&] {
    return [&u, t, reach, weight, s = ShapeSampler(u)](Rng& rng) mutable {
      return weight * radial_indicator_hit(u, s, rng, t, reach);
    };
  });
  return scaled(acc, lam.value, measure_rel_var(lam, 1.0), t);
}

RieszEstimate energy_cross(const Shape& u, const Shape& v, double t, const EnergyOptions& o) {
  if (u.dim() != v.dim()) throw InvalidArgument("energy_cross: shapes have different dimensions");
  check_exponent(t, u.dim());
  if (same_shape(u, v)) return energy_set(u, t, o);
  check_samples(o.samples);
  const MeasureEstimate lu = measure(u);
  const MeasureEstimate lv = measure(v);
  auto acc = sample_mean(o.samples, o.seed, kTagCross, o.stream, o.workers, [&] {
    return [&u, &v, t, su = ShapeSampler(u), sv = ShapeSampler(v)](Rng& rng) mutable {
      const TorusPoint x = su.point(rng);
      const TorusPoint y = sv.point(rng);
      return std::pow(torus_distance_sq_unchecked(x, y), -0.5 * t);
    };
  });
  return scaled(acc, lu.value * lv.value, measure_rel_var(lu, 1.0) + measure_rel_var(lv, 1.0), t);
}

RieszEstimate energy_truncated(const Shape& u, double t, double s, double m, const EnergyOptions& o) {
  const int d = u.dim();
  check_exponent(t, d);
  check_exponent(s, d);
  if (!(t < s)) throw InvalidArgument("truncated energy needs t < s");
  const double cutoff = truncation_cutoff(s, m);
  if (u.is_interval()) return closed_form(interval_energy_truncated(interval_length(u), t, cutoff), t);
  check_samples(o.samples);
  const MeasureEstimate lam = measure(u);

  if (o.mode == SamplingMode::pair) {
    auto acc = sample_mean(o.samples, o.seed, kTagTrunc, o.stream, o.workers, [&] {
      return [&u, d, t, cutoff, sm = ShapeSampler(u)](Rng& rng) mutable {
        const double r = local_pair_distance(sm, rng, d);
        return r < cutoff ? std::pow(r, -t) : 0.0;
      };
    });
    return scaled(acc, lam.value * lam.value, measure_rel_var(lam, 2.0), t);
  }
  const double area = unit_sphere_area(d);
  if (u.is_closed_form()) {
    auto acc = sample_mean(o.samples, o.seed, kTagTrunc, o.stream, o.workers, [&] {
      return [&u, d, t, cutoff, area, sm = ShapeSampler(u)](Rng& rng) mutable {
        return area * std::pow(std::min(radial_exit(u, sm, rng), cutoff), d - t) / (d - t);
      };
    });
    return scaled(acc, lam.value, 0.0, t);
  }
  const double reach = std::min(cutoff, 2.0 * u.bounding_ball().radius);
  const double weight = area * std::pow(reach, d - t) / (d - t);
  auto acc = sample_mean(o.samples, o.seed, kTagTrunc, o.stream, o.workers, [&] {
    return [&u, t, reach, weight, sm = ShapeSampler(u)](Rng& rng) mutable {
      return weight * radial_indicator_hit(u, sm, rng, t, reach);
    };
  });
  return scaled(acc, lam.value, measure_rel_var(lam, 1.0), t);
}

std::vector<RieszEstimate> energy_truncated_sweep(const Shape& u, double t, double s,
                                                  std::span<const double> ms, const EnergyOptions& o) {
  const int d = u.dim();
  check_exponent(t, d);
  check_exponent(s, d);
  if (!(t < s)) throw InvalidArgument("truncated energy needs t < s");
  std::vector<RieszEstimate> out;
  out.reserve(ms.size());
  if (u.is_interval()) {
    for (double m : ms) out.push_back(energy_truncated(u, t, s, m, o));
    return out;
  }
  const KernelSampleCache cache = KernelSampleCache::build(u, o.samples, o.seed, o.stream);
  const double lam = cache.shape_measure();
  for (double m : ms) {
    RieszEstimate e = cache.mean_kernel_truncated(t, truncation_cutoff(s, m));
    e.value *= lam * lam;
    e.std_error *= lam * lam;
    out.push_back(e);
  }
  return out;
}

RieszEstimate lebesgue_energy(int dim, double t, const EnergyOptions& o) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("lebesgue_energy: unsupported dimension");
  check_exponent(t, dim);
  if (dim == 1) return closed_form(2.0 * std::pow(0.5, 1.0 - t) / (1.0 - t), t);
  check_samples(o.samples);
  if (o.mode == SamplingMode::pair) {
    auto acc = sample_mean(o.samples, o.seed, kTagLebesgue, o.stream, o.workers, [&] {
      return [dim, t](Rng& rng) {
        LocalVec a{}, b{};
        for (int i = 0; i < dim; ++i) a[i] = uniform01(rng);
        for (int i = 0; i < dim; ++i) b[i] = uniform01(rng);
        return std::pow(torus_distance_sq_unchecked(TorusPoint::from_wrapped(a, dim),
                                                    TorusPoint::from_wrapped(b, dim)),
                        -0.5 * t);
      };
    });
    return scaled(acc, 1.0, 0.0, t);
  }
  // I_t(lambda) = int over the centred unit cube of |z|^{-t}; integrate along rays.
  const double area = unit_sphere_area(dim);
  auto acc = sample_mean(o.samples, o.seed, kTagLebesgue, o.stream, o.workers, [&] {
    return [dim, t, area](Rng& rng) {
      const LocalVec w = random_direction(rng, dim);
      double reach = std::numeric_limits<double>::infinity();
      for (int i = 0; i < dim; ++i) {
        if (w[i] != 0.0) reach = std::min(reach, 0.5 / std::fabs(w[i]));
      }
      return area * std::pow(reach, dim - t) / (dim - t);
    };
  });
  return scaled(acc, 1.0, 0.0, t);
}

MeasureEnergy energy_measure_terms(const WeightedShapeMeasure& mu, double t, const MeasureEnergyOptions& o) {
  const int d = mu.dim();
  check_exponent(t, d);
  const auto& atoms = mu.atoms();
  const std::size_t k = atoms.size();
  MeasureEnergy out;
  out.diagonal_terms.resize(k);
  out.atom_energies.resize(k);
  std::vector<double> diag_var(k, 0.0);
  std::vector<double> lam(k);
  for (std::size_t j = 0; j < k; ++j) lam[j] = measure(atoms[j].shape).value;

  bool any_mc = false;
  parallel_for(k, o.diagonal.workers, [&](std::size_t j) {
    EnergyOptions eo = o.diagonal;
    eo.workers = 1;
    eo.stream = o.diagonal.stream * 1'000'003ULL + j;
    const RieszEstimate e = energy_set(atoms[j].shape, t, eo);
    const double scale = atoms[j].weight * atoms[j].weight / (lam[j] * lam[j]);
    out.atom_energies[j] = e.value;
    out.diagonal_terms[j] = scale * e.value;
    diag_var[j] = scale * scale * e.std_error * e.std_error;
  });
  for (std::size_t j = 0; j < k; ++j) {
    out.diagonal += out.diagonal_terms[j];
    out.diagonal_std_error += diag_var[j];
  }
  out.diagonal_std_error = std::sqrt(out.diagonal_std_error);

  // Off-diagonal pairs j < k, each counted twice.
  const std::size_t pairs = k * (k - 1) / 2;
  std::vector<double> pair_value(pairs, 0.0);
  std::vector<double> pair_var(pairs, 0.0);
  std::vector<std::size_t> row_start(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) row_start[j + 1] = row_start[j] + (k - 1 - j);
  parallel_for(k, o.diagonal.workers, [&](std::size_t j) {
    for (std::size_t i = j + 1; i < k; ++i) {
      EnergyOptions eo;
      eo.samples = o.cross_samples;
      eo.seed = o.diagonal.seed;
      eo.stream = (o.diagonal.stream * 1'000'003ULL + j) * 1'000'003ULL + i;
      eo.workers = 1;
      const RieszEstimate e = energy_cross(atoms[j].shape, atoms[i].shape, t, eo);
      const double scale = 2.0 * atoms[j].weight * atoms[i].weight / (lam[j] * lam[i]);
      const std::size_t idx = row_start[j] + (i - j - 1);
      pair_value[idx] = scale * e.value;
      pair_var[idx] = scale * scale * e.std_error * e.std_error;
    }
  });
  double off_var = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    out.off_diagonal += pair_value[p];
    off_var += pair_var[p];
  }
  out.off_diagonal_std_error = std::sqrt(off_var);
  any_mc = pairs > 0 || out.diagonal_std_error > 0.0;

  out.total.value = out.diagonal + out.off_diagonal;
  out.total.std_error = std::sqrt(out.diagonal_std_error * out.diagonal_std_error + off_var);
  out.total.method = any_mc ? EnergyMethod::monte_carlo : EnergyMethod::closed_form;
  if (out.total.method == EnergyMethod::closed_form) out.total.std_error = 0.0;
  out.total.samples = any_mc ? pairs * o.cross_samples : 0;
  out.total.t = t;
  return out;
}

RieszEstimate energy_measure(const WeightedShapeMeasure& mu, double t, const MeasureEnergyOptions& o) {
  return energy_measure_terms(mu, t, o).total;
}

SingularValueProfile::SingularValueProfile(std::vector<double> semi_axes) : axes_(std::move(semi_axes)) {
  if (axes_.empty()) throw InvalidArgument("singular value profile needs at least one semi-axis");
  for (double a : axes_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("semi-axes must be positive and finite");
  }
  std::sort(axes_.begin(), axes_.end(), std::greater<>());
}

SingularValueProfile SingularValueProfile::of(const Shape& s) {
  if (!s.is_closed_form()) throw InvalidArgument("singular value function needs a ball, box or ellipsoid");
  const LocalVec e = s.half_extents();
  return SingularValueProfile(std::vector<double>(e.begin(), e.begin() + s.dim()));
}

double log_singular_value_fn(const SingularValueProfile& p, double s) {
  const int d = p.dim();
  if (!(s > 0.0) || s > d) {
    throw InvalidArgument("singular value function needs 0 < s <= d, got s = " + std::to_string(s));
  }
  const int m = static_cast<int>(std::ceil(s)) - 1;
  const auto axes = p.semi_axes();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += std::log(axes[i]);
  return acc + (s - m) * std::log(axes[m]);
}

double singular_value_fn(const SingularValueProfile& p, double s) {
  const int d = p.dim();
  if (!(s > 0.0) || s > d) {
    throw InvalidArgument("singular value function needs 0 < s <= d, got s = " + std::to_string(s));
  }
  const int m = static_cast<int>(std::ceil(s)) - 1;
  const auto axes = p.semi_axes();
  double prod = 1.0;
  for (int i = 0; i < m; ++i) prod *= axes[i];
  return prod * std::pow(axes[m], s - m);
}

double content_lower_bound(const Shape& u, double t, const EnergyOptions& options) {
  const double lam = measure(u).value;
  return lam * lam / energy_set(u, t, options).value;
}

KernelSampleCache KernelSampleCache::build(const Shape& u, std::uint64_t samples, std::uint64_t seed,
                                           std::uint64_t stream) {
  KernelSampleCache c;
  c.dim_ = u.dim();
  c.measure_ = measure(u).value;
  if (u.is_interval()) {
    c.kind_ = Kind::interval;
    c.length_ = interval_length(u);
    return c;
  }
  check_samples(samples);
  const int d = u.dim();
  if (u.is_closed_form()) {
    c.kind_ = Kind::radial;
    c.values_ = sample_values(samples, seed, kTagCache, stream, [&] {
      return [&u, s = ShapeSampler(u)](Rng& rng) mutable { return radial_exit(u, s, rng); };
    });
  } else {
    c.kind_ = Kind::pair;
    c.values_ = sample_values(samples, seed, kTagCache, stream, [&] {
      return [d, s = ShapeSampler(u)](Rng& rng) mutable { return local_pair_distance(s, rng, d); };
    });
  }
  return c;
}

RieszEstimate KernelSampleCache::mean_kernel(double t) const {
  return mean_kernel_truncated(t, std::numeric_limits<double>::infinity());
}

RieszEstimate KernelSampleCache::mean_kernel_truncated(double t, double cutoff) const {
  check_exponent(t, dim_);
  if (kind_ == Kind::interval) {
    const double v = std::isinf(cutoff) ? interval_energy(length_, t) : interval_energy_truncated(length_, t, cutoff);
    return closed_form(v / (length_ * length_), t);
  }
  MomentAccumulator acc;
  if (kind_ == Kind::radial) {
    const double scale = unit_sphere_area(dim_) / ((dim_ - t) * measure_);
    for (double r : values_) acc.add(scale * std::pow(std::min(r, cutoff), dim_ - t));
  } else {
    for (double r : values_) acc.add(r < cutoff ? std::pow(r, -t) : 0.0);
  }
  return scaled(acc, 1.0, 0.0, t);
}

}  // namespace mtp

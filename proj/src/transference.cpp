#include "mtp/transference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtp/errors.hpp"
#include "mtp/stats.hpp"

namespace mtp {

namespace {

std::vector<Atom> kept_atoms(const LimsupFamily& family, std::span<const std::uint64_t> kept, bool use_subsets) {
  if (kept.empty()) throw InvalidArgument("the Vitali selection is empty");
  std::vector<BallSeqEntry> entries;
  entries.reserve(kept.size());
  double total = 0.0;
  for (std::uint64_t j : kept) {
    entries.push_back(family.entry(j));
    total += measure(Shape::ball(entries.back().ball)).value;
  }
  std::vector<Atom> atoms;
  atoms.reserve(kept.size());
  for (const auto& e : entries) {
    const double w = measure(Shape::ball(e.ball)).value / total;
    if (use_subsets) {
      if (!(measure(e.subset).value > 0.0)) {
        throw InvalidArgument("subset U_" + std::to_string(e.index) + " has zero measure");
      }
      atoms.push_back(Atom{e.subset, w});
    } else {
      atoms.push_back(Atom{Shape::ball(e.ball), w});
    }
  }
  return atoms;
}

double four_25d(int d) { return 4.0 * std::pow(5.0, 2.0 * d); }

}  // namespace

WeightedShapeMeasure build_nu(const LimsupFamily& family, std::span<const std::uint64_t> kept) {
  return WeightedShapeMeasure(kept_atoms(family, kept, false));
}

WeightedShapeMeasure build_nu(const LimsupFamily& family, const SelectedUnion& selected) {
  return build_nu(family, selected.kept);
}

WeightedShapeMeasure build_mu(const LimsupFamily& family, std::span<const std::uint64_t> kept) {
  return WeightedShapeMeasure(kept_atoms(family, kept, true));
}

WeightedShapeMeasure build_mu(const LimsupFamily& family, const SelectedUnion& selected) {
  return build_mu(family, selected.kept);
}

TransferenceStage build_transference(const LimsupFamily& family, std::uint64_t n, const TruncationOptions& options) {
  const TruncationWindow w = find_truncation(family, n, options);
  SelectedUnion sel = build_selected_union(family, w, options.grid);
  WeightedShapeMeasure nu = build_nu(family, sel);
  WeightedShapeMeasure mu = build_mu(family, sel);
  return TransferenceStage{std::move(sel), std::move(nu), std::move(mu)};
}

double default_probe_floor(const LimsupFamily& family, const TruncationWindow& window) {
  double r = 0.0;
  if (family.traits().radii_nonincreasing) {
    r = family.entry(window.n).ball.radius;
  } else {
    for (std::uint64_t j = window.n; j <= window.m_n; ++j) r = std::max(r, family.entry(j).ball.radius);
  }
  return 10.0 * r;
}

DensityProbe density_probe(const WeightedShapeMeasure& mu, const Ball& ball, const DensityProbeOptions& options) {
  const Shape probe = Shape::ball(ball);
  if (probe.dim() != mu.dim()) throw InvalidArgument("probe ball and measure differ in dimension");
  if (ball.radius < options.radius_floor) {
    throw InvalidArgument("probe radius " + std::to_string(ball.radius) + " is below the floor " +
                          std::to_string(options.radius_floor));
  }
  const double R = ball.radius;
  double mass = 0.0;
  double var = 0.0;
  bool exact = true;
  const auto& atoms = mu.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Shape& u = atoms[k].shape;
    const double rho = u.bounding_ball().radius;
    const double dist = torus_distance(u.center(), ball.center);
    if (dist + rho <= R) {
      mass += atoms[k].weight;
      continue;
    }
    if (dist >= R + rho) continue;
    if (u.is_interval()) {
      const double delta = min_image(ball.center, u.center())[0];
      const double h = u.half_extents()[0];
      const double overlap = std::max(0.0, std::min(delta + h, R) - std::max(delta - h, -R));
      mass += atoms[k].weight * overlap / (2.0 * h);
      continue;
    }
    exact = false;
    Rng rng = make_stream(options.seed, {0x50524f, k});
    ShapeSampler sampler(u);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      if (torus_distance_sq_unchecked(sampler.point(rng), ball.center) < R * R) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(options.samples);
    mass += atoms[k].weight * p;
    var += atoms[k].weight * atoms[k].weight * p * (1.0 - p) / static_cast<double>(options.samples);
  }
  const double vol = measure(probe).value;
  return DensityProbe{ball, mass / vol, std::sqrt(var) / vol, exact};
}

MuEnergyReport mu_energy_bound_report(const LimsupFamily& family, std::span<const std::uint64_t> kept, double t,
                                      double c, double K, const EnergyReportOptions& options) {
  const int d = family.dim();
  if (!(t > 0.0) || !(t < d)) throw InvalidArgument("t must lie in (0, d)");
  if (!(c > 0.0) || !(c < 1.0)) throw InvalidArgument("separation constant c must lie in (0, 1)");
  if (!(K > 0.0)) throw InvalidArgument("K must be positive");
  if (kept.empty()) throw InvalidArgument("the Vitali selection is empty");

  std::vector<BallSeqEntry> entries;
  entries.reserve(kept.size());
  for (std::uint64_t j : kept) {
    entries.push_back(family.entry(j));
    const BallSeqEntry& e = entries.back();
    if (!bounding_inside(e.subset, Ball{e.ball.center, c * e.ball.radius})) {
      throw InvalidArgument("U_" + std::to_string(j) + " is not inside B(x_j, c r_j) with c = " + std::to_string(c) +
                            "; wrap the family with doubled radii");
    }
  }

  MuEnergyReport rep;
  rep.t = t;
  rep.c = c;
  rep.K = K;
  rep.dim = d;
  rep.atoms = kept.size();

  const WeightedShapeMeasure mu = build_mu(family, kept);
  rep.mu_energy = energy_measure_terms(mu, t, options.energy);
  const double big = four_25d(d);

  std::vector<double> lam_b(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const BallSeqEntry& e = entries[k];
    lam_b[k] = measure(Shape::ball(e.ball)).value;
    const double lam_u = measure(e.subset).value;
    const double iu = rep.mu_energy.atom_energies[k];
    const double bound = big * iu * (lam_b[k] / lam_u) * (lam_b[k] / lam_u);
    rep.diagonal_bound += bound;
    if (rep.mu_energy.diagonal_terms[k] > bound) ++rep.diagonal_violations;
    rep.condition_max = std::max(rep.condition_max, iu * lam_b[k] / (lam_u * lam_u));
    rep.C_d += lam_b[k];
  }
  rep.condition_holds = rep.condition_max < K;

  rep.separation_factor = std::pow(1.0 - c, -t);
  const auto& atoms = mu.atoms();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    for (std::size_t k = j + 1; k < atoms.size(); ++k) {
      const double dist = torus_distance(entries[j].ball.center, entries[k].ball.center);
      rep.off_diagonal_separation_bound += 2.0 * std::pow(dist, -t) * atoms[j].weight * atoms[k].weight;
    }
  }
  rep.off_diagonal_separation_bound *= rep.separation_factor;
  rep.off_diagonal_within_bound =
      rep.mu_energy.off_diagonal <= rep.off_diagonal_separation_bound + 3.0 * rep.mu_energy.off_diagonal_std_error;

  rep.rhs_measured = rep.diagonal_bound + rep.off_diagonal_separation_bound;
  const double slack = 3.0 * rep.mu_energy.total.std_error;
  rep.energy_within_measured = rep.mu_energy.total.value <= rep.rhs_measured + slack;

  if (options.include_nu) {
    const WeightedShapeMeasure nu = build_nu(family, kept);
    rep.nu_energy = energy_measure_terms(nu, t, options.energy);
    EnergyOptions leb = options.energy.diagonal;
    leb.mode = SamplingMode::radial;
    rep.lebesgue_energy = lebesgue_energy(d, t, leb).value;
    rep.nu_within_lebesgue_bound = rep.nu_energy.total.value <= big * rep.lebesgue_energy;
    if (rep.nu_energy.off_diagonal > 0.0) {
      rep.C_td_empirical = rep.off_diagonal_separation_bound / rep.nu_energy.off_diagonal;
    }
    rep.rhs_final = big * rep.C_d * K + big * rep.C_td_empirical * rep.lebesgue_energy;
    rep.energy_within_final = rep.mu_energy.total.value <= rep.rhs_final + slack;
  }
  return rep;
}

TrendTest energy_trend(std::span<const double> n, std::span<const double> values, double alpha) {
  if (n.size() != values.size()) throw InvalidArgument("energy_trend: n and values differ in length");
  TrendTest tt;
  tt.n.assign(n.begin(), n.end());
  tt.values.assign(values.begin(), values.end());
  tt.alpha = alpha;
  std::vector<double> x(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] >= 1.0)) throw InvalidArgument("energy_trend: n must be >= 1");
    x[i] = std::log2(n[i]);
  }
  const LinearFit fit = least_squares(x, values);
  tt.slope = fit.slope;
  tt.slope_std_error = fit.slope_std_error;
  tt.p_value = slope_positive_p_value(fit);
  tt.non_positive_growth = tt.slope <= 0.0 || tt.p_value >= alpha;
  return tt;
}

}  // namespace mtp

#include "mtp/report.hpp"

#include <sstream>

namespace mtp {

namespace {

template <class T>
Json array_of(const std::vector<T>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(x);
  return a;
}

}  // namespace

Json to_json(const TorusPoint& p) {
  Json a = Json::array();
  for (double c : p.coords()) a.push_back(c);
  return a;
}

Json to_json(const Ball& b) { return Json{{"center", to_json(b.center)}, {"radius", b.radius}}; }

Json to_json(const Shape& s) {
  Json j{{"kind", std::string(to_string(s.kind()))}, {"center", to_json(s.center())}};
  if (s.is_closed_form()) {
    const LocalVec e = s.half_extents();
    j["half_extents"] = std::vector<double>(e.begin(), e.begin() + s.dim());
  } else {
    j["bounding_ball"] = to_json(s.bounding_ball());
  }
  const MeasureEstimate m = measure(s);
  j["measure"] = m.value;
  j["measure_exact"] = m.exact;
  return j;
}

Json to_json(const RieszEstimate& e) {
  return Json{{"value", e.value},
              {"std_error", e.std_error},
              {"method", std::string(to_string(e.method))},
              {"samples", e.samples},
              {"t", e.t}};
}

Json to_json(const MeasureEnergy& e) {
  return Json{{"total", to_json(e.total)},
              {"diagonal", e.diagonal},
              {"diagonal_std_error", e.diagonal_std_error},
              {"off_diagonal", e.off_diagonal},
              {"off_diagonal_std_error", e.off_diagonal_std_error},
              {"atoms", e.diagonal_terms.size()}};
}

Json to_json(const FamilyTraits& t) {
  Json params = Json::object();
  for (const auto& [k, v] : t.params) params[k] = v;
  Json j{{"kind", t.kind},
         {"dim", t.dim},
         {"size", t.size ? Json(*t.size) : Json(nullptr)},
         {"radii_nonincreasing", t.radii_nonincreasing},
         {"separation", t.separation ? Json(*t.separation) : Json(nullptr)},
         {"params", params}};
  if (!t.tau.empty()) j["tau"] = t.tau;
  return j;
}

Json to_json(const DimensionReport& r) {
  Json grid = Json::array();
  for (const auto& p : r.t_grid) {
    grid.push_back(Json{{"t", p.t}, {"sup_stat", p.sup_stat}, {"slope", p.slope}, {"bounded", p.bounded}});
  }
  Json j{{"s", r.s},
         {"label", r.label},
         {"method", std::string(to_string(r.method))},
         {"ratio_model", r.ratio_model},
         {"j_range", Json::array({r.j_min, r.j_max})},
         {"regression_points", r.regression_points},
         {"t_tol", r.t_tol},
         {"slope_tol", r.slope_tol},
         {"smoothed", r.smoothed},
         {"s_half_window", r.s_half_window >= 0.0 ? Json(r.s_half_window) : Json(nullptr)},
         {"t_grid", grid}};
  if (!r.candidates.empty()) {
    Json c = Json::object();
    for (const auto& [name, s] : r.candidates) c[name] = s;
    j["winning_map"] = r.winning_map;
    j["candidates"] = c;
  }
  return j;
}

Json to_json(const CoverSelection& s) {
  return Json{{"kept_indices", array_of(s.kept_indices)},
              {"expansion_factor", s.expansion_factor},
              {"coverage_measure", s.coverage_measure},
              {"coverage_exact", s.coverage_exact},
              {"disjoint_sum", s.disjoint_sum}};
}

Json to_json(const TruncationWindow& w) {
  return Json{{"n", w.n},
              {"m_n", w.m_n},
              {"achieved_measure", w.achieved_measure},
              {"exact", w.exact},
              {"grid_bits", w.grid_bits}};
}

Json to_json(const SelectedUnion& s) {
  return Json{{"window", to_json(s.window)},
              {"kept", array_of(s.kept)},
              {"expansion_factor", s.selection.expansion_factor},
              {"coverage_measure", s.selection.coverage_measure},
              {"disjoint_sum", s.selection.disjoint_sum},
              {"selected_measure", s.selected_measure},
              {"lower_target", s.lower_target},
              {"measure_bound_check", s.measure_bound_check},
              {"bound_holds", s.bound_holds}};
}

Json to_json(const DensityProbe& p) {
  return Json{{"ball", to_json(p.ball)}, {"ratio", p.ratio}, {"std_error", p.std_error}, {"exact", p.exact}};
}

Json to_json(const MuEnergyReport& r) {
  return Json{{"t", r.t},
              {"c", r.c},
              {"K", r.K},
              {"dim", r.dim},
              {"atoms", r.atoms},
              {"mu_energy", to_json(r.mu_energy)},
              {"diagonal_bound", r.diagonal_bound},
              {"diagonal_violations", r.diagonal_violations},
              {"separation_factor", r.separation_factor},
              {"off_diagonal_separation_bound", r.off_diagonal_separation_bound},
              {"off_diagonal_within_bound", r.off_diagonal_within_bound},
              {"condition_max", r.condition_max},
              {"condition_holds", r.condition_holds},
              {"C_d", r.C_d},
              {"nu_energy", to_json(r.nu_energy)},
              {"lebesgue_energy", r.lebesgue_energy},
              {"nu_within_lebesgue_bound", r.nu_within_lebesgue_bound},
              {"C_td_empirical", r.C_td_empirical},
              {"rhs_measured", r.rhs_measured},
              {"rhs_final", r.rhs_final},
              {"energy_within_measured", r.energy_within_measured},
              {"energy_within_final", r.energy_within_final}};
}

Json to_json(const TrendTest& t) {
  return Json{{"n", t.n},
              {"values", t.values},
              {"slope", t.slope},
              {"slope_std_error", t.slope_std_error},
              {"p_value", t.p_value},
              {"alpha", t.alpha},
              {"non_positive_growth", t.non_positive_growth}};
}

Json to_json(const CoveringCountCurve& c) {
  return Json{{"labels", c.labels},
              {"scales", c.scales},
              {"counts", c.counts},
              {"fitted_slope", c.fitted_slope},
              {"intercept", c.intercept},
              {"residuals", c.residuals}};
}

Json to_json(const ContentEstimate& c) {
  return Json{{"cube", Json{{"level", c.cube.level}, {"corner", c.cube.corner}}},
              {"t", c.t},
              {"depth", c.depth},
              {"value", c.value},
              {"per_depth", c.per_depth},
              {"occupied", c.occupied}};
}

Json to_json(const IntersectionReport& r) {
  Json gens = Json::array();
  for (const auto& g : r.generations) {
    gens.push_back(Json{{"Q", g.label}, {"delta", g.scale}, {"count", g.count}, {"empty", g.empty}});
  }
  return Json{{"taus", r.taus},
              {"formula_values", r.formula_values},
              {"target", r.target},
              {"generations", gens},
              {"fitted_slope", r.slope_available ? Json(r.fitted_slope) : Json(nullptr)},
              {"residuals", r.residuals},
              {"individual_slopes", r.individual_slopes},
              {"empty_generations", r.empty_generations}};
}

std::string bound_csv(const DimensionReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "t,sup_stat\n";
  for (const auto& p : r.t_grid) os << p.t << ',' << p.sup_stat << '\n';
  return os.str();
}

std::string curve_csv(const CoveringCountCurve& c) {
  std::ostringstream os;
  os.precision(17);
  os << "delta,count\n";
  for (std::size_t k = 0; k < c.scales.size(); ++k) os << c.scales[k] << ',' << c.counts[k] << '\n';
  return os.str();
}

}  // namespace mtp

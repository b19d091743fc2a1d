#include "cli.hpp"

#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "mtp/bound.hpp"
#include "mtp/errors.hpp"
#include "mtp/family.hpp"
#include "mtp/lab.hpp"
#include "mtp/parallel.hpp"
#include "mtp/random.hpp"
#include "mtp/report.hpp"
#include "mtp/riesz.hpp"
#include "mtp/transference.hpp"
#include "mtp/vitali.hpp"

namespace mtp::cli {

namespace {

const std::vector<std::string> kCommands = {"energy", "bound", "vitali", "measures", "boxdim", "diophantine",
                                            "intersect"};

/// Input error tied to one parameter; reported at its config line or flag.
struct ParamError : std::runtime_error {
  ParamError(std::string k, const std::string& msg) : std::runtime_error(msg), key(std::move(k)) {}
  std::string key;
};

/// Error already carrying its own location.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const char* key, const std::string& msg) {
  if (!ok) throw ParamError(key, msg);
}

struct ConfigEntry {
  std::vector<std::string> values;
  int line = 0;
};

struct ConfigFile {
  std::string path;
  std::map<std::string, ConfigEntry> entries;
};

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

ConfigFile load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot read config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull() || (root.IsMap() && root.size() == 0)) {
    throw ConfigError(path + ":1: config is empty");
  }
  if (!root.IsMap()) throw ConfigError(path + ":" + std::to_string(line_of(root)) + ": config must be a mapping");
  ConfigFile cfg{path, {}};
  for (const auto& kv : root) {
    const int line = line_of(kv.first);
    const std::string key = normalize_key(kv.first.as<std::string>());
    const YAML::Node& v = kv.second;
    ConfigEntry e{{}, line};
    auto fail = [&](const std::string& msg) {
      throw ConfigError(path + ":" + std::to_string(line) + ": '" + key + "': " + msg);
    };
    if (v.IsScalar()) {
      e.values.push_back(v.Scalar());
    } else if (v.IsSequence()) {
      for (const auto& item : v) {
        if (item.IsScalar()) {
          e.values.push_back(item.Scalar());
        } else if (item.IsSequence()) {
          std::string joined;
          for (const auto& x : item) {
            if (!x.IsScalar()) fail("lists may nest at most one level");
            joined += (joined.empty() ? "" : ",") + x.Scalar();
          }
          e.values.push_back(joined);
        } else {
          fail("list items must be values or lists of values");
        }
      }
    } else {
      fail("missing value");
    }
    if (cfg.entries.count(key)) fail("duplicate key");
    cfg.entries.emplace(key, std::move(e));
  }
  return cfg;
}

struct Params {
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  std::string output;
  std::string csv;

  std::string family = "shrunken-balls";
  int d = 1;
  double sigma = 0.5;
  double power = 3.0;
  std::vector<double> exponents;
  double scale = 0.5;
  std::uint64_t offset = 0;
  std::vector<double> tau;
  std::uint64_t q_min = 0;
  std::uint64_t q_max = 0;
  double ball_scale = 0.0;
  bool doubled = false;

  std::string shape = "ball";
  std::vector<double> center;
  std::vector<double> size;
  double t = 0.5;
  std::uint64_t samples = 0;
  std::string mode = "pair";
  double trunc_s = 0.0;
  std::vector<double> m;

  std::string method = "energy-ratio";
  std::uint64_t j_min = 1;
  std::uint64_t j_max = 0;
  double t_tol = 1e-3;
  double slope_tol = 0.0;
  std::size_t coarse_points = 24;
  std::size_t regression_points = 0;
  bool no_half_window = false;

  std::uint64_t n = 2;
  std::uint64_t max_j = 1'000'000;
  int grid_bits = 0;

  std::vector<std::uint64_t> ns{2, 4, 8};
  double c = 0.5;
  double K = 10.0;
  std::size_t probes = 100;
  double probe_radius = 0.1;
  double probe_floor = 0.0;
  std::uint64_t probe_samples = 4096;
  std::uint64_t cross_samples = 512;
  double slack = 2.0;
  double alpha = 0.05;
  std::size_t replicates = 1;

  int gen_lo = 2;
  int gen_hi = 10;
  std::uint64_t max_cells = 100'000'000;

  bool formula_only = false;
  std::vector<std::string> taus;
};

/// Registers options on one subcommand and remembers how to echo each
/// resolved value into the report.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* opt(const std::string& name, T& var, const std::string& desc) {
    CLI::Option* o = app_->add_option("--" + name, var, desc);
    resolved_.emplace_back(name, [&var] { return Json(var); });
    return o;
  }
  template <class T>
  CLI::Option* list(const std::string& name, std::vector<T>& var, const std::string& desc) {
    return opt(name, var, desc)->delimiter(',');
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    CLI::Option* o = app_->add_flag("--" + name, var, desc);
    flags_.push_back(name);
    resolved_.emplace_back(name, [&var] { return Json(var); });
    return o;
  }

  CLI::App* app() const { return app_; }
  bool is_flag(const std::string& name) const { return std::find(flags_.begin(), flags_.end(), name) != flags_.end(); }
  Json resolved() const {
    Json j = Json::object();
    for (const auto& [name, get] : resolved_) {
      if (name == "output" || name == "csv") continue;
      j[name] = get();
    }
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::string> flags_;
  std::vector<std::pair<std::string, std::function<Json()>>> resolved_;
};

void add_common(Binder& b, Params& p, bool with_csv) {
  b.opt("seed", p.seed, "Random seed");
  b.opt("workers", p.workers, "Worker threads (default: available cores)");
  b.opt("output", p.output, "JSON report path");
  if (with_csv) b.opt("csv", p.csv, "CSV path for the curve or grid");
}

void add_family(Binder& b, Params& p) {
  b.opt("family", p.family, "random-balls, shrunken-balls, rapid-balls, ellipsoids, boxes or diophantine");
  b.opt("d", p.d, "Torus dimension");
  b.opt("sigma", p.sigma, "Shrunken balls: U_j = B(x_j, r_j^{d/sigma})");
  b.opt("power", p.power, "Rapid balls: log(1/rho_j) = log(1/r_j)^power");
  b.list("exponents", p.exponents, "Ellipsoids and boxes: semi-axis exponents");
  b.opt("scale", p.scale, "Ellipsoids and boxes: semi-axis prefactor");
  b.opt("offset", p.offset, "Random laws: lambda(B_j) = 1/(j + offset); 0 selects the default");
  b.list("tau", p.tau, "Diophantine exponents");
  b.opt("q-min", p.q_min, "Diophantine: first denominator (0 = automatic)");
  b.opt("q-max", p.q_max, "Diophantine: last denominator");
  b.opt("ball-scale", p.ball_scale, "Diophantine: enclosing radius prefactor (0 = sqrt(d))");
  b.flag("doubled", p.doubled, "Double every ball radius");
}

void check_dim(int d) {
  require(d >= 1 && d <= kMaxDim, "d", "must be between 1 and " + std::to_string(kMaxDim));
}

std::vector<double> sorted_tau(std::vector<double> tau, int d, const char* key) {
  require(static_cast<int>(tau.size()) == d, key, "needs exactly d = " + std::to_string(d) + " values");
  std::sort(tau.begin(), tau.end());
  require(tau.front() >= 1.0 / d, key, "smallest exponent must be at least 1/d");
  return tau;
}

LimsupFamily family_from(const Params& p) {
  check_dim(p.d);
  const RandomLaw law{p.offset, p.seed};
  auto built = [&]() -> LimsupFamily {
    if (p.family == "random-balls") return make_random_balls(p.d, law);
    if (p.family == "shrunken-balls") {
      require(p.sigma > 0.0 && p.sigma <= p.d, "sigma", "must lie in (0, d]");
      return make_shrunken_balls(p.d, p.sigma, law);
    }
    if (p.family == "rapid-balls") {
      require(p.power > 1.0, "power", "must exceed 1");
      return make_rapidly_shrinking_balls(p.d, p.power, law);
    }
    if (p.family == "ellipsoids" || p.family == "boxes") {
      require(static_cast<int>(p.exponents.size()) == p.d, "exponents",
              "needs exactly d = " + std::to_string(p.d) + " values");
      for (double a : p.exponents) require(a >= 1.0, "exponents", "every exponent must be at least 1");
      require(p.scale > 0.0 && p.scale <= 1.0, "scale", "must lie in (0, 1]");
      return make_affine_family(p.d, p.family == "boxes" ? ShapeKind::box : ShapeKind::ellipsoid, p.exponents,
                                p.scale, law);
    }
    if (p.family == "diophantine") {
      const auto tau = sorted_tau(p.tau, p.d, "tau");
      require(p.q_max >= 1, "q-max", "must be set for a Diophantine family");
      require(p.ball_scale >= 0.0, "ball-scale", "must be non-negative");
      return make_diophantine(p.d, tau, p.q_max, DiophantineOptions{p.ball_scale, p.q_min});
    }
    throw ParamError("family", "unknown family '" + p.family + "'");
  };
  LimsupFamily f = [&] {
    try {
      return built();
    } catch (const InvalidArgument& e) {
      throw ParamError("family", e.what());
    }
  }();
  return p.doubled ? with_doubled_radii(f) : f;
}

SamplingMode mode_from(const std::string& m) {
  if (m == "pair") return SamplingMode::pair;
  if (m == "radial") return SamplingMode::radial;
  throw ParamError("mode", "must be 'pair' or 'radial'");
}

struct Outcome {
  Json result;
  std::optional<std::string> csv;
};

Outcome cmd_energy(const Params& p) {
  const int d = static_cast<int>(p.center.size());
  require(d >= 1 && d <= kMaxDim, "center", "needs between 1 and " + std::to_string(kMaxDim) + " coordinates");
  require(p.t > 0.0 && p.t < d, "t", "must lie in (0, d)");
  require(!p.size.empty(), "size", "is required");
  for (double x : p.size) require(x > 0.0 && x < kMaxBoundingRadius, "size", "values must lie in (0, 1/4)");
  const TorusPoint center(p.center);
  Shape shape = [&] {
    if (p.shape == "ball") {
      require(p.size.size() == 1, "size", "a ball takes one radius");
      return Shape::ball(center, p.size.front());
    }
    std::vector<double> axes = p.size;
    if (axes.size() == 1) axes.assign(static_cast<std::size_t>(d), p.size.front());
    require(static_cast<int>(axes.size()) == d, "size", "needs 1 or d values");
    if (p.shape == "box") return Shape::box(center, axes);
    if (p.shape == "ellipsoid") return Shape::ellipsoid(center, axes);
    throw ParamError("shape", "must be ball, box or ellipsoid");
  }();
  EnergyOptions eo;
  eo.samples = p.samples ? p.samples : 1'000'000;
  eo.seed = p.seed;
  eo.mode = mode_from(p.mode);
  eo.workers = p.workers;
  const RieszEstimate e = energy_set(shape, p.t, eo);
  const double lam = measure(shape).value;
  Json r{{"shape", to_json(shape)}, {"energy", to_json(e)}, {"content_lower_bound", lam * lam / e.value}};
  if (!p.m.empty()) {
    require(p.trunc_s > p.t && p.trunc_s < d, "truncate-s", "must lie in (t, d)");
    for (double m : p.m) require(m > 0.0, "m", "values must be positive");
    const auto sweep = energy_truncated_sweep(shape, p.t, p.trunc_s, p.m, eo);
    Json arr = Json::array();
    for (std::size_t k = 0; k < sweep.size(); ++k) arr.push_back(Json{{"m", p.m[k]}, {"energy", to_json(sweep[k])}});
    r["truncated"] = Json{{"s", p.trunc_s}, {"values", arr}};
  }
  return {r, std::nullopt};
}

BoundOptions bound_options(const Params& p) {
  require(p.t_tol > 0.0 && p.t_tol < 0.5, "t-tol", "must lie in (0, 1/2)");
  require(p.j_min >= 1, "j-min", "must be at least 1");
  require(p.j_max == 0 || p.j_max > p.j_min, "j-max", "must exceed j-min");
  require(p.coarse_points >= 3, "coarse-points", "must be at least 3");
  BoundOptions bo;
  bo.j_min = p.j_min;
  bo.j_max = p.j_max;
  bo.t_tol = p.t_tol;
  bo.slope_tol = p.slope_tol;
  bo.coarse_points = p.coarse_points;
  bo.max_regression_points = p.regression_points;
  if (p.samples) bo.samples = p.samples;
  bo.seed = p.seed;
  bo.workers = p.workers;
  bo.half_window_diagnostic = !p.no_half_window;
  return bo;
}

Outcome cmd_bound(const Params& p) {
  const LimsupFamily f = family_from(p);
  const BoundOptions bo = bound_options(p);
  DimensionReport rep;
  if (p.method == "energy-ratio") {
    rep = bound_energy_ratio(f, bo);
  } else if (p.method == "singular-value") {
    rep = bound_singular_value(f, bo);
  } else if (p.method == "subset-search") {
    const std::vector<ShrinkMap> maps{identity_map(), inscribed_ball_map(), central_sub_box_map()};
    rep = bound_subset_search(f, maps, bo);
  } else {
    throw ParamError("method", "must be energy-ratio, singular-value or subset-search");
  }
  return {Json{{"family", to_json(f.traits())}, {"bound", to_json(rep)}}, bound_csv(rep)};
}

Outcome cmd_vitali(const Params& p) {
  const LimsupFamily f = family_from(p);
  require(p.n >= 1, "n", "must be at least 1");
  require(p.grid_bits >= 0 && p.grid_bits <= 24, "grid-bits", "must lie in [0, 24]");
  TruncationOptions to;
  to.max_j = p.max_j;
  to.grid.grid_bits = p.grid_bits;
  const TruncationWindow w = find_truncation(f, p.n, to);
  const SelectedUnion sel = build_selected_union(f, w, to.grid);
  return {Json{{"family", to_json(f.traits())}, {"selected", to_json(sel)}}, std::nullopt};
}

Outcome cmd_measures(const Params& p) {
  require(!p.ns.empty(), "n", "needs at least one value");
  for (auto n : p.ns) require(n >= 2, "n", "values must be at least 2");
  require(p.t > 0.0 && p.t < p.d, "t", "must lie in (0, d)");
  require(p.c > 0.0 && p.c < 1.0, "c", "must lie in (0, 1)");
  require(p.K > 0.0, "K", "must be positive");
  require(p.slack >= 1.0, "slack", "must be at least 1");
  require(p.probe_radius > 0.0 && p.probe_radius < kMaxBoundingRadius, "probe-radius", "must lie in (0, 1/4)");
  require(p.replicates >= 1, "replicates", "must be at least 1");
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha", "must lie in (0, 1)");
  TruncationOptions to;
  to.max_j = p.max_j;
  to.grid.grid_bits = p.grid_bits;
  const double lower = std::pow(5.0, -p.d) / p.slack;
  const double upper = p.slack * std::pow(5.0, p.d);
  Json runs = Json::array();
  std::vector<double> ns, values;
  for (std::size_t rep_i = 0; rep_i < p.replicates; ++rep_i) {
    Params q = p;
    q.seed = p.seed + rep_i;
    const LimsupFamily f = family_from(q);
    for (const std::uint64_t n : p.ns) {
      const TransferenceStage st = build_transference(f, n, to);
      const double floor = p.probe_floor > 0.0 ? p.probe_floor : default_probe_floor(f, st.selected.window);
      require(p.probe_radius >= floor, "probe-radius",
              "is below the probe floor " + std::to_string(floor) + " at n = " + std::to_string(n));
      DensityProbeOptions po{floor, p.probe_samples, q.seed};
      Rng rng = make_stream(q.seed, {0x50524f42ULL, n});
      Json ratios = Json::array();
      double lo = INFINITY, hi = 0.0;
      for (std::size_t k = 0; k < p.probes; ++k) {
        std::vector<double> x(static_cast<std::size_t>(p.d));
        for (double& v : x) v = uniform01(rng);
        const DensityProbe pr = density_probe(st.mu, Ball{TorusPoint(x), p.probe_radius}, po);
        lo = std::min(lo, pr.ratio);
        hi = std::max(hi, pr.ratio);
        ratios.push_back(pr.ratio);
      }
      EnergyReportOptions eo;
      if (p.samples) eo.energy.diagonal.samples = p.samples;
      eo.energy.diagonal.seed = q.seed;
      eo.energy.diagonal.mode = mode_from(p.mode);
      eo.energy.diagonal.workers = p.workers;
      eo.energy.cross_samples = p.cross_samples;
      const MuEnergyReport er = mu_energy_bound_report(f, st.selected.kept, p.t, p.c, p.K, eo);
      ns.push_back(static_cast<double>(n));
      values.push_back(er.mu_energy.total.value);
      const bool any = p.probes > 0;
      runs.push_back(Json{{"replicate", rep_i},
                          {"n", n},
                          {"window", to_json(st.selected.window)},
                          {"kept", st.selected.kept.size()},
                          {"selected_measure", st.selected.selected_measure},
                          {"lower_target", st.selected.lower_target},
                          {"bound_holds", st.selected.bound_holds},
                          {"probes",
                           Json{{"radius", p.probe_radius},
                                {"floor", floor},
                                {"lower", lower},
                                {"upper", upper},
                                {"min", any ? Json(lo) : Json(nullptr)},
                                {"max", any ? Json(hi) : Json(nullptr)},
                                {"all_within", !any || (lo >= lower && hi <= upper)},
                                {"ratios", ratios}}},
                          {"energy", to_json(er)}});
    }
  }
  Json r{{"runs", runs}};
  if (ns.size() >= 3) {
    r["trend"] = to_json(energy_trend(ns, values, p.alpha));
  } else {
    r["trend"] = nullptr;
  }
  return {r, std::nullopt};
}

std::vector<std::uint64_t> q_powers(const Params& p) {
  require(p.gen_lo >= 0 && p.gen_lo < 40, "gen-lo", "must lie in [0, 40)");
  require(p.gen_hi > p.gen_lo && p.gen_hi < 40, "gen-hi", "must exceed gen-lo and stay below 40");
  return powers_of_two(p.gen_lo, p.gen_hi);
}

CoveringOptions covering_options(const Params& p) {
  require(p.max_cells >= 1, "max-cells", "must be positive");
  return CoveringOptions{p.max_cells, p.workers};
}

Outcome cmd_boxdim(const Params& p) {
  const auto Qs = q_powers(p);
  Params q = p;
  if (q.family == "diophantine" && q.q_max == 0) q.q_max = (std::uint64_t{2} << p.gen_hi) - 1;
  const LimsupFamily f = family_from(q);
  const auto gens = q.family == "diophantine" ? diophantine_generations(f, Qs) : dyadic_generations(f, Qs);
  require(gens.size() >= 2, "gen-hi", "fewer than two non-empty generations");
  const CoveringCountCurve c = covering_counts(f, gens, covering_options(p));
  return {Json{{"family", to_json(f.traits())}, {"covering", to_json(c)}}, curve_csv(c)};
}

std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

Outcome cmd_diophantine(const Params& p, std::ostream& out) {
  check_dim(p.d);
  const auto tau = sorted_tau(p.tau, p.d, "tau");
  const double D = dimension_formula_D(tau);
  if (p.formula_only) {
    out << format_number(D) << '\n';
    return {nullptr, std::nullopt};
  }
  const auto Qs = q_powers(p);
  Params q = p;
  q.family = "diophantine";
  if (q.q_max == 0) q.q_max = (std::uint64_t{2} << p.gen_hi) - 1;
  const LimsupFamily f = family_from(q);
  const auto gens = diophantine_generations(f, Qs);
  require(gens.size() >= 2, "gen-hi", "fewer than two non-empty generations");
  const CoveringCountCurve c = covering_counts(f, gens, covering_options(p));
  BoundOptions bo = bound_options(p);
  if (bo.j_max == 0) bo.j_max = f.clamp_index(std::numeric_limits<std::uint64_t>::max());
  const DimensionReport rep = bound_singular_value(f, bo);
  Json r{{"formula", D},
         {"family", to_json(f.traits())},
         {"covering", to_json(c)},
         {"bound", to_json(rep)},
         {"covering_minus_formula", c.fitted_slope - D},
         {"bound_minus_formula", rep.s - D}};
  return {r, curve_csv(c)};
}

Outcome cmd_intersect(const Params& p) {
  check_dim(p.d);
  require(p.taus.size() >= 2 && p.taus.size() <= 4, "taus", "needs 2 to 4 exponent vectors");
  const auto Qs = q_powers(p);
  const std::uint64_t q_max = p.q_max ? p.q_max : (std::uint64_t{2} << p.gen_hi) - 1;
  std::vector<LimsupFamily> fams;
  for (const std::string& s : p.taus) {
    std::vector<double> tau;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      require(res.ec == std::errc{} && res.ptr == tok.data() + tok.size(), "taus", "'" + s + "' is not a number list");
      tau.push_back(v);
    }
    tau = sorted_tau(tau, p.d, "taus");
    try {
      fams.push_back(make_diophantine(p.d, tau, q_max, DiophantineOptions{p.ball_scale, p.q_min}));
    } catch (const InvalidArgument& e) {
      throw ParamError("taus", e.what());
    }
  }
  const IntersectionReport rep = intersection_experiment(fams, Qs, covering_options(p));
  std::ostringstream csv;
  csv.precision(17);
  csv << "Q,delta,count\n";
  for (const auto& g : rep.generations) csv << g.label << ',' << g.scale << ',' << g.count << '\n';
  return {Json{{"intersection", to_json(rep)}}, csv.str()};
}

bool passed_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string f = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == f || a.rfind(f + "=", 0) == 0; });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw ParamError("output", "cannot write " + path.string());
}

}  // namespace

int run_cli(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  std::optional<ConfigFile> cfg;
  std::map<std::string, int> injected;

  auto anchor = [&](const std::string& key) -> std::string {
    if (auto it = injected.find(key); it != injected.end()) return cfg->path + ":" + std::to_string(it->second) + ": " + key + ": ";
    return "--" + key + ": ";
  };

  CLI::App app{"Riesz-energy dimension bounds for limsup sets on the torus", "mtp"};
  app.require_subcommand(0, 1);
  Params p;
  std::map<std::string, std::unique_ptr<Binder>> binders;
  auto sub = [&](const std::string& name, const std::string& desc) {
    auto b = std::make_unique<Binder>(app.add_subcommand(name, desc));
    Binder& ref = *b;
    binders.emplace(name, std::move(b));
    return std::ref(ref);
  };

  {
    Binder& b = sub("energy", "Riesz energy of one shape");
    add_common(b, p, false);
    b.opt("shape", p.shape, "ball, box or ellipsoid");
    b.list("center", p.center, "Centre coordinates");
    b.list("size", p.size, "Radius, or half-widths / semi-axes");
    b.opt("t", p.t, "Energy exponent");
    b.opt("samples", p.samples, "Monte Carlo samples (default 10^6)");
    b.opt("mode", p.mode, "pair or radial sampling");
    b.opt("truncate-s", p.trunc_s, "Exponent s of the truncated energies");
    b.list("m", p.m, "Truncation levels");
  }
  {
    Binder& b = sub("bound", "Dimension lower bound of a limsup family");
    add_common(b, p, true);
    add_family(b, p);
    b.opt("method", p.method, "energy-ratio, singular-value or subset-search");
    b.opt("j-min", p.j_min, "First index of the window");
    b.opt("j-max", p.j_max, "Last index of the window (0 = default)");
    b.opt("t-tol", p.t_tol, "Bisection tolerance in t");
    b.opt("slope-tol", p.slope_tol, "Largest growth slope still counted as bounded");
    b.opt("coarse-points", p.coarse_points, "Coarse t grid size");
    b.opt("regression-points", p.regression_points, "Indices per regression (0 = default)");
    b.opt("samples", p.samples, "Monte Carlo samples per entry (default 20000)");
    b.flag("no-half-window", p.no_half_window, "Skip the half-window diagnostic");
  }
  {
    Binder& b = sub("vitali", "Truncation window and Vitali selection");
    add_common(b, p, false);
    add_family(b, p);
    b.opt("n", p.n, "Stage n");
    b.opt("max-j", p.max_j, "Index scan budget");
    b.opt("grid-bits", p.grid_bits, "Occupancy grid resolution (0 = default)");
  }
  {
    Binder& b = sub("measures", "Transference measures, density probes and energy bounds");
    add_common(b, p, false);
    add_family(b, p);
    b.list("n", p.ns, "Stages");
    b.opt("t", p.t, "Energy exponent");
    b.opt("c", p.c, "Separation constant");
    b.opt("K", p.K, "Claimed bound on the energy condition");
    b.opt("probes", p.probes, "Density probes per stage");
    b.opt("probe-radius", p.probe_radius, "Probe ball radius");
    b.opt("probe-floor", p.probe_floor, "Smallest allowed probe radius (0 = default)");
    b.opt("probe-samples", p.probe_samples, "Samples per straddling atom");
    b.opt("samples", p.samples, "Samples per diagonal energy (default 10^6)");
    b.opt("mode", p.mode, "pair or radial sampling");
    b.opt("cross-samples", p.cross_samples, "Samples per atom pair");
    b.opt("slack", p.slack, "Slack factor on the density bounds");
    b.opt("alpha", p.alpha, "Trend test level");
    b.opt("replicates", p.replicates, "Independent families (seeds seed, seed+1, ...)");
    b.opt("max-j", p.max_j, "Index scan budget");
    b.opt("grid-bits", p.grid_bits, "Occupancy grid resolution (0 = default)");
  }
  {
    Binder& b = sub("boxdim", "Covering-count dimension estimate");
    add_common(b, p, true);
    add_family(b, p);
    b.opt("gen-lo", p.gen_lo, "Generations start at 2^gen-lo");
    b.opt("gen-hi", p.gen_hi, "Generations end at 2^gen-hi");
    b.opt("max-cells", p.max_cells, "Occupied-cell budget per generation");
  }
  {
    Binder& b = sub("diophantine", "Dimension formula, covering counts and bound for W(tau)");
    add_common(b, p, true);
    b.opt("d", p.d, "Dimension");
    b.list("tau", p.tau, "Exponents");
    b.flag("formula-only", p.formula_only, "Print the formula value and exit");
    b.opt("q-min", p.q_min, "First denominator (0 = automatic)");
    b.opt("q-max", p.q_max, "Last denominator (0 = 2^(gen-hi+1) - 1)");
    b.opt("ball-scale", p.ball_scale, "Enclosing radius prefactor (0 = sqrt(d))");
    b.opt("gen-lo", p.gen_lo, "Generations start at Q = 2^gen-lo");
    b.opt("gen-hi", p.gen_hi, "Generations end at Q = 2^gen-hi");
    b.opt("max-cells", p.max_cells, "Occupied-cell budget per generation");
    b.opt("j-max", p.j_max, "Last index for the bound (0 = whole family)");
    b.opt("t-tol", p.t_tol, "Bisection tolerance in t");
    b.opt("slope-tol", p.slope_tol, "Largest growth slope still counted as bounded");
    b.opt("coarse-points", p.coarse_points, "Coarse t grid size");
    b.flag("no-half-window", p.no_half_window, "Skip the half-window diagnostic");
  }
  {
    Binder& b = sub("intersect", "Covering counts of intersected W(tau) families");
    add_common(b, p, true);
    b.opt("d", p.d, "Dimension");
    b.opt("taus", p.taus, "Exponent vectors, one per family, comma-separated within a family");
    b.opt("q-min", p.q_min, "First denominator (0 = automatic)");
    b.opt("q-max", p.q_max, "Last denominator (0 = 2^(gen-hi+1) - 1)");
    b.opt("ball-scale", p.ball_scale, "Enclosing radius prefactor (0 = sqrt(d))");
    b.opt("gen-lo", p.gen_lo, "Generations start at Q = 2^gen-lo");
    b.opt("gen-hi", p.gen_hi, "Generations end at Q = 2^gen-hi");
    b.opt("max-cells", p.max_cells, "Occupied-cell budget per generation");
  }

  try {
    // Pull out --config; it is not a subcommand option.
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args_in.size(); ++i) {
      const std::string& a = args_in[i];
      if (a == "--config") {
        if (i + 1 >= args_in.size()) throw ConfigError("--config: missing path");
        config_path = args_in[++i];
      } else if (a.rfind("--config=", 0) == 0) {
        config_path = a.substr(9);
      } else {
        args.push_back(a);
      }
    }
    if (config_path) cfg = load_config(*config_path);

    auto is_command = [](const std::string& a) {
      return std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end();
    };
    std::string command;
    if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
      if (!is_command(args.front())) throw ConfigError("unknown command '" + args.front() + "'");
      command = args.front();
    }
    if (cfg) {
      if (auto it = cfg->entries.find("command"); it != cfg->entries.end()) {
        const std::string where = cfg->path + ":" + std::to_string(it->second.line) + ": ";
        if (it->second.values.size() != 1 || !is_command(it->second.values.front())) {
          throw ConfigError(where + "unknown command");
        }
        if (command.empty()) {
          command = it->second.values.front();
          args.insert(args.begin(), command);
        }
      }
    }
    const bool help = std::any_of(args.begin(), args.end(), [](const std::string& a) { return a == "--help" || a == "-h"; });
    if (command.empty() && !help) {
      throw ConfigError("missing command (one of energy, bound, vitali, measures, boxdim, diophantine, intersect)");
    }

    if (cfg && !command.empty()) {
      const Binder& b = *binders.at(command);
      for (const auto& [key, e] : cfg->entries) {
        if (key == "command") continue;
        const std::string where = cfg->path + ":" + std::to_string(e.line) + ": ";
        const CLI::Option* o = b.app()->get_option_no_throw("--" + key);
        if (!o) throw ConfigError(where + "unknown key '" + key + "' for command " + command);
        if (passed_on_command_line(args, key)) continue;
        injected[key] = e.line;
        if (b.is_flag(key)) {
          bool on = false;
          try {
            on = YAML::Load(e.values.front()).as<bool>();
          } catch (const YAML::Exception&) {
            throw ConfigError(where + "'" + key + "' must be true or false");
          }
          if (e.values.size() != 1) throw ConfigError(where + "'" + key + "' must be true or false");
          if (on) args.push_back("--" + key);
          continue;
        }
        if (e.values.size() != 1 && o->get_expected_max() == 1) {
          throw ConfigError(where + "'" + key + "' takes a single value");
        }
        for (const auto& v : e.values) args.push_back("--" + key + "=" + v);
      }
    }

    try {
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << (command.empty() ? app.help() : binders.at(command)->app()->help());
      return 0;
    } catch (const CLI::ParseError& e) {
      std::string msg = e.what();
      for (const auto& [key, line] : injected) {
        if (msg.find("--" + key) != std::string::npos) {
          err << "error: " << cfg->path << ":" << line << ": " << msg << '\n';
          return 2;
        }
      }
      err << "error: " << msg << '\n';
      return 2;
    }

    const Binder& b = *binders.at(command);
    require(p.workers >= 1, "workers", "must be at least 1");
    Outcome o;
    if (command == "energy") o = cmd_energy(p);
    else if (command == "bound") o = cmd_bound(p);
    else if (command == "vitali") o = cmd_vitali(p);
    else if (command == "measures") o = cmd_measures(p);
    else if (command == "boxdim") o = cmd_boxdim(p);
    else if (command == "diophantine") o = cmd_diophantine(p, out);
    else o = cmd_intersect(p);
    if (o.result.is_null()) return 0;

    const Json report{{"command", command}, {"config", b.resolved()}, {"result", o.result}};
    const std::string text = report.dump(2) + "\n";
    const char* env_dir = std::getenv("MTP_OUTPUT_DIR");
    const std::optional<std::filesystem::path> dir =
        env_dir && *env_dir ? std::optional<std::filesystem::path>(env_dir) : std::nullopt;
    if (!p.output.empty()) {
      write_text(p.output, text);
    } else if (dir) {
      write_text(*dir / (command + ".json"), text);
    } else {
      out << text;
    }
    if (o.csv) {
      if (!p.csv.empty()) {
        write_text(p.csv, *o.csv);
      } else if (dir) {
        write_text(*dir / (command + ".csv"), *o.csv);
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParamError& e) {
    err << "error: " << anchor(e.key) << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const EstimatorFailure& e) {
    err << "failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mtp::cli

#include "mtp/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "mtp/errors.hpp"
#include "mtp/parallel.hpp"
#include "mtp/stats.hpp"

namespace mtp {

namespace {

constexpr std::uint64_t kExactJMax = 10'000;
constexpr std::uint64_t kMonteCarloJMax = 100;
constexpr std::size_t kMonteCarloPoints = 64;

// log R_j(t) for a fixed list of entries.
class RatioModel {
 public:
  virtual ~RatioModel() = default;
  virtual void log_ratios(double t, std::vector<double>& out) const = 0;
  virtual std::string name() const = 0;
  /// Largest t at which the model may be evaluated.
  virtual double t_max() const = 0;

  std::vector<double> log_inv_r;
};

class IntervalModel final : public RatioModel {
 public:
  explicit IntervalModel(const std::vector<BallSeqEntry>& es) {
    for (const auto& e : es) {
      log_inv_r.push_back(-std::log(e.ball.radius));
      log_ball_.push_back(std::log(2.0 * e.ball.radius));
      log_len_.push_back(std::log(2.0 * e.subset.half_extents()[0]));
    }
  }
  void log_ratios(double t, std::vector<double>& out) const override {
    const double c = std::log(2.0) - std::log((1.0 - t) * (2.0 - t));
    out.resize(log_ball_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = log_ball_[k] + c - t * log_len_[k];
  }
  std::string name() const override { return "closed_form"; }
  double t_max() const override { return 1.0; }

 private:
  std::vector<double> log_ball_, log_len_;
};

class MonteCarloModel final : public RatioModel {
 public:
  MonteCarloModel(const std::vector<BallSeqEntry>& es, const BoundOptions& o) : dim_(es.front().subset.dim()) {
    caches_.resize(es.size());
    // One shared stream for every entry: the draws are common random
    // numbers, so affine images of one shape see the same geometry.
    parallel_for(es.size(), o.workers, [&](std::size_t k) {
      caches_[k] = std::make_unique<KernelSampleCache>(KernelSampleCache::build(es[k].subset, o.samples, o.seed, 0));
    });
    for (const auto& e : es) {
      log_inv_r.push_back(-std::log(e.ball.radius));
      log_ball_.push_back(std::log(measure(Shape::ball(e.ball)).value));
    }
  }
  void log_ratios(double t, std::vector<double>& out) const override {
    out.resize(caches_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double kernel = caches_[k]->mean_kernel(t).value;
      if (!(kernel > 0.0)) throw EstimatorFailure("Monte Carlo kernel mean is not positive");
      out[k] = std::log(kernel) + log_ball_[k];
    }
  }
  std::string name() const override { return "monte_carlo"; }
  double t_max() const override { return dim_; }

 private:
  int dim_;
  std::vector<std::unique_ptr<KernelSampleCache>> caches_;
  std::vector<double> log_ball_;
};

class SingularModel final : public RatioModel {
 public:
  explicit SingularModel(const std::vector<BallSeqEntry>& es) : dim_(es.front().subset.dim()) {
    for (const auto& e : es) {
      log_inv_r.push_back(-std::log(e.ball.radius));
      log_ball_.push_back(std::log(measure(Shape::ball(e.ball)).value));
      profiles_.push_back(SingularValueProfile::of(e.subset));
    }
  }
  void log_ratios(double t, std::vector<double>& out) const override {
    out.resize(profiles_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = log_ball_[k] - log_singular_value_fn(profiles_[k], t);
  }
  std::string name() const override { return "singular_value"; }
  double t_max() const override { return dim_; }

 private:
  int dim_;
  std::vector<double> log_ball_;
  std::vector<SingularValueProfile> profiles_;
};

struct Window {
  std::uint64_t j_min = 1;
  std::uint64_t j_max = 1;
  std::vector<std::uint64_t> indices;
};

Window resolve_window(const LimsupFamily& family, const BoundOptions& o, bool exact) {
  if (o.j_min == 0) throw InvalidArgument("j_min must be at least 1");
  if (!(o.t_tol > 0.0)) throw InvalidArgument("t_tol must be positive");
  if (o.coarse_points < 2) throw InvalidArgument("coarse_points must be at least 2");
  Window w;
  w.j_min = o.j_min;
  w.j_max = family.clamp_index(o.j_max != 0 ? o.j_max : (exact ? kExactJMax : kMonteCarloJMax));
  if (w.j_max < w.j_min + 2) throw InvalidArgument("the index window needs at least three entries");
  const std::size_t points = o.max_regression_points != 0 ? o.max_regression_points : (exact ? 0 : kMonteCarloPoints);
  w.indices = regression_indices(w.j_min, w.j_max, points);
  return w;
}

std::vector<BallSeqEntry> load_entries(const LimsupFamily& family, const std::vector<std::uint64_t>& idx,
                                       unsigned workers) {
  std::vector<std::optional<BallSeqEntry>> tmp(idx.size());
  parallel_for(idx.size(), workers, [&](std::size_t k) { tmp[k] = family.entry(idx[k]); });
  std::vector<BallSeqEntry> out;
  out.reserve(idx.size());
  for (auto& e : tmp) out.push_back(std::move(*e));
  return out;
}

class Search {
 public:
  Search(const RatioModel& model, const BoundOptions& o) : model_(model), o_(o) {}

  TGridPoint evaluate(double t) {
    model_.log_ratios(t, buf_);
    TGridPoint p;
    p.t = t;
    const LinearFit fit = least_squares(model_.log_inv_r, buf_);
    p.slope = fit.slope;
    p.bounded = fit.slope <= o_.slope_tol;
    p.sup_stat = std::exp(*std::max_element(buf_.begin(), buf_.end()));
    points_.push_back(p);
    return p;
  }

  double run(bool& smoothed) {
    const double hi_end = model_.t_max();
    const std::size_t n = o_.coarse_points;
    std::vector<TGridPoint> coarse;
    for (std::size_t k = 1; k <= n; ++k) {
      coarse.push_back(evaluate(hi_end * static_cast<double>(k) / static_cast<double>(n + 1)));
    }
    std::vector<bool> flags;
    for (const auto& p : coarse) flags.push_back(p.bounded);
    smoothed = false;
    if (!monotone(flags)) {
      smoothed = true;
      std::vector<bool> sm = flags;
      for (std::size_t k = 1; k + 1 < flags.size(); ++k) {
        const int votes = int(flags[k - 1]) + int(flags[k]) + int(flags[k + 1]);
        sm[k] = votes >= 2;
      }
      if (!monotone(sm)) {
        throw EstimatorFailure(
            "bounded/unbounded pattern over t is not monotone even after smoothing; the ratio estimates are too "
            "noisy, rerun with a larger sample budget");
      }
      flags = sm;
      for (std::size_t k = 0; k < coarse.size(); ++k) points_[k].bounded = flags[k];
    }
    const auto first_unbounded = static_cast<std::size_t>(std::find(flags.begin(), flags.end(), false) - flags.begin());
    double lo, hi;
    if (first_unbounded == flags.size()) {
      const double top = hi_end - o_.t_tol;
      if (evaluate(top).bounded) return hi_end;
      lo = coarse.back().t;
      hi = top;
    } else if (first_unbounded == 0) {
      const double bottom = o_.t_tol;
      if (!evaluate(bottom).bounded) return 0.0;
      lo = bottom;
      hi = coarse.front().t;
    } else {
      lo = coarse[first_unbounded - 1].t;
      hi = coarse[first_unbounded].t;
    }
    while (hi - lo > o_.t_tol) {
      const double mid = 0.5 * (lo + hi);
      (evaluate(mid).bounded ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  std::vector<TGridPoint> grid() const {
    std::vector<TGridPoint> g = points_;
    std::sort(g.begin(), g.end(), [](const TGridPoint& a, const TGridPoint& b) { return a.t < b.t; });
    return g;
  }

 private:
  static bool monotone(const std::vector<bool>& f) {
    bool seen_false = false;
    for (bool b : f) {
      if (!b) seen_false = true;
      if (b && seen_false) return false;
    }
    return true;
  }

  const RatioModel& model_;
  const BoundOptions& o_;
  std::vector<double> buf_;
  std::vector<TGridPoint> points_;
};

enum class ModelKind { energy, singular };

DimensionReport run_bound(const LimsupFamily& family, const BoundOptions& o, ModelKind kind, int depth) {
  // Peek at the first entry to pick the exact or Monte Carlo defaults.
  const BallSeqEntry probe = family.entry(o.j_min);
  const bool exact = kind == ModelKind::singular || probe.subset.is_interval();
  const Window w = resolve_window(family, o, exact);
  const std::vector<BallSeqEntry> entries = load_entries(family, w.indices, o.workers);

  std::unique_ptr<RatioModel> model;
  if (kind == ModelKind::singular) {
    bool any_box = false, any_round = false;
    for (const auto& e : entries) {
      switch (e.subset.kind()) {
        case ShapeKind::box: any_box = true; break;
        case ShapeKind::ball:
        case ShapeKind::ellipsoid: any_round = true; break;
        case ShapeKind::indicator:
          throw InvalidArgument("singular value bound needs ball, box or ellipsoid subsets (entry " +
                                std::to_string(e.index) + " is an indicator)");
      }
    }
    if (any_box && any_round) throw InvalidArgument("singular value bound: mixed box and ellipsoid subsets");
    model = std::make_unique<SingularModel>(entries);
  } else {
    const bool all_intervals =
        std::all_of(entries.begin(), entries.end(), [](const BallSeqEntry& e) { return e.subset.is_interval(); });
    if (all_intervals) {
      model = std::make_unique<IntervalModel>(entries);
    } else {
      model = std::make_unique<MonteCarloModel>(entries, o);
    }
  }

  DimensionReport rep;
  rep.method = kind == ModelKind::singular ? BoundMethod::singular_value : BoundMethod::energy_ratio;
  rep.ratio_model = model->name();
  rep.j_min = w.j_min;
  rep.j_max = w.j_max;
  rep.regression_points = w.indices.size();
  rep.t_tol = o.t_tol;
  rep.slope_tol = o.slope_tol;
  Search search(*model, o);
  rep.s = search.run(rep.smoothed);
  rep.t_grid = search.grid();

  if (o.half_window_diagnostic && depth == 0 && w.j_max / 2 >= w.j_min + 2) {
    BoundOptions half = o;
    half.j_max = w.j_max / 2;
    half.half_window_diagnostic = false;
    if (half.max_regression_points == 0 && !exact) half.max_regression_points = kMonteCarloPoints;
    rep.s_half_window = run_bound(family, half, kind, depth + 1).s;
  }
  return rep;
}

}  // namespace

std::string_view to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::energy_ratio: return "energy_ratio";
    case BoundMethod::singular_value: return "singular_value";
    case BoundMethod::subset_search: return "subset_search";
  }
  return "unknown";
}

std::vector<std::uint64_t> regression_indices(std::uint64_t lo, std::uint64_t hi, std::size_t count) {
  if (lo == 0 || hi < lo) throw InvalidArgument("invalid index window");
  const std::uint64_t span = hi - lo + 1;
  std::vector<std::uint64_t> out;
  if (count == 0 || count >= span) {
    out.reserve(span);
    for (std::uint64_t j = lo; j <= hi; ++j) out.push_back(j);
    return out;
  }
  if (count < 3) throw InvalidArgument("need at least three regression points");
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (std::size_t k = 0; k < count; ++k) {
    const double x = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
    auto j = static_cast<std::uint64_t>(std::llround(std::exp(x)));
    j = std::clamp(j, lo, hi);
    if (out.empty() || j > out.back()) out.push_back(j);
  }
  return out;
}

DimensionReport bound_energy_ratio(const LimsupFamily& family, const BoundOptions& options) {
  return run_bound(family, options, ModelKind::energy, 0);
}

DimensionReport bound_singular_value(const LimsupFamily& family, const BoundOptions& options) {
  return run_bound(family, options, ModelKind::singular, 0);
}

ShrinkMap identity_map() {
  return {"identity", [](const Shape& u) { return u; }};
}

ShrinkMap inscribed_ball_map() {
  return {"inscribed_ball", [](const Shape& u) {
            if (!u.is_closed_form()) throw InvalidArgument("inscribed_ball needs a ball, box or ellipsoid");
            const LocalVec e = u.half_extents();
            return Shape::ball(u.center(), *std::min_element(e.begin(), e.begin() + u.dim()));
          }};
}

ShrinkMap central_sub_box_map() {
  return {"central_sub_box", [](const Shape& u) {
            if (!u.is_closed_form()) throw InvalidArgument("central_sub_box needs a ball, box or ellipsoid");
            const LocalVec e = u.half_extents();
            const double f = u.kind() == ShapeKind::box ? 0.5 : 1.0 / std::sqrt(static_cast<double>(u.dim()));
            std::vector<double> hw(e.begin(), e.begin() + u.dim());
            for (double& h : hw) h *= f;
            return Shape::box(u.center(), hw);
          }};
}

DimensionReport bound_subset_search(const LimsupFamily& family, std::span<const ShrinkMap> maps,
                                    const BoundOptions& options) {
  if (maps.empty()) throw InvalidArgument("subset search needs at least one shrink map");
  DimensionReport best;
  bool have = false;
  for (const ShrinkMap& m : maps) {
    if (!m.apply) throw InvalidArgument("shrink map '" + m.name + "' has no function");
    FamilyTraits t = family.traits();
    t.kind += "/" + m.name;
    const LimsupFamily sub(std::move(t), [family, m](std::uint64_t j) {
      BallSeqEntry e = family.entry(j);
      Shape v = m.apply(e.subset);
      if (v.dim() != e.subset.dim()) throw InvalidArgument("shrink map '" + m.name + "' changed the dimension");
      e.subset = std::move(v);
      return e;
    });

    // Sampled containment V_j inside U_j on a spread of indices.
    const std::uint64_t hi = family.clamp_index(options.j_max != 0 ? options.j_max : kMonteCarloJMax);
    for (std::uint64_t j : regression_indices(options.j_min, std::max(hi, options.j_min + 2), 8)) {
      const BallSeqEntry u = family.entry(j);
      const BallSeqEntry v = sub.entry(j);
      Rng rng = make_stream(options.seed, {0x5355, j});
      ShapeSampler sampler(v.subset);
      for (int i = 0; i < 200; ++i) {
        if (!u.subset.contains(sampler.point(rng))) {
          throw InvalidArgument("shrink map '" + m.name + "' output is not contained in U_" + std::to_string(j));
        }
      }
    }

    DimensionReport r = bound_energy_ratio(sub, options);
    best.candidates.emplace_back(m.name, r.s);
    if (!have || r.s > best.s) {
      auto candidates = std::move(best.candidates);
      best = std::move(r);
      best.candidates = std::move(candidates);
      best.winning_map = m.name;
      have = true;
    }
  }
  best.method = BoundMethod::subset_search;
  return best;
}

double dimension_formula_D(std::span<const double> tau) {
  const std::size_t d = tau.size();
  if (d == 0) throw InvalidArgument("tau must have at least one entry");
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(tau[i])) throw InvalidArgument("tau entries must be finite");
    if (tau[i] < 1.0 / static_cast<double>(d) - 1e-12) {
      throw InvalidArgument("tau_" + std::to_string(i + 1) + " = " + std::to_string(tau[i]) + " is below 1/d");
    }
    if (i > 0 && tau[i] < tau[i - 1]) throw InvalidArgument("tau must be sorted ascending");
  }
  double best = std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (std::size_t j = 1; j <= d; ++j) {
    prefix += tau[j - 1];
    const double v = (static_cast<double>(d) + 1.0 + static_cast<double>(j) * tau[j - 1] - prefix) / (1.0 + tau[j - 1]);
    best = std::min(best, v);
  }
  return best;
}

double dimension_formula_D_sorted(std::span<const double> tau) {
  std::vector<double> s(tau.begin(), tau.end());
  std::sort(s.begin(), s.end());
  return dimension_formula_D(s);
}

}  // namespace mtp

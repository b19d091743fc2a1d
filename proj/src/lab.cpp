#include "mtp/lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtp/bound.hpp"
#include "mtp/errors.hpp"
#include "mtp/parallel.hpp"
#include "mtp/stats.hpp"

namespace mtp {

namespace {

// Axis-aligned box in absolute coordinates; after splitting it lies in [0,1)^d.
struct AbsBox {
  LocalVec lo{};
  LocalVec hi{};
};

AbsBox bounding_box(const Shape& s) {
  const int d = s.dim();
  AbsBox b;
  if (s.is_closed_form()) {
    const LocalVec e = s.half_extents();
    for (int i = 0; i < d; ++i) {
      b.lo[i] = s.center()[i] - e[i];
      b.hi[i] = s.center()[i] + e[i];
    }
  } else {
    const Ball bb = s.bounding_ball();
    for (int i = 0; i < d; ++i) {
      b.lo[i] = bb.center[i] - bb.radius;
      b.hi[i] = bb.center[i] + bb.radius;
    }
  }
  return b;
}

// Pieces of a box of width < 1 per axis, translated into [0,1)^d.
void split_wrapped(const AbsBox& b, int d, std::vector<AbsBox>& out) {
  std::vector<AbsBox> cur{b};
  for (int i = 0; i < d; ++i) {
    std::vector<AbsBox> next;
    for (AbsBox x : cur) {
      if (x.lo[i] < 0.0) {
        AbsBox left = x;
        left.lo[i] += 1.0;
        left.hi[i] = 1.0;
        next.push_back(left);
        x.lo[i] = 0.0;
      } else if (x.hi[i] > 1.0) {
        AbsBox right = x;
        right.lo[i] = 0.0;
        right.hi[i] -= 1.0;
        next.push_back(right);
        x.hi[i] = 1.0;
      }
      if (x.hi[i] > x.lo[i]) next.push_back(x);
    }
    cur = std::move(next);
  }
  out.insert(out.end(), cur.begin(), cur.end());
}

int scale_bits(double width, int d) {
  if (!(width > 0.0)) throw InvalidArgument("generation scale must be positive");
  const int k = std::max(0, static_cast<int>(std::ceil(-std::log2(width) - 1e-12)));
  if (k * d > 64) {
    throw BudgetExceeded("cell side 2^-" + std::to_string(k) + " in dimension " + std::to_string(d) +
                         " cannot be indexed; use coarser generations");
  }
  return k;
}

// Cells of side 2^{-bits} meeting the open box [lo, hi], box inside [0,1]^d.
void append_cells(const AbsBox& b, int d, int bits, std::vector<std::uint64_t>& keys) {
  const double n = std::ldexp(1.0, bits);
  const std::uint64_t top = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  std::array<std::uint64_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    const double a = std::floor(b.lo[i] * n);
    const double c = std::ceil(b.hi[i] * n) - 1.0;
    lo[i] = static_cast<std::uint64_t>(std::clamp(a, 0.0, static_cast<double>(top)));
    hi[i] = static_cast<std::uint64_t>(std::clamp(std::max(a, c), 0.0, static_cast<double>(top)));
  }
  std::array<std::uint64_t, kMaxDim> k = lo;
  for (;;) {
    std::uint64_t key = 0;
    for (int i = 0; i < d; ++i) {
      if (bits * i < 64) key |= k[i] << (bits * i);
    }
    keys.push_back(key);
    int i = d - 1;
    while (i >= 0 && k[i] == hi[i]) {
      k[i] = lo[i];
      --i;
    }
    if (i < 0) break;
    ++k[i];
  }
}

std::uint64_t count_unique(std::vector<std::uint64_t>& keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys.size();
}

void compact_if_large(std::vector<std::uint64_t>& keys, std::uint64_t cap) {
  if (keys.size() < 4 * cap + 1'000'000) return;
  if (count_unique(keys) > cap) {
    throw BudgetExceeded("more than " + std::to_string(cap) + " occupied cells in one generation");
  }
}

double min_full_width(const Shape& s) {
  if (s.is_closed_form()) {
    const LocalVec e = s.half_extents();
    return 2.0 * *std::min_element(e.begin(), e.begin() + s.dim());
  }
  return 2.0 * s.bounding_ball().radius;
}

std::vector<AbsBox> generation_boxes(const LimsupFamily& f, const Generation& g) {
  std::vector<AbsBox> out;
  out.reserve(g.last - g.first + 1);
  for (std::uint64_t j = g.first; j <= g.last; ++j) split_wrapped(bounding_box(f.entry(j).subset), f.dim(), out);
  return out;
}

std::uint64_t count_box_cells(const std::vector<AbsBox>& boxes, int d, int bits, std::uint64_t cap) {
  std::vector<std::uint64_t> keys;
  for (const AbsBox& b : boxes) {
    append_cells(b, d, bits, keys);
    compact_if_large(keys, cap);
  }
  const std::uint64_t n = count_unique(keys);
  if (n > cap) throw BudgetExceeded("more than " + std::to_string(cap) + " occupied cells in one generation");
  return n;
}

// Pairwise intersections of two box lists, via a hash grid sized to the
// widest box so each box touches at most two cells per axis.
std::vector<AbsBox> intersect_boxes(const std::vector<AbsBox>& a, const std::vector<AbsBox>& b, int d) {
  if (a.empty() || b.empty()) return {};
  double width = 0.0;
  for (const auto* list : {&a, &b}) {
    for (const AbsBox& x : *list) {
      for (int i = 0; i < d; ++i) width = std::max(width, x.hi[i] - x.lo[i]);
    }
  }
  const int bits = std::max(0, scale_bits(width, d) - 1);
  auto cells_of = [&](const AbsBox& x, std::vector<std::uint64_t>& keys) {
    keys.clear();
    append_cells(x, d, bits, keys);
  };
  std::vector<std::pair<std::uint64_t, std::uint32_t>> index;
  std::vector<std::uint64_t> keys;
  for (std::size_t k = 0; k < b.size(); ++k) {
    cells_of(b[k], keys);
    for (std::uint64_t key : keys) index.emplace_back(key, static_cast<std::uint32_t>(k));
  }
  std::sort(index.begin(), index.end());
  std::vector<AbsBox> out;
  std::vector<std::uint32_t> seen;
  for (const AbsBox& x : a) {
    cells_of(x, keys);
    seen.clear();
    for (std::uint64_t key : keys) {
      auto it = std::lower_bound(index.begin(), index.end(), std::make_pair(key, std::uint32_t{0}));
      for (; it != index.end() && it->first == key; ++it) seen.push_back(it->second);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::uint32_t k : seen) {
      AbsBox r;
      bool ok = true;
      for (int i = 0; i < d && ok; ++i) {
        r.lo[i] = std::max(x.lo[i], b[k].lo[i]);
        r.hi[i] = std::min(x.hi[i], b[k].hi[i]);
        ok = r.hi[i] > r.lo[i];
      }
      if (ok) out.push_back(r);
    }
  }
  return out;
}

void check_cube(const DyadicCube& cube, int d, double t, int max_depth) {
  if (cube.level < 0 || cube.level > 62) throw InvalidArgument("cube level out of range");
  if (static_cast<int>(cube.corner.size()) != d) throw InvalidArgument("cube corner has the wrong dimension");
  for (std::uint64_t k : cube.corner) {
    if (k >= (std::uint64_t{1} << cube.level)) throw InvalidArgument("cube corner outside the torus");
  }
  if (!(t > 0.0) || t > d) throw InvalidArgument("t must lie in (0, d]");
  if (max_depth < cube.level) throw InvalidArgument("max_depth must be at least the cube level");
  if ((max_depth - cube.level) * d > 62) throw InvalidArgument("max_depth too deep for this dimension");
}

template <class AddCells>
ContentEstimate content_over_depths(const DyadicCube& cube, int d, double t, int max_depth, AddCells add) {
  ContentEstimate est;
  est.cube = cube;
  est.t = t;
  est.value = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> keys;
  for (int depth = cube.level; depth <= max_depth; ++depth) {
    keys.clear();
    add(depth - cube.level, keys);
    const std::uint64_t n = count_unique(keys);
    const double diam = std::sqrt(static_cast<double>(d)) * std::ldexp(1.0, -depth);
    const double v = static_cast<double>(n) * std::pow(diam, t);
    est.per_depth.push_back(v);
    est.occupied.push_back(n);
    if (v < est.value) {
      est.value = v;
      est.depth = depth;
    }
  }
  return est;
}

}  // namespace

std::vector<std::uint64_t> powers_of_two(int lo, int hi) {
  if (lo < 0 || hi < lo || hi > 62) throw InvalidArgument("invalid power-of-two range");
  std::vector<std::uint64_t> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::uint64_t{1} << k);
  return out;
}

std::vector<Generation> diophantine_generations(const LimsupFamily& family, std::span<const std::uint64_t> Qs) {
  std::vector<Generation> out;
  for (std::uint64_t Q : Qs) {
    if (Q == 0) throw InvalidArgument("generation Q must be positive");
    const auto r = diophantine_index_range(family, Q, 2 * Q - 1);
    if (r) out.push_back(Generation{r->first, r->second, static_cast<double>(Q)});
  }
  return out;
}

std::vector<Generation> dyadic_generations(const LimsupFamily& family, std::span<const std::uint64_t> Js) {
  std::vector<Generation> out;
  for (std::uint64_t J : Js) {
    if (J == 0) throw InvalidArgument("generation J must be positive");
    const std::uint64_t last = family.clamp_index(2 * J - 1);
    if (last >= J) out.push_back(Generation{J, last, static_cast<double>(J)});
  }
  return out;
}

CoveringCountCurve covering_counts(const LimsupFamily& family, std::span<const Generation> generations,
                                   const CoveringOptions& options) {
  if (generations.size() < 2) throw InvalidArgument("covering_counts needs at least two generations");
  const int d = family.dim();
  std::vector<double> scales(generations.size());
  std::vector<int> bits(generations.size());
  for (std::size_t g = 0; g < generations.size(); ++g) {
    const Generation& gen = generations[g];
    if (gen.first == 0 || gen.last < gen.first) throw InvalidArgument("empty or invalid generation");
    bits[g] = scale_bits(min_full_width(family.entry(gen.first).subset), d);
    scales[g] = std::ldexp(1.0, -bits[g]);
    if (g > 0 && !(scales[g] <= scales[g - 1])) throw InvalidArgument("generation scales must be decreasing");
  }
  CoveringCountCurve c;
  c.scales = scales;
  c.counts.resize(generations.size());
  parallel_for(generations.size(), options.workers, [&](std::size_t g) {
    c.counts[g] = count_box_cells(generation_boxes(family, generations[g]), d, bits[g], options.max_cells);
  });
  std::vector<double> x, y;
  for (std::size_t g = 0; g < generations.size(); ++g) {
    c.labels.push_back(generations[g].label);
    x.push_back(-std::log(scales[g]));
    y.push_back(std::log(static_cast<double>(c.counts[g])));
  }
  const LinearFit fit = least_squares(x, y);
  c.fitted_slope = fit.slope;
  c.intercept = fit.intercept;
  c.residuals = fit.residuals;
  return c;
}

ContentEstimate outer_content_estimate(std::span<const Shape> shapes, const DyadicCube& cube, double t,
                                       int max_depth) {
  if (shapes.empty()) throw InvalidArgument("outer_content_estimate needs at least one shape");
  const int d = shapes.front().dim();
  check_cube(cube, d, t, max_depth);
  const double side = std::ldexp(1.0, -cube.level);
  std::vector<AbsBox> local;
  for (const Shape& s : shapes) {
    if (s.dim() != d) throw InvalidArgument("shapes of different dimension");
    std::vector<AbsBox> pieces;
    split_wrapped(bounding_box(s), d, pieces);
    for (const AbsBox& p : pieces) {
      AbsBox r;
      bool ok = true;
      for (int i = 0; i < d && ok; ++i) {
        const double a = static_cast<double>(cube.corner[i]) * side;
        r.lo[i] = (std::max(p.lo[i], a) - a) / side;
        r.hi[i] = (std::min(p.hi[i], a + side) - a) / side;
        ok = r.hi[i] > r.lo[i];
      }
      if (ok) local.push_back(r);
    }
  }
  return content_over_depths(cube, d, t, max_depth, [&](int rel, std::vector<std::uint64_t>& keys) {
    for (const AbsBox& b : local) append_cells(b, d, rel, keys);
  });
}

ContentEstimate outer_content_estimate(std::span<const TorusPoint> points, const DyadicCube& cube, double t,
                                       int max_depth) {
  if (points.empty()) throw InvalidArgument("outer_content_estimate needs at least one point");
  const int d = points.front().dim();
  check_cube(cube, d, t, max_depth);
  const double side = std::ldexp(1.0, -cube.level);
  std::vector<LocalVec> local;
  for (const TorusPoint& p : points) {
    if (p.dim() != d) throw InvalidArgument("points of different dimension");
    LocalVec v{};
    bool inside = true;
    for (int i = 0; i < d && inside; ++i) {
      v[i] = (p[i] - static_cast<double>(cube.corner[i]) * side) / side;
      inside = v[i] >= 0.0 && v[i] < 1.0;
    }
    if (inside) local.push_back(v);
  }
  return content_over_depths(cube, d, t, max_depth, [&](int rel, std::vector<std::uint64_t>& keys) {
    const double n = std::ldexp(1.0, rel);
    for (const LocalVec& v : local) {
      std::uint64_t key = 0;
      for (int i = 0; i < d; ++i) key |= static_cast<std::uint64_t>(std::floor(v[i] * n)) << (rel * i);
      keys.push_back(key);
    }
  });
}

IntersectionReport intersection_experiment(std::span<const LimsupFamily> families, std::span<const std::uint64_t> Qs,
                                           const CoveringOptions& options) {
  if (families.size() < 2 || families.size() > 4) throw InvalidArgument("intersection needs 2 to 4 families");
  const int d = families.front().dim();
  IntersectionReport rep;
  for (const LimsupFamily& f : families) {
    if (f.dim() != d) throw InvalidArgument("intersected families must share the dimension");
    if (f.traits().tau.empty()) throw InvalidArgument("intersection_experiment takes Diophantine families");
    rep.taus.push_back(f.traits().tau);
    rep.formula_values.push_back(dimension_formula_D(f.traits().tau));
  }
  rep.target = *std::min_element(rep.formula_values.begin(), rep.formula_values.end());

  for (std::uint64_t Q : Qs) {
    IntersectionGeneration g;
    g.label = static_cast<double>(Q);
    std::vector<Generation> gens;
    for (const LimsupFamily& f : families) {
      const auto r = diophantine_index_range(f, Q, 2 * Q - 1);
      if (r) gens.push_back(Generation{r->first, r->second, g.label});
    }
    if (gens.size() != families.size()) {
      g.empty = true;
      rep.generations.push_back(g);
      ++rep.empty_generations;
      continue;
    }
    int bits = 0;
    for (std::size_t k = 0; k < families.size(); ++k) {
      bits = std::max(bits, scale_bits(min_full_width(families[k].entry(gens[k].first).subset), d));
    }
    g.scale = std::ldexp(1.0, -bits);
    std::vector<AbsBox> cur = generation_boxes(families[0], gens[0]);
    for (std::size_t k = 1; k < families.size() && !cur.empty(); ++k) {
      cur = intersect_boxes(cur, generation_boxes(families[k], gens[k]), d);
    }
    if (cur.empty()) {
      g.empty = true;
      ++rep.empty_generations;
    } else {
      g.count = count_box_cells(cur, d, bits, options.max_cells);
    }
    rep.generations.push_back(g);
  }

  std::vector<double> x, y;
  for (const auto& g : rep.generations) {
    if (g.empty) continue;
    x.push_back(-std::log(g.scale));
    y.push_back(std::log(static_cast<double>(g.count)));
  }
  if (x.size() >= 2 && std::adjacent_find(x.begin(), x.end(), std::greater_equal<>()) == x.end()) {
    const LinearFit fit = least_squares(x, y);
    rep.fitted_slope = fit.slope;
    rep.residuals = fit.residuals;
    rep.slope_available = true;
  }
  for (const LimsupFamily& f : families) {
    const auto gens = diophantine_generations(f, Qs);
    rep.individual_slopes.push_back(gens.size() >= 2 ? covering_counts(f, gens, options).fitted_slope : 0.0);
  }
  return rep;
}

}  // namespace mtp

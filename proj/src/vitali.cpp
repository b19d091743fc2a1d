#include "mtp/vitali.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "mtp/errors.hpp"

namespace mtp {

namespace {

constexpr int kMaxGridCellsLog2 = 30;

int resolve_bits(int dim, const UnionMeasureOptions& o) {
  if (o.grid_bits < 0) throw InvalidArgument("grid_bits must be non-negative");
  if (o.grid_bits == 0) return dim == 1 ? 0 : default_grid_bits(dim);
  if (o.grid_bits * dim > kMaxGridCellsLog2) {
    throw InvalidArgument("occupancy grid of 2^" + std::to_string(o.grid_bits * dim) + " cells is too large");
  }
  return o.grid_bits;
}

}  // namespace

int default_grid_bits(int dim) {
  if (dim == 1) return 12;
  return dim == 2 ? 9 : std::max(1, 18 / dim);
}

struct UnionAccumulator::Impl {
  int dim = 1;
  int bits = 0;
  // Exact arcs (d = 1, bits = 0): disjoint [start, end) inside [0, 1).
  std::map<double, double> arcs;
  double total = 0.0;
  // Occupancy grid otherwise.
  std::vector<std::uint8_t> cells;
  std::uint64_t side = 0;
  std::uint64_t occupied = 0;

  void add_arc(double a, double b) {
    auto it = arcs.upper_bound(a);
    if (it != arcs.begin() && std::prev(it)->second >= a) --it;
    while (it != arcs.end() && it->first <= b) {
      a = std::min(a, it->first);
      b = std::max(b, it->second);
      total -= it->second - it->first;
      it = arcs.erase(it);
    }
    arcs.emplace(a, b);
    total += b - a;
  }

  void add_exact(const Ball& ball) {
    const double c = ball.center[0];
    const double r = ball.radius;
    double a = c - r;
    double b = c + r;
    if (a < 0.0) {
      add_arc(a + 1.0, 1.0);
      a = 0.0;
    }
    if (b > 1.0) {
      add_arc(0.0, b - 1.0);
      b = 1.0;
    }
    add_arc(a, b);
  }

  void add_grid(const Ball& ball) {
    const double n = static_cast<double>(side);
    const double r2 = ball.radius * ball.radius;
    std::array<std::int64_t, kMaxDim> lo{}, hi{};
    for (int i = 0; i < dim; ++i) {
      lo[i] = static_cast<std::int64_t>(std::floor((ball.center[i] - ball.radius) * n - 0.5));
      hi[i] = static_cast<std::int64_t>(std::ceil((ball.center[i] + ball.radius) * n - 0.5));
    }
    std::array<std::int64_t, kMaxDim> k = lo;
    const auto s = static_cast<std::int64_t>(side);
    for (;;) {
      double q = 0.0;
      std::uint64_t flat = 0;
      for (int i = 0; i < dim; ++i) {
        const double centre = (static_cast<double>(k[i]) + 0.5) / n;
        const double diff = centre - ball.center[i];
        q += diff * diff;
        flat = flat * side + static_cast<std::uint64_t>(((k[i] % s) + s) % s);
      }
      if (q < r2 && cells[flat] == 0) {
        cells[flat] = 1;
        ++occupied;
      }
      int i = dim - 1;
      while (i >= 0 && k[i] == hi[i]) {
        k[i] = lo[i];
        --i;
      }
      if (i < 0) break;
      ++k[i];
    }
  }
};

UnionAccumulator::UnionAccumulator(int dim, const UnionMeasureOptions& options) : impl_(std::make_unique<Impl>()) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("unsupported dimension for union measure");
  impl_->dim = dim;
  impl_->bits = resolve_bits(dim, options);
  if (impl_->bits > 0) {
    impl_->side = std::uint64_t{1} << impl_->bits;
    impl_->cells.assign(std::uint64_t{1} << (impl_->bits * dim), 0);
  }
}

UnionAccumulator::~UnionAccumulator() = default;
UnionAccumulator::UnionAccumulator(UnionAccumulator&&) noexcept = default;
UnionAccumulator& UnionAccumulator::operator=(UnionAccumulator&&) noexcept = default;

void UnionAccumulator::add(const Ball& b) {
  if (b.center.dim() != impl_->dim) throw InvalidArgument("ball dimension does not match the union");
  if (impl_->bits == 0) {
    impl_->add_exact(b);
  } else {
    impl_->add_grid(b);
  }
}

double UnionAccumulator::value() const {
  if (impl_->bits == 0) return std::min(1.0, impl_->total);
  return static_cast<double>(impl_->occupied) / static_cast<double>(impl_->cells.size());
}

bool UnionAccumulator::exact() const { return impl_->bits == 0; }
int UnionAccumulator::grid_bits() const { return impl_->bits; }

UnionMeasure union_measure(std::span<const Ball> balls, const UnionMeasureOptions& options) {
  if (balls.empty()) return UnionMeasure{0.0, true, 0};
  UnionAccumulator acc(balls.front().center.dim(), options);
  for (const Ball& b : balls) acc.add(b);
  return UnionMeasure{acc.value(), acc.exact(), acc.grid_bits()};
}

CoverSelection vitali_select(std::span<const Ball> balls, const UnionMeasureOptions& options) {
  if (balls.empty()) throw InvalidArgument("vitali_select needs at least one ball");
  const int dim = balls.front().center.dim();
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const Ball& b = balls[i];
    if (b.center.dim() != dim) throw InvalidArgument("balls of different dimension");
    if (!(b.radius > 0.0)) throw InvalidArgument("ball " + std::to_string(i) + " has non-positive radius");
    if (!(b.radius < kMaxVitaliRadius)) {
      throw InvalidArgument("ball " + std::to_string(i) + " has radius " + std::to_string(b.radius) +
                            "; the 5r covering needs radii below 1/20");
    }
  }
  std::vector<std::size_t> order(balls.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return balls[a].radius > balls[b].radius; });

  CoverSelection sel;
  for (std::size_t i : order) {
    bool disjoint = true;
    for (std::size_t k : sel.kept_indices) {
      const double reach = balls[i].radius + balls[k].radius;
      if (torus_distance_sq_unchecked(balls[i].center, balls[k].center) <= reach * reach) {
        disjoint = false;
        break;
      }
    }
    if (disjoint) sel.kept_indices.push_back(i);
  }

  std::vector<Ball> expanded;
  expanded.reserve(sel.kept_indices.size());
  for (std::size_t k : sel.kept_indices) {
    sel.disjoint_sum += measure(Shape::ball(balls[k])).value;
    expanded.push_back(Ball{balls[k].center, sel.expansion_factor * balls[k].radius});
  }
  const UnionMeasure cov = union_measure(expanded, options);
  sel.coverage_measure = cov.value;
  sel.coverage_exact = cov.exact;
  return sel;
}

TruncationWindow find_truncation(const LimsupFamily& family, std::uint64_t n, const TruncationOptions& options) {
  if (n == 0) throw InvalidArgument("n must be at least 1");
  const double target = 1.0 - 1.0 / static_cast<double>(n);
  UnionAccumulator acc(family.dim(), options.grid);
  for (std::uint64_t j = n;; ++j) {
    if (j > options.max_j) {
      throw BudgetExceeded("union of balls " + std::to_string(n) + ".." + std::to_string(options.max_j) +
                           " has measure " + std::to_string(acc.value()) + ", never exceeding 1 - 1/n = " +
                           std::to_string(target) + "; the family may not have a full-measure limsup");
    }
    if (family.size() && j > *family.size()) {
      throw BudgetExceeded("family ended at index " + std::to_string(*family.size()) +
                           " with union measure " + std::to_string(acc.value()) + " <= 1 - 1/n = " +
                           std::to_string(target));
    }
    acc.add(family.entry(j).ball);
    if (acc.value() > target) return TruncationWindow{n, j, acc.value(), acc.exact(), acc.grid_bits()};
  }
}

SelectedUnion build_selected_union(const LimsupFamily& family, const TruncationWindow& window,
                                   const UnionMeasureOptions& options) {
  if (window.n == 0 || window.m_n < window.n) throw InvalidArgument("invalid truncation window");
  std::vector<Ball> balls;
  balls.reserve(window.m_n - window.n + 1);
  for (std::uint64_t j = window.n; j <= window.m_n; ++j) balls.push_back(family.entry(j).ball);

  SelectedUnion out;
  out.window = window;
  out.selection = vitali_select(balls, options);
  out.kept.reserve(out.selection.kept_indices.size());
  for (std::size_t pos : out.selection.kept_indices) out.kept.push_back(window.n + pos);
  std::sort(out.kept.begin(), out.kept.end());
  out.selected_measure = out.selection.disjoint_sum;
  out.lower_target = std::pow(5.0, -family.dim()) * (1.0 - 1.0 / static_cast<double>(window.n));
  out.measure_bound_check = out.selected_measure - out.lower_target;
  out.bound_holds = out.measure_bound_check > 0.0;
  return out;
}

}  // namespace mtp

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/gen.hpp"
#include "mtp/bound.hpp"
#include "mtp/errors.hpp"

using namespace mtp;

namespace {

// Exponent algebra for lambda(B) / phi^t(E) with B of radius r in the plane
// and E with semi-axes c r^{a1} >= c r^{a2}: bounded iff the exponent of r
// stays non-negative.
double planar_affine_s(double a1, double a2) {
  if (2.0 / a1 <= 1.0) return 2.0 / a1;
  return std::min(2.0, 1.0 + (2.0 - a1) / a2);
}

void check_monotone_flags(const DimensionReport& r) {
  auto pts = r.t_grid;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (const auto& p : pts) {
    CAPTURE(p.t);
    if (p.t < r.s - 1e-12) REQUIRE(p.bounded);
    if (p.t > r.s + 1e-12) REQUIRE_FALSE(p.bounded);
  }
}

}  // namespace

TEST_CASE("full balls give the ambient dimension") {
  const DimensionReport r1 = bound_energy_ratio(make_random_balls(1));
  CHECK(r1.ratio_model == "closed_form");
  CHECK(r1.s >= 1.0 - 2e-3);
  CHECK(r1.s <= 1.0);
  check_monotone_flags(r1);

  BoundOptions o;
  o.j_max = 60;
  o.samples = 4000;
  o.workers = 4;
  const DimensionReport r2 = bound_energy_ratio(make_random_balls(2), o);
  CHECK(r2.ratio_model == "monte_carlo");
  CHECK(r2.s >= 1.9);
  CHECK(r2.s <= 2.0);
}

TEST_CASE("shrunken balls in one dimension") {
  const DimensionReport r = bound_energy_ratio(make_shrunken_balls(1, 0.5));
  CHECK(r.s == doctest::Approx(0.5).epsilon(0.0).scale(1).epsilon(0.01));
  CHECK(std::abs(r.s - 0.5) < 0.01);
  CHECK(r.label == "finite-window estimate");
  CHECK(r.j_max == 10000);
  CHECK(r.s_half_window >= 0.0);
  CHECK(std::abs(r.s_half_window - r.s) < 0.02);
  check_monotone_flags(r);
}

TEST_CASE("rapidly shrinking balls give zero") {
  const LimsupFamily f = make_rapidly_shrinking_balls(1, 3.0);
  REQUIRE(f.size().has_value());
  CHECK(f.entry(*f.size()).subset.half_extents()[0] > 0.0);
  const DimensionReport r = bound_energy_ratio(f);
  CHECK(r.j_max == *f.size());
  CHECK(r.s < 0.05);
}

TEST_CASE("singular value bound for shrunken balls") {
  gen::for_all(61, 12, [](gen::Gen& g, int k) {
    const int d = k % 2 + 1;
    const double sigma = g.uniform(0.1, d);
    const DimensionReport r = bound_singular_value(make_shrunken_balls(d, sigma));
    CAPTURE(sigma);
    REQUIRE(r.ratio_model == "singular_value");
    REQUIRE(std::abs(r.s - sigma) <= 2e-3);
  });
}

TEST_CASE("singular value bound for planar ellipsoids and boxes") {
  gen::for_all(62, 12, [](gen::Gen& g, int k) {
    const double a1 = g.uniform(1.0, 3.0), a2 = g.uniform(a1, 4.0);
    const std::vector<double> ex{a1, a2};
    const auto kind = k % 2 == 0 ? ShapeKind::ellipsoid : ShapeKind::box;
    const DimensionReport r = bound_singular_value(make_affine_family(2, kind, ex, 0.5));
    CAPTURE(a1);
    CAPTURE(a2);
    REQUIRE(std::abs(r.s - planar_affine_s(a1, a2)) <= 2e-3);
  });
}

TEST_CASE("energy ratio and singular value agree on ellipsoids") {
  BoundOptions o;
  o.j_max = 60;
  o.samples = 4000;
  o.workers = 4;
  const std::vector<double> ex{1.2, 2.5};
  const LimsupFamily f = make_affine_family(2, ShapeKind::ellipsoid, ex, 0.5);
  const double e = bound_energy_ratio(f, o).s;
  const double sv = bound_singular_value(f, o).s;
  CAPTURE(e);
  CAPTURE(sv);
  CHECK(std::abs(e - sv) <= 2 * o.t_tol + 0.1);
  CHECK(e <= 2.0);
}

TEST_CASE("Diophantine families follow D") {
  const std::vector<double> t12{1.0, 2.0}, half{0.5, 0.5}, t3{3.0};
  CHECK(std::abs(bound_singular_value(make_diophantine(2, t12, 60)).s - 4.0 / 3) <= 2e-3);
  CHECK(std::abs(bound_singular_value(make_diophantine(2, half, 60)).s - 2.0) <= 2e-3);
  CHECK(std::abs(bound_singular_value(make_diophantine(1, t3, 2000)).s - 0.5) <= 2e-3);
}

TEST_CASE("singular value preconditions") {
  FamilyTraits t;
  t.kind = "mixed";
  t.dim = 2;
  const LimsupFamily mixed(t, [](std::uint64_t j) {
    const Ball b{TorusPoint{0.5, 0.5}, 0.02 / std::sqrt(static_cast<double>(j))};
    const Shape u = j % 2 == 0 ? Shape::ball(Ball{b.center, b.radius / 2})
                               : Shape::box(b.center, std::vector<double>{b.radius / 4, b.radius / 4});
    return BallSeqEntry{j, b, u};
  });
  CHECK_THROWS_AS(bound_singular_value(mixed), InvalidArgument);
  BoundOptions o;
  o.t_tol = 0.0;
  CHECK_THROWS_AS(bound_energy_ratio(make_random_balls(1), o), InvalidArgument);
  o = BoundOptions{};
  o.j_min = 0;
  CHECK_THROWS_AS(bound_energy_ratio(make_random_balls(1), o), InvalidArgument);
}

TEST_CASE("subset search") {
  BoundOptions o;
  o.j_max = 40;
  o.samples = 3000;
  o.workers = 4;
  o.half_window_diagnostic = false;

  SUBCASE("identity alone reproduces the plain bound") {
    const LimsupFamily f = make_shrunken_balls(1, 0.5);
    const std::vector<ShrinkMap> maps{identity_map()};
    BoundOptions e;
    e.half_window_diagnostic = false;
    const DimensionReport r = bound_subset_search(f, maps, e);
    CHECK(r.s == bound_energy_ratio(f, e).s);
    CHECK(r.winning_map == "identity");
  }
  SUBCASE("thin boxes take the best candidate") {
    const std::vector<double> ex{1.0, 3.0};
    const LimsupFamily f = make_affine_family(2, ShapeKind::box, ex, 0.5);
    const std::vector<ShrinkMap> maps{identity_map(), inscribed_ball_map(), central_sub_box_map()};
    const DimensionReport r = bound_subset_search(f, maps, o);
    REQUIRE(r.candidates.size() == 3);
    double best = 0.0;
    for (const auto& [name, s] : r.candidates) best = std::max(best, s);
    CHECK(r.s == best);
    const auto win = std::find_if(r.candidates.begin(), r.candidates.end(),
                                  [&](const auto& c) { return c.first == r.winning_map; });
    REQUIRE(win != r.candidates.end());
    CHECK(win->second == r.s);
    CHECK(r.s >= 0.0);
    CHECK(r.s <= 2.0);
  }
  SUBCASE("a map leaving U is rejected") {
    const ShrinkMap grow{"grow", [](const Shape& u) {
                           return Shape::ball(Ball{u.center(), 2 * u.bounding_ball().radius});
                         }};
    const std::vector<ShrinkMap> maps{grow};
    CHECK_THROWS_AS(bound_subset_search(make_shrunken_balls(1, 0.5), maps, o), InvalidArgument);
    CHECK_THROWS_AS(bound_subset_search(make_shrunken_balls(1, 0.5), std::vector<ShrinkMap>{}, o), InvalidArgument);
  }
}

TEST_CASE("subset search dominates the plain bound") {
  BoundOptions o;
  o.j_max = 40;
  o.samples = 3000;
  o.workers = 4;
  o.half_window_diagnostic = false;
  const std::vector<double> ex{1.5, 2.0};
  const LimsupFamily f = make_affine_family(2, ShapeKind::ellipsoid, ex, 0.5);
  const std::vector<ShrinkMap> maps{identity_map(), inscribed_ball_map()};
  const DimensionReport r = bound_subset_search(f, maps, o);
  CHECK(r.s >= bound_energy_ratio(f, o).s);
}

TEST_CASE("dimension formula") {
  const std::vector<double> a{3.0}, b{0.5, 0.5}, c{1.0, 2.0};
  CHECK(dimension_formula_D(a) == doctest::Approx(0.5));
  CHECK(dimension_formula_D(b) == doctest::Approx(2.0));
  CHECK(dimension_formula_D(c) == doctest::Approx(4.0 / 3));
  const std::vector<double> low{0.4, 1.0}, unsorted{2.0, 1.0};
  CHECK_THROWS_AS(dimension_formula_D(low), InvalidArgument);
  CHECK_THROWS_AS(dimension_formula_D(unsorted), InvalidArgument);
  CHECK(dimension_formula_D_sorted(unsorted) == doctest::Approx(4.0 / 3));
  CHECK_THROWS_AS(dimension_formula_D(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("dimension formula is permutation covariant") {
  gen::for_all(63, 200, [](gen::Gen& g, int) {
    const int d = g.integer(1, 6);
    std::vector<double> tau(static_cast<std::size_t>(d));
    for (double& x : tau) x = g.uniform(1.0 / d, 4.0);
    std::vector<double> sorted = tau;
    std::sort(sorted.begin(), sorted.end());
    // Direct evaluation of the minimum over prefixes.
    double expect = INFINITY, prefix = 0.0;
    for (int j = 1; j <= d; ++j) {
      const double tj = sorted[static_cast<std::size_t>(j - 1)];
      prefix += tj;
      expect = std::min(expect, (d + 1 + j * tj - prefix) / (1 + tj));
    }
    std::shuffle(tau.begin(), tau.end(), g.engine());
    REQUIRE(dimension_formula_D_sorted(tau) == doctest::Approx(expect).epsilon(1e-12));
    REQUIRE(dimension_formula_D_sorted(tau) <= d + 1e-12);
  });
}

TEST_CASE("regression indices") {
  const auto all = regression_indices(3, 10, 0);
  CHECK(all.size() == 8);
  CHECK(all.front() == 3);
  CHECK(all.back() == 10);
  CHECK(regression_indices(1, 5, 100).size() == 5);
  gen::for_all(64, 50, [](gen::Gen& g, int) {
    const auto lo = static_cast<std::uint64_t>(g.integer(1, 100));
    const auto hi = lo + static_cast<std::uint64_t>(g.integer(10, 100000));
    const auto n = static_cast<std::size_t>(g.integer(3, 80));
    const auto idx = regression_indices(lo, hi, n);
    REQUIRE(idx.front() == lo);
    REQUIRE(idx.back() == hi);
    REQUIRE(std::adjacent_find(idx.begin(), idx.end(), std::greater_equal<>()) == idx.end());
    REQUIRE(idx.size() <= n);
  });
  CHECK_THROWS_AS(regression_indices(0, 5, 3), InvalidArgument);
  CHECK_THROWS_AS(regression_indices(5, 4, 3), InvalidArgument);
  CHECK_THROWS_AS(regression_indices(1, 100, 2), InvalidArgument);
}

#include <doctest.h>

#include <cmath>

#include "../support/gen.hpp"
#include "mtp/bound.hpp"
#include "mtp/errors.hpp"
#include "mtp/lab.hpp"

using namespace mtp;

namespace {

LimsupFamily w(int d, std::vector<double> tau, int top) {
  return make_diophantine(d, tau, (std::uint64_t{1} << (top + 1)) - 1);
}

}  // namespace

TEST_CASE("generations") {
  CHECK(powers_of_two(2, 5) == std::vector<std::uint64_t>{4, 8, 16, 32});
  CHECK_THROWS_AS(powers_of_two(5, 2), InvalidArgument);

  const LimsupFamily f = w(1, {3.0}, 4);
  const auto [q_lo, q_hi] = diophantine_q_range(f);
  const std::vector<std::uint64_t> Qs{4, 8, 16, 64};
  const auto gens = diophantine_generations(f, Qs);
  REQUIRE(gens.size() == 3);
  for (const auto& g : gens) {
    REQUIRE(g.first <= g.last);
    const auto Q = static_cast<std::uint64_t>(g.label);
    for (std::uint64_t j : {g.first, g.last}) {
      const auto& box = f.entry(j).subset;
      const double q = std::round(std::pow(box.half_extents()[0], -1.0 / 4));
      REQUIRE(q >= static_cast<double>(std::max(Q, q_lo)));
      REQUIRE(q < static_cast<double>(std::min(2 * Q, q_hi + 1)));
    }
  }
  for (std::size_t k = 1; k < gens.size(); ++k) CHECK(gens[k].first == gens[k - 1].last + 1);

  const auto dy = dyadic_generations(make_random_balls(1), std::vector<std::uint64_t>{1, 4, 16});
  REQUIRE(dy.size() == 3);
  CHECK(dy[1].first == 4);
  CHECK(dy[1].last == 7);
}

TEST_CASE("covering slope of full balls") {
  for (int d = 1; d <= 2; ++d) {
    const LimsupFamily f = make_random_balls(d, RandomLaw{0, 5});
    const auto gens = dyadic_generations(f, powers_of_two(8, d == 1 ? 16 : 14));
    const CoveringCountCurve c = covering_counts(f, gens);
    CAPTURE(d);
    CHECK(std::abs(c.fitted_slope - d) < 0.15);
  }
}

TEST_CASE("covering slope of W(3)") {
  const LimsupFamily f = w(1, {3.0}, 10);
  const CoveringCountCurve c = covering_counts(f, diophantine_generations(f, powers_of_two(2, 10)));
  CHECK(c.fitted_slope >= 0.4);
  CHECK(c.fitted_slope <= 0.6);
  REQUIRE(c.counts.size() == c.scales.size());
  REQUIRE(c.residuals.size() == c.scales.size());
  for (std::size_t k = 1; k < c.scales.size(); ++k) {
    CHECK(c.scales[k] < c.scales[k - 1]);
    CHECK(c.counts[k] >= c.counts[k - 1]);
  }
}

TEST_CASE("covering slope of W(1, 2)") {
  const LimsupFamily f = w(2, {1.0, 2.0}, 6);
  const CoveringCountCurve c = covering_counts(f, diophantine_generations(f, powers_of_two(1, 6)), CoveringOptions{100'000'000, 4});
  CHECK(std::abs(c.fitted_slope - 4.0 / 3) <= 0.15);
}

TEST_CASE("covering slope of shrunken balls is at least sigma") {
  gen::for_all(71, 6, [](gen::Gen& g, int k) {
    const int d = k % 2 + 1;
    // Close to d the generation scales barely move and the fit degenerates.
    const double sigma = g.uniform(0.2, 0.75 * d);
    const LimsupFamily f = make_shrunken_balls(d, sigma, RandomLaw{0, static_cast<std::uint64_t>(k)});
    const auto gens = dyadic_generations(f, powers_of_two(8, d == 1 ? 16 : 15));
    const CoveringCountCurve c = covering_counts(f, gens, CoveringOptions{100'000'000, 4});
    CAPTURE(sigma);
    REQUIRE(c.fitted_slope >= sigma - 0.1);
    REQUIRE(c.fitted_slope <= d + 0.05);
  });
}

TEST_CASE("covering budget") {
  const LimsupFamily f = w(1, {3.0}, 8);
  CHECK_THROWS_AS(covering_counts(f, diophantine_generations(f, powers_of_two(2, 8)), CoveringOptions{1000, 1}),
                  BudgetExceeded);
}

TEST_CASE("content of a covered cube is constant at t = d") {
  for (int d = 1; d <= 2; ++d) {
    std::vector<double> c(static_cast<std::size_t>(d), 0.125), h(static_cast<std::size_t>(d), 0.13);
    const std::vector<Shape> shapes{Shape::box(TorusPoint(c), h)};
    const DyadicCube cube{2, std::vector<std::uint64_t>(static_cast<std::size_t>(d), 0)};
    const ContentEstimate e = outer_content_estimate(shapes, cube, d, 7);
    const double full = std::pow(std::sqrt(static_cast<double>(d)) * 0.25, d);
    REQUIRE(e.per_depth.size() == 6);
    for (double v : e.per_depth) CHECK(v == doctest::Approx(full));
    CHECK(e.value == doctest::Approx(full));
  }
}

TEST_CASE("content of a point vanishes") {
  const std::vector<TorusPoint> pts{TorusPoint{0.3, 0.7}};
  const DyadicCube unit{0, {0, 0}};
  double last = INFINITY;
  for (int depth = 0; depth <= 20; depth += 4) {
    const ContentEstimate e = outer_content_estimate(pts, unit, 1.0, depth);
    CHECK(e.value < last);
    CHECK(e.value == doctest::Approx(std::sqrt(2.0) * std::ldexp(1.0, -depth)));
    last = e.value;
  }
  CHECK(last < 1e-5);
}

TEST_CASE("content of W(3) stays away from zero below its dimension") {
  const LimsupFamily f = w(1, {3.0}, 7);
  std::vector<Shape> shapes;
  const std::uint64_t n = *f.size();
  for (std::uint64_t j = 1; j <= n; ++j) shapes.push_back(f.entry(j).subset);
  const ContentEstimate e = outer_content_estimate(shapes, DyadicCube{0, {0}}, 0.4, 12);
  CHECK(e.value >= 0.1);
  for (std::size_t k = 4; k < e.per_depth.size(); ++k) CHECK(e.per_depth[k] >= 0.1);
}

TEST_CASE("content is monotone in depth and t") {
  gen::for_all(72, 20, [](gen::Gen& g, int) {
    const int d = g.integer(1, 2);
    std::vector<Shape> shapes;
    for (int i = 0; i < 30; ++i) shapes.push_back(g.closed_shape(d, 0.001, 0.03));
    const int level = g.integer(0, 2);
    std::vector<std::uint64_t> corner;
    for (int i = 0; i < d; ++i) corner.push_back(static_cast<std::uint64_t>(g.integer(0, (1 << level) - 1)));
    const DyadicCube cube{level, corner};
    const double t = g.uniform(0.1, d);
    double prev = INFINITY;
    for (int depth = level; depth <= level + 8; ++depth) {
      const double v = outer_content_estimate(shapes, cube, t, depth).value;
      REQUIRE(v <= prev);
      prev = v;
    }
    if (level > 0) {
      const double lo = outer_content_estimate(shapes, cube, t * 0.9, level + 8).value;
      REQUIRE(prev <= lo + 1e-15);
    }
  });
  CHECK_THROWS_AS(outer_content_estimate(std::vector<TorusPoint>{TorusPoint{0.5}}, DyadicCube{3, {0}}, 0.5, 2),
                  InvalidArgument);
  CHECK_THROWS_AS(outer_content_estimate(std::vector<TorusPoint>{TorusPoint{0.5}}, DyadicCube{0, {0}}, 1.5, 2),
                  InvalidArgument);
}

TEST_CASE("intersections") {
  const auto Qs = powers_of_two(2, 9);
  SUBCASE("identical families") {
    const std::vector<LimsupFamily> fams{w(1, {3.0}, 9), w(1, {3.0}, 9)};
    const IntersectionReport r = intersection_experiment(fams, Qs);
    REQUIRE(r.slope_available);
    CHECK(r.fitted_slope == doctest::Approx(r.individual_slopes[0]));
    CHECK(r.target == doctest::Approx(0.5));
  }
  SUBCASE("tau in {1, 3}") {
    const std::vector<LimsupFamily> fams{w(1, {1.0}, 9), w(1, {3.0}, 9)};
    const IntersectionReport r = intersection_experiment(fams, Qs);
    CHECK(r.target == doctest::Approx(0.5));
    CHECK(std::abs(r.fitted_slope - 0.5) <= 0.15);
    CHECK(r.fitted_slope <= std::min(r.individual_slopes[0], r.individual_slopes[1]) + 0.05);
  }
  SUBCASE("tau in {2, 3}") {
    const std::vector<LimsupFamily> fams{w(1, {2.0}, 9), w(1, {3.0}, 9)};
    const IntersectionReport r = intersection_experiment(fams, Qs);
    CHECK(r.formula_values[0] == doctest::Approx(2.0 / 3));
    CHECK(std::abs(r.fitted_slope - 0.5) <= 0.15);
    CHECK(r.fitted_slope <= std::min(r.individual_slopes[0], r.individual_slopes[1]) + 0.05);
  }
  SUBCASE("preconditions") {
    const std::vector<LimsupFamily> one{w(1, {3.0}, 5)};
    CHECK_THROWS_AS(intersection_experiment(one, Qs), InvalidArgument);
    const std::vector<LimsupFamily> mixed{w(1, {3.0}, 5), w(2, {1.0, 2.0}, 3)};
    CHECK_THROWS_AS(intersection_experiment(mixed, Qs), InvalidArgument);
  }
}

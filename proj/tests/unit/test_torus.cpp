#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles/geometry.hpp"
#include "../support/gen.hpp"
#include "mtp/errors.hpp"
#include "mtp/shape.hpp"
#include "mtp/torus.hpp"

using namespace mtp;

TEST_CASE("points wrap into the unit cube") {
  const TorusPoint p{1.25, -0.25};
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(TorusPoint(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(TorusPoint{NAN}, InvalidArgument);
}

TEST_CASE("distance examples") {
  CHECK(torus_distance(TorusPoint{0.1}, TorusPoint{0.9}) == doctest::Approx(0.2));
  CHECK(torus_distance(TorusPoint{0.0, 0.0}, TorusPoint{0.0, 0.0}) == 0.0);
  const TorusPoint a{0.1, 0.1}, b{0.9, 0.9};
  CHECK(torus_distance(a, b) == doctest::Approx(oracle::brute_distance(a, b)));
  CHECK(torus_distance(a, b) == doctest::Approx(std::sqrt(0.08)));
  CHECK_THROWS_AS(torus_distance(TorusPoint{0.1}, a), InvalidArgument);
}

TEST_CASE("distance matches translate enumeration and is a metric") {
  gen::for_all(11, 10'000, [](gen::Gen& g, int) {
    const int d = g.integer(1, 4);
    const TorusPoint x = g.point(d), y = g.point(d), z = g.point(d);
    const double xy = torus_distance(x, y);
    REQUIRE(xy == doctest::Approx(oracle::brute_distance(x, y)).epsilon(1e-12));
    REQUIRE(xy == doctest::Approx(torus_distance(y, x)));
    REQUIRE(xy <= std::sqrt(static_cast<double>(d)) / 2 + 1e-15);
    REQUIRE(torus_distance(x, z) <= xy + torus_distance(y, z) + 1e-12);
  });
}

TEST_CASE("closed-form measures") {
  CHECK(measure(Shape::ball(TorusPoint{0.5, 0.5}, 0.1)).value == doctest::Approx(std::numbers::pi * 0.01));
  const std::vector<double> h{0.1, 0.05};
  CHECK(measure(Shape::box(TorusPoint{0.5, 0.5}, h)).value == doctest::Approx(0.02));
  CHECK(measure(Shape::ellipsoid(TorusPoint{0.5, 0.5}, h)).value == doctest::Approx(std::numbers::pi * 0.005));
  CHECK(measure(Shape::ball(TorusPoint{0.3}, 0.1)).value == doctest::Approx(0.2));
  CHECK(measure(Shape::ball(TorusPoint{0.1, 0.2, 0.3}, 0.1)).value ==
        doctest::Approx(4.0 / 3.0 * std::numbers::pi * 1e-3));
}

TEST_CASE("ball measure halves per dimension when the radius halves") {
  gen::for_all(12, 50, [](gen::Gen& g, int) {
    const int d = g.integer(1, 6);
    const double r = g.uniform(0.01, 0.12);
    const TorusPoint c = g.point(d);
    const double ratio = measure(Shape::ball(c, r)).value / measure(Shape::ball(c, 2 * r)).value;
    REQUIRE(ratio == doctest::Approx(std::ldexp(1.0, -d)).epsilon(1e-14));
  });
}

TEST_CASE("indicator measure agrees with the closed form") {
  const Shape disk = Shape::ball(TorusPoint{0.4, 0.6}, 0.1);
  const Ball b{TorusPoint{0.4, 0.6}, 0.15};
  const Shape ind = Shape::indicator(b, [&](const TorusPoint& p) { return disk.contains(p); });
  const MeasureEstimate m = measure(ind);
  CHECK_FALSE(m.exact);
  CHECK(m.std_error > 0.0);
  CHECK(std::abs(m.value - std::numbers::pi * 0.01) < 4 * m.std_error);
  const Shape hinted = Shape::indicator(b, [&](const TorusPoint& p) { return disk.contains(p); }, 0.0314159);
  CHECK(measure(hinted).value == 0.0314159);
}

TEST_CASE("empty indicator is an estimator failure") {
  const Ball b{TorusPoint{0.4, 0.6}, 0.1};
  CHECK_THROWS_AS(Shape::indicator(b, [](const TorusPoint&) { return false; }), EstimatorFailure);
}

TEST_CASE("diameters") {
  CHECK(diameter(Shape::ball(TorusPoint{0.5, 0.5}, 0.1)).value == doctest::Approx(0.2));
  const std::vector<double> h{0.1, 0.05};
  CHECK(diameter(Shape::box(TorusPoint{0.5, 0.5}, h)).value == doctest::Approx(2 * std::hypot(0.1, 0.05)));
  CHECK(diameter(Shape::ellipsoid(TorusPoint{0.5, 0.5}, h)).value == doctest::Approx(0.2));
  const Ball b{TorusPoint{0.4, 0.6}, 0.1};
  const Diameter dia = diameter(Shape::indicator(b, [](const TorusPoint&) { return true; }, 0.01));
  CHECK(dia.upper_bound_only);
  CHECK(dia.value == doctest::Approx(0.2));
}

TEST_CASE("bounding radius is capped") {
  CHECK_THROWS_AS(Shape::ball(TorusPoint{0.5}, 0.25), InvalidArgument);
  CHECK_THROWS_AS(Shape::ball(TorusPoint{0.5}, -0.1), InvalidArgument);
  const std::vector<double> h{0.2, 0.2};
  CHECK_THROWS_AS(Shape::box(TorusPoint{0.5, 0.5}, h), InvalidArgument);
  const std::vector<double> wrong{0.1};
  CHECK_THROWS_AS(Shape::ellipsoid(TorusPoint{0.5, 0.5}, wrong), InvalidArgument);
}

TEST_CASE("sampled points lie in their shape") {
  gen::for_all(13, 40, [](gen::Gen& g, int) {
    const int d = g.integer(1, 4);
    const Shape s = g.closed_shape(d, 0.01, 0.2);
    ShapeSampler sampler(s);
    Rng rng = make_stream(5, {1});
    for (int k = 0; k < 1000; ++k) REQUIRE(s.contains(sampler.point(rng)));
  });
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mtp/bound.hpp"
#include "mtp/lab.hpp"
#include "mtp/report.hpp"
#include "mtp/vitali.hpp"

using namespace mtp;

TEST_CASE("dimension report keys") {
  BoundOptions o;
  o.j_max = 200;
  const DimensionReport r = bound_energy_ratio(make_shrunken_balls(1, 0.5), o);
  const Json j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  const std::vector<std::string> expect{"s", "label", "method", "ratio_model", "j_range", "regression_points",
                                        "t_tol", "slope_tol", "smoothed", "s_half_window", "t_grid"};
  CHECK(keys == expect);
  CHECK(j["s"].get<double>() == r.s);
  CHECK(j["method"] == "energy_ratio");
  CHECK(j["j_range"] == Json::array({1, 200}));
  REQUIRE(j["t_grid"].size() == r.t_grid.size());
  CHECK(j["t_grid"][0].contains("bounded"));

  o.half_window_diagnostic = false;
  CHECK(to_json(bound_energy_ratio(make_shrunken_balls(1, 0.5), o))["s_half_window"].is_null());
}

TEST_CASE("bound csv") {
  DimensionReport r;
  r.t_grid = {TGridPoint{0.5, 1.25, 0.0, true}, TGridPoint{0.75, 3.0, 0.1, false}};
  std::istringstream in(bound_csv(r));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,sup_stat");
  std::getline(in, line);
  CHECK(line == "0.5,1.25");
  std::getline(in, line);
  CHECK(line == "0.75,3");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("curve csv round-trips doubles") {
  CoveringCountCurve c;
  c.scales = {0.1, 1.0 / 3};
  c.counts = {7, 40};
  std::istringstream in(curve_csv(c));
  std::string line;
  std::getline(in, line);
  CHECK(line == "delta,count");
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 0.1);
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 1.0 / 3);
  CHECK(line.substr(line.find(',') + 1) == "40");
}

TEST_CASE("non-finite numbers serialize as null") {
  RieszEstimate e;
  e.value = std::nan("");
  e.std_error = INFINITY;
  const std::string s = to_json(e).dump();
  CHECK(s.find("\"value\":null") != std::string::npos);
  CHECK(s.find("\"std_error\":null") != std::string::npos);
  CHECK(Json::parse(s)["value"].is_null());
}

TEST_CASE("intersection report without a slope") {
  IntersectionReport r;
  r.generations = {IntersectionGeneration{4, 0.01, 0, true}};
  r.empty_generations = 1;
  const Json j = to_json(r);
  CHECK(j["fitted_slope"].is_null());
  CHECK(j["generations"][0]["empty"] == true);
  CHECK(j["generations"][0]["Q"] == 4.0);
}

TEST_CASE("shapes and selections") {
  const Json s = to_json(Shape::box(TorusPoint{0.1, 0.2}, std::vector<double>{0.01, 0.02}));
  CHECK(s["kind"] == "box");
  CHECK(s["half_extents"] == Json::array({0.01, 0.02}));
  CHECK(s["measure"].get<double>() == doctest::Approx(0.04 * 0.02));
  const std::vector<Ball> balls{Ball{TorusPoint{0.5}, 0.01}, Ball{TorusPoint{0.505}, 0.01}};
  const Json v = to_json(vitali_select(balls));
  CHECK(v.contains("kept_indices"));
  CHECK(v["kept_indices"].size() == 1);
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtp/bound.hpp"
#include "mtp/errors.hpp"
#include "mtp/family.hpp"
#include "mtp/lab.hpp"
#include "mtp/report.hpp"
#include "mtp/riesz.hpp"
#include "mtp/vitali.hpp"

namespace py = pybind11;
using namespace mtp;

namespace {

// Reports cross the boundary as plain dicts.
py::object to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

TorusPoint point(const std::vector<double>& x) { return TorusPoint(x); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Riesz-energy dimension bounds for limsup sets on the torus";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<EstimatorFailure>(m, "EstimatorFailure", PyExc_RuntimeError);

  py::class_<Shape>(m, "Shape")
      .def_static("ball", [](const std::vector<double>& c, double r) { return Shape::ball(point(c), r); },
                  py::arg("center"), py::arg("radius"))
      .def_static("box", [](const std::vector<double>& c, const std::vector<double>& h) { return Shape::box(point(c), h); },
                  py::arg("center"), py::arg("half_widths"))
      .def_static("ellipsoid",
                  [](const std::vector<double>& c, const std::vector<double>& a) { return Shape::ellipsoid(point(c), a); },
                  py::arg("center"), py::arg("semi_axes"))
      .def_property_readonly("dim", &Shape::dim)
      .def_property_readonly("measure", [](const Shape& s) { return measure(s).value; })
      .def("contains", [](const Shape& s, const std::vector<double>& x) { return s.contains(point(x)); })
      .def("to_dict", [](const Shape& s) { return to_py(to_json(s)); });

  py::class_<LimsupFamily>(m, "LimsupFamily")
      .def_property_readonly("dim", &LimsupFamily::dim)
      .def_property_readonly("kind", &LimsupFamily::kind)
      .def_property_readonly("traits", [](const LimsupFamily& f) { return to_py(to_json(f.traits())); })
      .def("ball", [](const LimsupFamily& f, std::uint64_t j) { return to_py(to_json(f.entry(j).ball)); })
      .def("subset", [](const LimsupFamily& f, std::uint64_t j) { return f.entry(j).subset; });

  m.def("interval_energy", &interval_energy, py::arg("length"), py::arg("t"));
  m.def(
      "energy_set",
      [](const Shape& u, double t, std::uint64_t samples, std::uint64_t seed, const std::string& mode, unsigned workers) {
        EnergyOptions o;
        o.samples = samples;
        o.seed = seed;
        o.mode = mode == "radial" ? SamplingMode::radial : SamplingMode::pair;
        o.workers = workers;
        return to_py(to_json(energy_set(u, t, o)));
      },
      py::arg("shape"), py::arg("t"), py::arg("samples") = 1'000'000, py::arg("seed") = 0, py::arg("mode") = "pair",
      py::arg("workers") = 1);
  m.def(
      "singular_value_fn",
      [](const std::vector<double>& axes, double s) { return singular_value_fn(SingularValueProfile(axes), s); },
      py::arg("semi_axes"), py::arg("s"));

  m.def("make_random_balls", [](int d, std::uint64_t offset, std::uint64_t seed) {
    return make_random_balls(d, RandomLaw{offset, seed});
  }, py::arg("d"), py::arg("offset") = 0, py::arg("seed") = 0);
  m.def("make_shrunken_balls", [](int d, double sigma, std::uint64_t offset, std::uint64_t seed) {
    return make_shrunken_balls(d, sigma, RandomLaw{offset, seed});
  }, py::arg("d"), py::arg("sigma"), py::arg("offset") = 0, py::arg("seed") = 0);
  m.def(
      "make_affine_family",
      [](int d, const std::string& kind, const std::vector<double>& exponents, double scale, std::uint64_t seed) {
        if (kind != "ellipsoid" && kind != "box") throw InvalidArgument("kind must be 'ellipsoid' or 'box'");
        return make_affine_family(d, kind == "box" ? ShapeKind::box : ShapeKind::ellipsoid, exponents, scale,
                                  RandomLaw{0, seed});
      },
      py::arg("d"), py::arg("kind"), py::arg("exponents"), py::arg("scale") = 0.5, py::arg("seed") = 0);
  m.def(
      "make_diophantine",
      [](int d, const std::vector<double>& tau, std::uint64_t q_max, double ball_scale) {
        return make_diophantine(d, tau, q_max, DiophantineOptions{ball_scale, 0});
      },
      py::arg("d"), py::arg("tau"), py::arg("q_max"), py::arg("ball_scale") = 0.0);

  m.def("dimension_formula_D", [](const std::vector<double>& tau) { return dimension_formula_D_sorted(tau); },
        py::arg("tau"));

  auto bound = [](DimensionReport (*fn)(const LimsupFamily&, const BoundOptions&)) {
    return [fn](const LimsupFamily& f, std::uint64_t j_max, double t_tol, std::uint64_t seed, unsigned workers) {
      BoundOptions o;
      o.j_max = j_max;
      o.t_tol = t_tol;
      o.seed = seed;
      o.workers = workers;
      return to_py(to_json(fn(f, o)));
    };
  };
  m.def("bound_energy_ratio", bound(&bound_energy_ratio), py::arg("family"), py::arg("j_max") = 0,
        py::arg("t_tol") = 1e-3, py::arg("seed") = 0, py::arg("workers") = 1);
  m.def("bound_singular_value", bound(&bound_singular_value), py::arg("family"), py::arg("j_max") = 0,
        py::arg("t_tol") = 1e-3, py::arg("seed") = 0, py::arg("workers") = 1);

  m.def(
      "vitali_select",
      [](const std::vector<std::pair<std::vector<double>, double>>& balls) {
        std::vector<Ball> bs;
        for (const auto& [c, r] : balls) bs.push_back(Ball{point(c), r});
        return to_py(to_json(vitali_select(bs)));
      },
      py::arg("balls"), "balls: list of (center, radius)");
  m.def(
      "find_truncation",
      [](const LimsupFamily& f, std::uint64_t n) { return to_py(to_json(find_truncation(f, n))); },
      py::arg("family"), py::arg("n"));

  m.def(
      "covering_counts",
      [](const LimsupFamily& f, const std::vector<std::uint64_t>& Qs) {
        return to_py(to_json(covering_counts(f, diophantine_generations(f, Qs))));
      },
      py::arg("family"), py::arg("Qs"));
  m.def(
      "intersection_experiment",
      [](const std::vector<LimsupFamily>& fams, const std::vector<std::uint64_t>& Qs) {
        return to_py(to_json(intersection_experiment(fams, Qs)));
      },
      py::arg("families"), py::arg("Qs"));
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agglab/aggregation_rules.hpp"
#include "agglab/harness.hpp"
#include "agglab/io.hpp"
#include "agglab/minimax.hpp"
#include "agglab/query_families.hpp"

namespace py = pybind11;
using namespace agglab;

namespace {

py::object to_python(const std::string& json_text) {
  return py::module_::import("json").attr("loads")(json_text);
}

py::dict minimax_dict(const MinimaxResult& r) {
  py::dict out = to_python(io::to_json(r).dump());
  PolySpec poly = r.poly;
  out["evaluate"] = py::cpp_function([poly](double t) { return poly(t); });
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the agglab C++ library";

  m.def("closed_form_value", &closed_form_value, py::arg("n"), py::arg("d"));
  m.def("large_d_bound", &large_d_bound, py::arg("n"), py::arg("d"));

  m.def(
      "discrete_minimax",
      [](int n, int d) {
        MinimaxResult r;
        {
          py::gil_scoped_release release;
          r = discrete_minimax(n, d);
        }
        return minimax_dict(r);
      },
      py::arg("n"), py::arg("d"));
  m.def("continuous_minimax", [](int n, int d) { return minimax_dict(continuous_minimax(n, d)); },
        py::arg("n"), py::arg("d"));

  m.def(
      "bounds",
      [](int n, int d) {
        Bounds b = bounds(n, d);
        return std::make_pair(b.lower, b.upper);
      },
      py::arg("n"), py::arg("d"));

  m.def(
      "regime",
      [](int n, int d) {
        RegimeReport r = regime(n, d);
        py::dict out;
        out["regime"] = to_string(r.regime);
        out["ratio"] = r.ratio;
        out["lower"] = r.bounds.lower;
        out["upper"] = r.bounds.upper;
        out["one_minus_lower"] = r.one_minus_lower;
        out["d_squared_over_n"] = r.d_squared_over_n;
        out["large_d_bound"] = r.large_d_bound;
        return out;
      },
      py::arg("n"), py::arg("d"));

  m.def("miss_probability", &miss_probability, py::arg("n"), py::arg("d"), py::arg("t"));
  m.def(
      "randomized_difference_error",
      [](int n, int d) { return randomized_worst_case(randomized_difference_rule(n, d, full_universe(n))).value; },
      py::arg("n"), py::arg("d"));
  m.def(
      "optimal_difference_rule",
      [](int n) { return to_python(io::to_json(optimal_difference_rule(n, full_universe(n))).dump()); },
      py::arg("n"));

  m.def(
      "intersection_set",
      [](int n, int d) {
        IntersectionSet s = intersection_set(n, d, full_universe(n));
        ComplexityReport c = complexity(s.dag);
        py::dict out = to_python(io::to_json(s.dag).dump());
        out["query_complexity"] = c.query_c;
        out["order_complexity"] = c.order_c;
        out["agent_complexity"] = c.agent_c;
        return out;
      },
      py::arg("n"), py::arg("d"));

  m.def(
      "query_budget",
      [](int n, const std::vector<int>& ds, std::uint64_t samples, std::uint64_t seed) {
        std::vector<harness::BudgetRow> rows;
        {
          py::gil_scoped_release release;
          rows = harness::run_query_budget(n, ds, samples, seed);
        }
        return to_python(harness::format_query_budget(rows, harness::OutputFormat::Json));
      },
      py::arg("n"), py::arg("ds") = std::vector<int>{}, py::arg("samples") = 100000,
      py::arg("seed") = 1);

  m.def(
      "verify",
      [](const std::string& suite, std::uint64_t samples, std::uint64_t seed) {
        harness::Suite s = harness::suite_from_string(suite);
        harness::VerifyReport report;
        {
          py::gil_scoped_release release;
          report = harness::run_verify(s, samples, seed);
        }
        return to_python(harness::format_verify(report, harness::OutputFormat::Json));
      },
      py::arg("suite") = "all", py::arg("samples") = 100000, py::arg("seed") = 1);
}

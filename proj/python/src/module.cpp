#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tvent/diagnostics.hpp"
#include "tvent/error.hpp"
#include "tvent/estimator.hpp"
#include "tvent/forecast.hpp"
#include "tvent/model_file.hpp"
#include "tvent/panel.hpp"

namespace py = pybind11;
using namespace tvent;

namespace {

using Array2 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Panel panel_from_array(const Array2& values, std::vector<std::string> labels) {
  auto a = values;
  if (a.ndim() == 1) a = a.reshape({a.shape(0), py::ssize_t{1}});
  if (a.ndim() != 2) throw py::value_error("expected a 1-D or 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::vector<double> v(a.data(), a.data() + rows * cols);
  return Panel(rows, cols, std::move(v), std::move(labels));
}

py::array_t<double> panel_to_array(const Panel& p) {
  py::array_t<double> out({p.rows(), p.cols()});
  std::copy(p.values().begin(), p.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> field_to_array(const RegimeArray& g) {
  py::array_t<double> out({g.regimes(), g.length(), g.dims()});
  auto m = out.mutable_unchecked<3>();
  for (std::size_t k = 0; k < g.regimes(); ++k)
    for (std::size_t t = 0; t < g.length(); ++t)
      for (std::size_t i = 0; i < g.dims(); ++i) m(k, t, i) = g(k, t, i);
  return out;
}

std::vector<std::vector<double>> lambda_rows(const FitResult& f) {
  std::vector<std::vector<double>> out;
  for (const auto& l : f.lambdas) out.push_back(l.coefficients());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regime-switching maximum-entropy density estimation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<EmptyInput>(m, "EmptyInput", base.ptr());
  py::register_exception<DegenerateDimension>(m, "DegenerateDimension", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<EmptyRegime>(m, "EmptyRegime", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<DegenerateSeries>(m, "DegenerateSeries", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Panel>(m, "Panel")
      .def(py::init(&panel_from_array), py::arg("values"),
           py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("rows", &Panel::rows)
      .def_property_readonly("cols", &Panel::cols)
      .def_property_readonly("labels", &Panel::labels)
      .def_property_readonly("timestamps", &Panel::timestamps)
      .def("to_numpy", &panel_to_array)
      .def("column", &Panel::column)
      .def("slice_rows", &Panel::slice_rows);

  py::class_<CsvOptions>(m, "CsvOptions")
      .def(py::init<>())
      .def_readwrite("delimiter", &CsvOptions::delimiter)
      .def_readwrite("header", &CsvOptions::header)
      .def_readwrite("timestamp_column", &CsvOptions::timestamp_column);
  m.def("load_csv", &load_csv, py::arg("path"), py::arg("options") = CsvOptions{});
  m.def("parse_csv", &parse_csv, py::arg("text"), py::arg("options") = CsvOptions{});

  py::class_<AffineMap>(m, "AffineMap")
      .def_readonly("a", &AffineMap::a)
      .def_readonly("b", &AffineMap::b)
      .def("forward", &AffineMap::forward)
      .def("inverse", &AffineMap::inverse);
  py::class_<ScalingMap>(m, "ScalingMap")
      .def("__len__", &ScalingMap::size)
      .def("__getitem__", &ScalingMap::operator[])
      .def("apply", [](const ScalingMap& s, const Panel& p) { return s.apply(p); })
      .def("invert", &ScalingMap::invert);
  py::class_<RescaleResult>(m, "RescaleResult")
      .def_readonly("scaled", &RescaleResult::scaled)
      .def_readonly("scaling", &RescaleResult::scaling);
  m.def("rescale", &rescale);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("regimes", &ModelConfig::regimes)
      .def_readwrite("switch_budget", &ModelConfig::switch_budget)
      .def_readwrite("l1_bounds", &ModelConfig::l1_bounds)
      .def_readwrite("moment_order", &ModelConfig::moment_order)
      .def_readwrite("anneal_restarts", &ModelConfig::anneal_restarts)
      .def_readwrite("quad_order", &ModelConfig::quad_order)
      .def_readwrite("tol_outer", &ModelConfig::tol_outer)
      .def_readwrite("max_outer_iter", &ModelConfig::max_outer_iter)
      .def_readwrite("seed", &ModelConfig::seed)
      .def_readwrite("min_regime_weight", &ModelConfig::min_regime_weight);

  py::class_<FitResult>(m, "FitResult")
      .def_property_readonly("gamma", [](const FitResult& f) { return field_to_array(f.gamma); })
      .def_property_readonly("labels", [](const FitResult& f) { return f.gamma.hard_labels(); })
      .def_property_readonly("lambdas", &lambda_rows)
      .def_readonly("log_z", &FitResult::log_z)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("bic", &FitResult::bic)
      .def_readonly("param_count", &FitResult::param_count)
      .def_readonly("trace", &FitResult::trace)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("ill_posed", &FitResult::ill_posed)
      .def_readonly("seed", &FitResult::seed);
  m.def("fit", py::overload_cast<const Panel&, const ModelConfig&>(&fit), py::arg("scaled"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("anneal", py::overload_cast<const Panel&, const ModelConfig&, std::size_t>(&anneal), py::arg("scaled"), py::arg("config"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());

  py::class_<GridCell>(m, "GridCell")
      .def_readonly("regimes", &GridCell::regimes)
      .def_readonly("switch_budget", &GridCell::switch_budget)
      .def_readonly("l1_bounds", &GridCell::l1_bounds)
      .def_readonly("loglik", &GridCell::loglik)
      .def_readonly("bic", &GridCell::bic)
      .def_readonly("param_count", &GridCell::param_count)
      .def_readonly("schwarz_weight", &GridCell::schwarz_weight)
      .def_readonly("ill_posed", &GridCell::ill_posed);
  py::class_<GridSearchOptions>(m, "GridSearchOptions")
      .def(py::init<>())
      .def_readwrite("regimes", &GridSearchOptions::regimes)
      .def_readwrite("switch_budgets", &GridSearchOptions::switch_budgets)
      .def_readwrite("stage2", &GridSearchOptions::stage2)
      .def_readwrite("stage2_points", &GridSearchOptions::stage2_points)
      .def_readwrite("jobs", &GridSearchOptions::jobs);
  py::class_<SelectionReport>(m, "SelectionReport")
      .def_readonly("stage1", &SelectionReport::stage1)
      .def_readonly("stage1_choice", &SelectionReport::stage1_choice)
      .def_readonly("stage2", &SelectionReport::stage2)
      .def_readonly("stage2_choice", &SelectionReport::stage2_choice)
      .def_readonly("k_star", &SelectionReport::k_star)
      .def_readonly("best", &SelectionReport::best);
  m.def("grid_search", &grid_search, py::arg("scaled"), py::arg("base"), py::arg("options"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ModelFile>(m, "ModelFile")
      .def_static("from_fit", &ModelFile::from_fit, py::arg("fit"), py::arg("scaling"),
                  py::arg("config"), py::arg("labels"))
      .def_static("from_json", &ModelFile::from_json)
      .def_static("load", &ModelFile::load)
      .def("to_json", &ModelFile::to_json)
      .def("save", &ModelFile::save)
      .def_readonly("fit", &ModelFile::fit)
      .def_readonly("scaling", &ModelFile::scaling)
      .def_readonly("config", &ModelFile::config)
      .def_readonly("labels", &ModelFile::labels)
      .def_readonly("k_star", &ModelFile::k_star);

  py::class_<KupiecResult>(m, "KupiecResult")
      .def_readonly("lr", &KupiecResult::lr)
      .def_readonly("p_value", &KupiecResult::p_value);
  m.def("kupiec_test", &kupiec_test, py::arg("violations"), py::arg("trials"),
        py::arg("p_target"));

  py::class_<VarCoverage>(m, "VarCoverage")
      .def_readonly("dim", &VarCoverage::dim)
      .def_readonly("alpha", &VarCoverage::alpha)
      .def_readonly("violations", &VarCoverage::violations)
      .def_readonly("trials", &VarCoverage::trials)
      .def_readonly("coverage", &VarCoverage::coverage)
      .def_readonly("lr", &VarCoverage::lr)
      .def_readonly("p_value", &VarCoverage::p_value);
  m.def(
      "backtest",
      [](const FitResult& f, const ScalingMap& s, const Panel& oos, std::vector<double> alphas,
         double penalty) {
        BacktestOptions o;
        o.alphas = std::move(alphas);
        o.switch_penalty = penalty;
        return backtest(f, s, oos, QuadratureRule(200), o).coverage;
      },
      py::arg("fit"), py::arg("scaling"), py::arg("out_of_sample"),
      py::arg("alphas") = std::vector<double>{0.95, 0.99}, py::arg("switch_penalty") = 0.0);
  m.def(
      "var_forecast",
      [](const FitResult& f, std::size_t k, double alpha, const ScalingMap& s, std::size_t i) {
        return var_forecast(f, k, alpha, s, i, QuadratureRule(200));
      },
      py::arg("fit"), py::arg("regime"), py::arg("alpha"), py::arg("scaling"), py::arg("dim") = 0);

  py::class_<SyntheticCase>(m, "SyntheticCase")
      .def_readonly("panel", &SyntheticCase::panel)
      .def_property_readonly("labels",
                             [](const SyntheticCase& s) { return s.gamma_true.hard_labels(0); })
      .def_readonly("v_true", &SyntheticCase::v_true);
  m.def("gen_two_regime_gaussian", &gen_two_regime_gaussian, py::arg("v2"),
        py::arg("length") = 1000, py::arg("switch_period") = 250, py::arg("seed") = 0);
  m.def(
      "classification_error",
      [](const SyntheticCase& s, const FitResult& est) {
        return classification_error(s.gamma_true, est.gamma);
      },
      py::arg("truth"), py::arg("estimate"));
  m.def("relative_error", &relative_error);
  m.def("gmw_variance", &gmw_variance, py::arg("x"), py::arg("bandwidth"));
  m.def(
      "variance_path",
      [](const FitResult& f, const ScalingMap& s, std::size_t i) {
        return variance_path(f, s, i, QuadratureRule(200));
      },
      py::arg("fit"), py::arg("scaling"), py::arg("dim") = 0);
  m.def("acf_abs", &acf_abs, py::arg("x"), py::arg("d") = 1.0, py::arg("max_lag") = 50);
  m.def(
      "simulated_acf",
      [](const FitResult& f, const ScalingMap& s, std::size_t i, std::size_t n, double d,
         std::size_t max_lag, std::uint64_t seed, std::size_t jobs) {
        py::gil_scoped_release release;
        return simulated_acf(f, s, i, QuadratureRule(200), n, d, max_lag, seed, jobs);
      },
      py::arg("fit"), py::arg("scaling"), py::arg("dim") = 0, py::arg("n_samples") = 100,
      py::arg("d") = 1.0, py::arg("max_lag") = 50, py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def(
      "fisher_exact",
      [](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
        return fisher_exact({a, b, c, d});
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
  m.def(
      "transition_graph_json",
      [](const FitResult& f, const std::vector<std::string>& names, std::size_t max_lag,
         double p_threshold) {
        return transition_graph(f, names, QuadratureRule(200), {max_lag, p_threshold}).to_json();
      },
      py::arg("fit"), py::arg("names"), py::arg("max_lag") = 5, py::arg("p_threshold") = 0.01);
}

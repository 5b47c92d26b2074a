#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "tvent/diagnostics.hpp"
#include "tvent/error.hpp"
#include "tvent/estimator.hpp"
#include "tvent/forecast.hpp"
#include "tvent/model_file.hpp"
#include "tvent/parallel.hpp"

namespace tvent::cli {

namespace {

std::string fmt(double v) { return format_double(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ModelConfig make_config(const ModelOptions& m) {
  ModelConfig c;
  c.regimes = m.k;
  c.switch_budget = m.cgamma;
  c.l1_bounds = m.clambda;
  c.moment_order = m.m;
  c.anneal_restarts = m.anneal;
  c.quad_order = m.quad_order;
  c.min_regime_weight = m.min_regime_weight;
  c.seed = m.seed;
  c.validate();
  return c;
}

Panel load(const InputOptions& in) { return load_csv(in.csv, in.csv_options()); }

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void print_fit_summary(const ModelFile& model, const QuadratureRule& quad) {
  const FitResult& f = model.fit;
  std::cout << "regimes " << f.regimes() << "  switch budget " << fmt(model.config.switch_budget)
            << "  loglik " << fixed(f.loglik, 4) << "  BIC " << fixed(f.bic, 4) << "  params "
            << f.param_count << "  segments " << segment_count(f.gamma) << "\n";
  if (f.ill_posed) std::cout << "warning: fit is ill-posed (a regime fell below the minimum weight)\n";
  if (!f.converged) std::cout << "warning: outer iteration did not converge\n";
  std::cout << "regime  active  weight     ";
  for (const auto& l : model.labels) std::cout << "  var(" << l << ")";
  std::cout << "\n";
  std::vector<std::vector<double>> var;
  for (std::size_t i = 0; i < model.labels.size(); ++i)
    var.push_back(regime_variances(f, model.scaling, i, quad));
  for (std::size_t k = 0; k < f.regimes(); ++k) {
    double w = 0.0;
    for (double g : f.gamma.flat_slice(k)) w += g;
    std::cout << k << "       " << model.k_star[k] << "       " << fixed(w, 1);
    for (std::size_t i = 0; i < var.size(); ++i) std::cout << "  " << fmt(var[i][k]);
    std::cout << "\n";
  }
}

}  // namespace

CsvOptions InputOptions::csv_options() const {
  if (delimiter.size() != 1) throw DomainError("delimiter must be a single character");
  CsvOptions o;
  o.delimiter = delimiter[0];
  o.header = header;
  o.timestamp_column = timestamps;
  return o;
}

int cmd_fit(const FitArgs& args) {
  const Panel panel = load(args.input);
  const auto rs = rescale(panel);
  const ModelConfig config = make_config(args.model);
  FitResult f = anneal(rs.scaled, config, args.model.jobs);
  const auto model = ModelFile::from_fit(std::move(f), rs.scaling, config, panel.labels());
  model.save(args.output);
  print_fit_summary(model, QuadratureRule(config.quad_order));
  std::cout << "model written to " << args.output << "\n";
  return 0;
}

int cmd_grid(const GridArgs& args) {
  const Panel panel = load(args.input);
  const auto rs = rescale(panel);
  ModelOptions base_opts = args.model;
  ModelConfig base = make_config(base_opts);
  GridSearchOptions go;
  go.regimes.clear();
  for (std::size_t k = 1; k <= args.kmax; ++k) go.regimes.push_back(k);
  go.switch_budgets.clear();
  for (std::size_t c = 1; c <= args.cgamma_max; ++c) go.switch_budgets.push_back(static_cast<double>(c));
  go.stage2 = args.stage2;
  go.stage2_points = args.stage2_points;
  go.jobs = args.model.jobs;
  const auto report = grid_search(rs.scaled, base, go);

  write_file_atomic(args.output, selection_report_to_json(report, rs.scaling, base, panel.labels()));
  if (!args.csv_output.empty()) write_file_atomic(args.csv_output, selection_report_to_csv(report));

  const GridCell& s1 = report.stage1[report.stage1_choice];
  const GridCell& s2 = report.stage2[report.stage2_choice];
  std::cout << "stage 1: " << report.stage1.size() << " cells, chose K=" << s1.regimes
            << " C_gamma=" << fmt(s1.switch_budget) << " BIC " << fixed(s1.bic, 4) << "\n";
  std::cout << "stage 2: " << report.stage2.size() << " cells, chose "
            << (s2.l1_bounds.empty() ? std::string("C_lambda=inf") : "C_lambda[0]=" + fmt(s2.l1_bounds[0]))
            << " BIC " << fixed(s2.bic, 4) << "\n";
  std::cout << "k*:";
  for (auto k : report.k_star) std::cout << " " << k;
  std::cout << "\nreport written to " << args.output << "\n";
  return 0;
}

int cmd_simulate(const SimulateArgs& args) {
  if (args.seeds == 0) throw DomainError("need at least one seed");
  struct Row {
    double v2;
    std::size_t seed;
    double budget;
    double ce, re, gmw10, gmw30, gmw50;
  };
  ModelOptions mo = args.model;
  mo.k = 2;
  const ModelConfig base = make_config(mo);
  const QuadratureRule quad(base.quad_order);
  std::vector<Row> rows(args.v2.size() * args.seeds);
  parallel_for(rows.size(), args.model.jobs, [&](std::size_t idx) {
    const double v2 = args.v2[idx / args.seeds];
    const std::size_t seed = idx % args.seeds;
    const auto sc = gen_two_regime_gaussian(v2, args.length, args.period, seed);
    const auto rs = rescale(sc.panel);
    GridSearchOptions go;
    go.regimes = {2};
    go.switch_budgets.clear();
    for (std::size_t c = 1; c <= args.cgamma_max; ++c) go.switch_budgets.push_back(static_cast<double>(c));
    go.stage2 = false;
    const auto report = grid_search(rs.scaled, base, go);
    const auto x = sc.panel.column(0);
    rows[idx] = {v2,
                 seed,
                 report.stage1[report.stage1_choice].switch_budget,
                 classification_error(sc.gamma_true, report.best.gamma),
                 relative_error(sc.v_true, variance_path(report.best, rs.scaling, 0, quad)),
                 relative_error(sc.v_true, gmw_variance(x, 10)),
                 relative_error(sc.v_true, gmw_variance(x, 30)),
                 relative_error(sc.v_true, gmw_variance(x, 50))};
  });

  std::string csv = "v2,seed,switch_budget,ce,re,re_gmw10,re_gmw30,re_gmw50\n";
  for (const auto& r : rows)
    csv += fmt(r.v2) + "," + std::to_string(r.seed) + "," + fmt(r.budget) + "," + fmt(r.ce) + "," +
           fmt(r.re) + "," + fmt(r.gmw10) + "," + fmt(r.gmw30) + "," + fmt(r.gmw50) + "\n";
  write_file_atomic(args.output, csv);

  std::cout << "v2      median CE  median RE  RE GMW10  RE GMW30  RE GMW50\n";
  for (std::size_t v = 0; v < args.v2.size(); ++v) {
    std::vector<double> ce, re, g10, g30, g50;
    for (std::size_t s = 0; s < args.seeds; ++s) {
      const Row& r = rows[v * args.seeds + s];
      ce.push_back(r.ce);
      re.push_back(r.re);
      g10.push_back(r.gmw10);
      g30.push_back(r.gmw30);
      g50.push_back(r.gmw50);
    }
    std::cout << fixed(args.v2[v], 2) << "    " << fixed(median(ce), 4) << "     " << fixed(median(re), 4)
              << "     " << fixed(median(g10), 4) << "    " << fixed(median(g30), 4) << "    "
              << fixed(median(g50), 4) << "\n";
  }
  std::cout << "per-seed rows written to " << args.output << "\n";
  return 0;
}

int cmd_acf(const AcfArgs& args) {
  const Panel panel = load(args.input);
  std::optional<ModelFile> model;
  if (!args.model.empty()) {
    model = ModelFile::load(args.model);
    if (model->labels.size() != panel.cols())
      throw DomainError("model and data have different numbers of columns");
  }
  std::string csv = "dim,label,lag,acf,iid_band,ma_band";
  if (model) csv += ",simulated_acf";
  csv += "\n";
  for (std::size_t i = 0; i < panel.cols(); ++i) {
    const auto rho = acf_abs(panel.column(i), args.d, args.max_lag);
    const auto bands = acf_bands(rho, panel.rows());
    std::vector<double> sim;
    if (model)
      sim = simulated_acf(model->fit, model->scaling, i, QuadratureRule(model->config.quad_order),
                          args.samples, args.d, args.max_lag, args.seed, args.jobs);
    std::size_t inside = 0;
    for (std::size_t l = 0; l < rho.size(); ++l) {
      if (std::abs(rho[l]) <= bands.iid) ++inside;
      csv += std::to_string(i) + "," + panel.labels()[i] + "," + std::to_string(l + 1) + "," +
             fmt(rho[l]) + "," + fmt(bands.iid) + "," + fmt(bands.ma[l]);
      if (model) csv += "," + fmt(sim[l]);
      csv += "\n";
    }
    std::cout << panel.labels()[i] << ": " << inside << " of " << rho.size()
              << " lags inside the i.i.d. band\n";
  }
  write_file_atomic(args.output, csv);
  std::cout << "per-lag rows written to " << args.output << "\n";
  return 0;
}

int cmd_var(const VarArgs& args) {
  const Panel panel = load(args.input);
  std::optional<ModelFile> model;
  std::size_t split = 0;
  if (!args.model_file.empty()) {
    model = ModelFile::load(args.model_file);
    if (model->labels.size() != panel.cols())
      throw DomainError("model and data have different numbers of columns");
    split = args.train_split.value_or(model->fit.gamma.length());
  } else {
    split = args.train_split.value_or(panel.rows() * 4 / 5);
  }
  if (split < 2 || split >= panel.rows())
    throw DomainError("train split must leave at least two in-sample rows and one out-of-sample row");

  if (!model) {
    const Panel train = panel.slice_rows(0, split);
    const auto rs = rescale(train);
    const ModelConfig config = make_config(args.model);
    model = ModelFile::from_fit(anneal(rs.scaled, config, args.model.jobs), rs.scaling, config,
                                panel.labels());
  }
  const Panel test = panel.slice_rows(split, panel.rows());
  const QuadratureRule quad(model->config.quad_order);
  BacktestOptions bo;
  bo.alphas = args.alpha;
  bo.switch_penalty = args.switch_penalty;
  bo.keep_steps = true;
  const auto result = backtest(model->fit, model->scaling, test, quad, bo);

  std::string csv = "t,date,dim,label,regime,return";
  for (double a : args.alpha) csv += ",var_" + fmt(a) + ",violation_" + fmt(a);
  csv += "\n";
  for (const auto& s : result.steps) {
    const std::size_t row = split + s.t;
    csv += std::to_string(row) + "," + (panel.timestamps().empty() ? "" : panel.timestamps()[row]) +
           "," + std::to_string(s.dim) + "," + panel.labels()[s.dim] + "," + std::to_string(s.regime) +
           "," + fmt(s.value);
    for (std::size_t a = 0; a < s.var.size(); ++a)
      csv += "," + fmt(s.var[a]) + "," + (s.violation[a] ? "1" : "0");
    csv += "\n";
  }
  write_file_atomic(args.output, csv);

  std::cout << "label      alpha  violations  T_out  coverage  LR        p-value\n";
  for (const auto& c : result.coverage) {
    std::cout << panel.labels()[c.dim] << "  " << fixed(c.alpha, 3) << "  " << c.violations << "  "
              << c.trials << "  " << fixed(c.coverage, 4) << "  " << fixed(c.lr, 4) << "  "
              << fixed(c.p_value, 4) << "\n";
  }
  std::cout << "per-date rows written to " << args.output << "\n";
  return 0;
}

int cmd_graph(const GraphArgs& args) {
  const Panel panel = load(args.input);
  ModelFile model;
  if (!args.model_file.empty()) {
    model = ModelFile::load(args.model_file);
    if (model.labels.size() != panel.cols())
      throw DomainError("model and data have different numbers of columns");
  } else {
    const auto rs = rescale(panel);
    const ModelConfig config = make_config(args.model);
    model = ModelFile::from_fit(anneal(rs.scaled, config, args.model.jobs), rs.scaling, config,
                                panel.labels());
  }
  TransitionGraphOptions go;
  go.max_lag = args.lag_max;
  go.p_threshold = args.p_threshold;
  const auto graph =
      transition_graph(model.fit, model.labels, QuadratureRule(model.config.quad_order), go);
  write_file_atomic(args.output, graph.to_json());
  if (!args.dot_output.empty()) write_file_atomic(args.dot_output, graph.to_dot());
  if (!args.csv_output.empty()) {
    std::string csv = "source,target,source_jump,target_jump,lag,p_value\n";
    for (const auto& e : graph.edges)
      csv += graph.nodes[e.source] + "," + graph.nodes[e.target] + "," + to_string(e.source_kind) +
             "," + to_string(e.target_kind) + "," + std::to_string(e.lag) + "," + fmt(e.p_value) + "\n";
    write_file_atomic(args.csv_output, csv);
  }
  std::cout << graph.edges.size() << " edges at p <= " << fmt(args.p_threshold) << "; written to "
            << args.output << "\n";
  return 0;
}

int cmd_gen_synthetic(const GenSyntheticArgs& args) {
  const auto sc = gen_two_regime_gaussian(args.v2, args.length, args.period, args.seed);
  std::string csv;
  for (double x : sc.panel.values()) csv += fmt(x) + "\n";
  write_file_atomic(args.output, csv);
  const std::string truth_path = args.truth_output.empty() ? args.output + ".truth.csv" : args.truth_output;
  std::string truth = "t,regime,variance\n";
  const auto labels = sc.gamma_true.hard_labels(0);
  for (std::size_t t = 0; t < labels.size(); ++t)
    truth += std::to_string(t) + "," + std::to_string(labels[t]) + "," + fmt(sc.v_true[t]) + "\n";
  write_file_atomic(truth_path, truth);
  std::cout << sc.panel.rows() << " rows written to " << args.output << "; truth in " << truth_path
            << "\n";
  return 0;
}

}  // namespace tvent::cli

#include <exception>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using namespace tvent::cli;

void add_input(CLI::App* app, InputOptions& in) {
  app->add_option("input", in.csv, "Input CSV (rows = dates, columns = series)")
      ->required()
      ->check(CLI::ExistingFile);
  app->add_flag("--header", in.header, "First row holds column labels");
  app->add_flag("--timestamps", in.timestamps, "First column holds dates");
  app->add_option("--delimiter", in.delimiter, "Field separator")->capture_default_str();
}

void add_model(CLI::App* app, ModelOptions& m, bool grid) {
  if (!grid) {
    app->add_option("--k", m.k, "Number of regimes")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--cgamma", m.cgamma, "Switch budget per regime")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--clambda", m.clambda, "l1 bound on lambda (one value or one per regime)")
        ->check(CLI::NonNegativeNumber);
  }
  app->add_option("--m", m.m, "Moment order")->capture_default_str()->check(CLI::Range(1, 12));
  app->add_option("--anneal", m.anneal, "Random restarts")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--quad-order", m.quad_order, "Gauss-Legendre nodes")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));
  app->add_option("--min-regime-weight", m.min_regime_weight,
                  "Smallest admissible occupied regime weight (0 disables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app->add_option("--seed", m.seed, "Random seed")->capture_default_str();
  app->add_option("--jobs", m.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse nonstationary maximum-entropy regime estimation"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and write it as JSON");
  add_input(fit_cmd, fit.input);
  add_model(fit_cmd, fit.model, false);
  fit_cmd->add_option("-o,--output", fit.output, "Model file")->capture_default_str();

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid", "BIC model selection over (K, C_gamma, C_lambda)");
  add_input(grid_cmd, grid.input);
  add_model(grid_cmd, grid.model, true);
  grid_cmd->add_option("--kmax", grid.kmax, "Largest K")->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--cgamma-max", grid.cgamma_max, "Largest switch budget")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  grid_cmd->add_flag("!--no-stage2", grid.stage2, "Skip the C_lambda sweep");
  grid_cmd->add_option("--stage2-points", grid.stage2_points, "C_lambda grid size")->capture_default_str();
  grid_cmd->add_option("-o,--output", grid.output, "Report JSON")->capture_default_str();
  grid_cmd->add_option("--csv", grid.csv_output, "Also write (K, C_gamma, BIC) rows as CSV");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Two-regime Gaussian study: CE and RE against GMW");
  sim_cmd->add_option("--v2", sim.v2, "Variance ratios")->capture_default_str();
  sim_cmd->add_option("--seeds", sim.seeds, "Seeds per ratio")->capture_default_str();
  sim_cmd->add_option("--T", sim.length, "Series length")->capture_default_str();
  sim_cmd->add_option("--period", sim.period, "Switch period")->capture_default_str();
  sim_cmd->add_option("--cgamma-max", sim.cgamma_max, "Largest switch budget")->capture_default_str();
  add_model(sim_cmd, sim.model, true);
  sim_cmd->add_option("-o,--output", sim.output, "Per-seed CSV")->capture_default_str();

  AcfArgs acf;
  auto* acf_cmd = app.add_subcommand("acf", "ACF of |x|^d with i.i.d. and MA bands");
  add_input(acf_cmd, acf.input);
  acf_cmd->add_option("--d", acf.d, "Exponent")->capture_default_str();
  acf_cmd->add_option("--max-lag", acf.max_lag, "Largest lag")->capture_default_str();
  acf_cmd->add_option("--model", acf.model, "Model file; adds the model-simulated ACF")
      ->check(CLI::ExistingFile);
  acf_cmd->add_option("--samples", acf.samples, "Simulated paths")->capture_default_str();
  acf_cmd->add_option("--seed", acf.seed, "Random seed")->capture_default_str();
  acf_cmd->add_option("--jobs", acf.jobs, "Worker threads")->capture_default_str();
  acf_cmd->add_option("-o,--output", acf.output, "Per-lag CSV")->capture_default_str();

  VarArgs var;
  auto* var_cmd = app.add_subcommand("var", "Walk-forward VaR backtest with Kupiec tests");
  add_input(var_cmd, var.input);
  add_model(var_cmd, var.model, false);
  var_cmd->add_option("--model", var.model_file, "Use this model instead of fitting")
      ->check(CLI::ExistingFile);
  var_cmd->add_option("--train-split", var.train_split,
                      "Rows used in-sample (default: the model's length, or 80%)");
  var_cmd->add_option("--alpha", var.alpha, "Coverage levels")->capture_default_str();
  var_cmd->add_option("--switch-penalty", var.switch_penalty, "Online regime switch penalty")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  var_cmd->add_option("-o,--output", var.output, "Per-date CSV")->capture_default_str();

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "Latent transition relation graph");
  add_input(graph_cmd, graph.input);
  add_model(graph_cmd, graph.model, false);
  graph_cmd->add_option("--model", graph.model_file, "Use this model instead of fitting")
      ->check(CLI::ExistingFile);
  graph_cmd->add_option("--lag-max", graph.lag_max, "Largest lag")->capture_default_str();
  graph_cmd->add_option("--p-threshold", graph.p_threshold, "Edge significance level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  graph_cmd->add_option("-o,--output", graph.output, "Edge list JSON")->capture_default_str();
  graph_cmd->add_option("--dot", graph.dot_output, "Also write a DOT file");
  graph_cmd->add_option("--csv", graph.csv_output, "Also write one CSV row per edge");

  GenSyntheticArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Two-regime Gaussian series with truth sidecar");
  gen_cmd->add_option("--v2", gen.v2, "Variance of the second regime")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--T", gen.length, "Series length")->capture_default_str();
  gen_cmd->add_option("--period", gen.period, "Switch period")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen.output, "Series CSV")->capture_default_str();
  gen_cmd->add_option("--truth", gen.truth_output, "Truth CSV (default: <output>.truth.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*grid_cmd) return cmd_grid(grid);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*acf_cmd) return cmd_acf(acf);
    if (*var_cmd) return cmd_var(var);
    if (*graph_cmd) return cmd_graph(graph);
    if (*gen_cmd) return cmd_gen_synthetic(gen);
  } catch (const std::exception& e) {
    std::cerr << "tvent: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvent/panel.hpp"

namespace tvent::cli {

struct InputOptions {
  std::string csv;
  bool header = false;
  bool timestamps = false;
  std::string delimiter = ",";

  CsvOptions csv_options() const;
};

struct ModelOptions {
  std::size_t k = 2;
  double cgamma = 1.0;
  std::vector<double> clambda;
  std::size_t m = 6;
  std::size_t anneal = 10;
  std::size_t quad_order = 200;
  double min_regime_weight = 30.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct FitArgs {
  InputOptions input;
  ModelOptions model;
  std::string output = "model.json";
};

struct GridArgs {
  InputOptions input;
  ModelOptions model;
  std::size_t kmax = 4;
  std::size_t cgamma_max = 10;
  bool stage2 = true;
  std::size_t stage2_points = 12;
  std::string output = "grid.json";
  std::string csv_output;
};

struct SimulateArgs {
  std::vector<double> v2{1.5, 2.0, 4.0, 6.0, 8.0};
  std::size_t seeds = 20;
  std::size_t length = 1000;
  std::size_t period = 250;
  std::size_t cgamma_max = 10;
  ModelOptions model;
  std::string output = "simulation.csv";
};

struct AcfArgs {
  InputOptions input;
  double d = 1.0;
  std::size_t max_lag = 100;
  std::string model;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string output = "acf.csv";
};

struct VarArgs {
  InputOptions input;
  ModelOptions model;
  std::string model_file;
  std::optional<std::size_t> train_split;
  std::vector<double> alpha{0.95, 0.99};
  double switch_penalty = 0.0;
  std::string output = "var.csv";
};

struct GraphArgs {
  InputOptions input;
  ModelOptions model;
  std::string model_file;
  std::size_t lag_max = 5;
  double p_threshold = 0.01;
  std::string output = "graph.json";
  std::string dot_output;
  std::string csv_output;
};

struct GenSyntheticArgs {
  double v2 = 4.0;
  std::size_t length = 1000;
  std::size_t period = 250;
  std::uint64_t seed = 0;
  std::string output = "synthetic.csv";
  std::string truth_output;
};

int cmd_fit(const FitArgs& args);
int cmd_grid(const GridArgs& args);
int cmd_simulate(const SimulateArgs& args);
int cmd_acf(const AcfArgs& args);
int cmd_var(const VarArgs& args);
int cmd_graph(const GraphArgs& args);
int cmd_gen_synthetic(const GenSyntheticArgs& args);

}  // namespace tvent::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tvent/estimator.hpp"
#include "tvent/panel.hpp"

namespace tvent {

/// Serialized fitted model. The affiliation field is stored run-length
/// encoded per dimension; the trace is not stored.
struct ModelFile {
  static constexpr int kSchema = 1;

  std::vector<std::string> labels;
  ScalingMap scaling;
  ModelConfig config;
  FitResult fit;
  std::vector<std::size_t> k_star;  // active coefficients per regime

  /// Builds from a fit, filling k_star from config.sparsity_eps.
  static ModelFile from_fit(FitResult fit, ScalingMap scaling, ModelConfig config,
                            std::vector<std::string> labels);

  std::string to_json() const;
  /// Throws FormatError on malformed or unsupported documents.
  static ModelFile from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static ModelFile load(const std::filesystem::path& path);
};

/// Selection report as JSON (schema 1): both stages, the choices, k* and the
/// selected model. Contains nothing that depends on timing or scheduling.
std::string selection_report_to_json(const SelectionReport& report, const ScalingMap& scaling,
                                     const ModelConfig& base, std::vector<std::string> labels);

/// One row per cell: stage, K, C_gamma, C_lambda, L, BIC, params, weight.
std::string selection_report_to_csv(const SelectionReport& report);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace tvent

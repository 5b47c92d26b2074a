#include "tvent/model_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tvent/error.hpp"

namespace tvent {

using json = nlohmann::ordered_json;

namespace {

json config_to_json(const ModelConfig& c) {
  json j;
  j["regimes"] = c.regimes;
  j["switch_budget"] = c.switch_budget;
  j["l1_bounds"] = c.l1_bounds.empty() ? json(nullptr) : json(c.l1_bounds);
  j["moment_order"] = c.moment_order;
  j["anneal_restarts"] = c.anneal_restarts;
  j["quad_order"] = c.quad_order;
  j["tol_outer"] = c.tol_outer;
  j["max_outer_iter"] = c.max_outer_iter;
  j["seed"] = c.seed;
  j["lambda_tol"] = c.lambda_tol;
  j["lambda_max_iter"] = c.lambda_max_iter;
  j["sparsity_eps"] = c.sparsity_eps;
  j["min_regime_weight"] = c.min_regime_weight;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.regimes = j.at("regimes").get<std::size_t>();
  c.switch_budget = j.at("switch_budget").get<double>();
  if (!j.at("l1_bounds").is_null()) c.l1_bounds = j.at("l1_bounds").get<std::vector<double>>();
  c.moment_order = j.at("moment_order").get<std::size_t>();
  c.anneal_restarts = j.at("anneal_restarts").get<std::size_t>();
  c.quad_order = j.at("quad_order").get<std::size_t>();
  c.tol_outer = j.at("tol_outer").get<double>();
  c.max_outer_iter = j.at("max_outer_iter").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.lambda_tol = j.at("lambda_tol").get<double>();
  c.lambda_max_iter = j.at("lambda_max_iter").get<std::size_t>();
  c.sparsity_eps = j.at("sparsity_eps").get<double>();
  c.min_regime_weight = j.at("min_regime_weight").get<double>();
  return c;
}

// Runs of identical weight vectors along time.
json encode_gamma(const AffiliationField& g, std::size_t i) {
  json runs = json::array();
  std::vector<double> current, w(g.regimes());
  std::size_t length = 0;
  for (std::size_t t = 0; t < g.length(); ++t) {
    for (std::size_t k = 0; k < g.regimes(); ++k) w[k] = g(k, t, i);
    if (length > 0 && w == current) {
      ++length;
      continue;
    }
    if (length > 0) runs.push_back(json{{"length", length}, {"weights", current}});
    current = w;
    length = 1;
  }
  if (length > 0) runs.push_back(json{{"length", length}, {"weights", current}});
  return runs;
}

}  // namespace

ModelFile ModelFile::from_fit(FitResult fit, ScalingMap scaling, ModelConfig config,
                              std::vector<std::string> labels) {
  ModelFile m;
  for (const auto& lam : fit.lambdas)
    m.k_star.push_back(sparsify(lam, config.sparsity_eps).active_count);
  m.fit = std::move(fit);
  m.scaling = std::move(scaling);
  m.config = std::move(config);
  m.labels = std::move(labels);
  return m;
}

std::string ModelFile::to_json() const {
  json doc;
  doc["schema"] = kSchema;
  doc["labels"] = labels;
  json maps = json::array();
  for (const auto& a : scaling.maps()) maps.push_back(json{{"a", a.a}, {"b", a.b}});
  doc["scaling"] = maps;
  doc["config"] = config_to_json(config);
  json regimes = json::array();
  for (std::size_t k = 0; k < fit.regimes(); ++k)
    regimes.push_back(json{{"lambda", fit.lambdas[k].coefficients()}, {"log_z", fit.log_z[k]}});
  doc["regimes"] = regimes;
  json gamma = json::array();
  for (std::size_t i = 0; i < fit.gamma.dims(); ++i) gamma.push_back(encode_gamma(fit.gamma, i));
  doc["gamma"] = json{{"length", fit.gamma.length()}, {"runs", gamma}};
  doc["loglik"] = fit.loglik;
  doc["bic"] = fit.bic;
  doc["param_count"] = fit.param_count;
  doc["k_star"] = k_star;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["degenerate"] = fit.degenerate;
  doc["ill_posed"] = fit.ill_posed;
  doc["fit_seed"] = fit.seed;
  return doc.dump(2) + "\n";
}

ModelFile ModelFile::from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("schema").get<int>() != kSchema)
      throw FormatError("unsupported model schema " + doc.at("schema").dump());
    ModelFile m;
    m.labels = doc.at("labels").get<std::vector<std::string>>();
    std::vector<AffineMap> maps;
    for (const auto& a : doc.at("scaling")) maps.push_back({a.at("a").get<double>(), a.at("b").get<double>()});
    m.scaling = ScalingMap(std::move(maps));
    m.config = config_from_json(doc.at("config"));

    for (const auto& r : doc.at("regimes")) {
      m.fit.lambdas.emplace_back(r.at("lambda").get<std::vector<double>>());
      m.fit.log_z.push_back(r.at("log_z").get<double>());
    }
    const std::size_t K = m.fit.lambdas.size();
    if (K == 0) throw FormatError("model has no regimes");
    const auto& g = doc.at("gamma");
    const auto T = g.at("length").get<std::size_t>();
    const auto& dims = g.at("runs");
    if (dims.size() != m.labels.size() || dims.size() != m.scaling.size())
      throw FormatError("dimension count mismatch");
    m.fit.gamma = AffiliationField(K, dims.size(), T, 0.0);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      std::size_t t = 0;
      for (const auto& run : dims[i]) {
        const auto len = run.at("length").get<std::size_t>();
        const auto w = run.at("weights").get<std::vector<double>>();
        if (w.size() != K || len == 0 || t + len > T) throw FormatError("bad affiliation run");
        for (std::size_t s = 0; s < len; ++s, ++t)
          for (std::size_t k = 0; k < K; ++k) m.fit.gamma(k, t, i) = w[k];
      }
      if (t != T) throw FormatError("affiliation runs do not cover the series");
    }
    m.fit.loglik = doc.at("loglik").get<double>();
    m.fit.bic = doc.at("bic").get<double>();
    m.fit.param_count = doc.at("param_count").get<std::size_t>();
    m.k_star = doc.at("k_star").get<std::vector<std::size_t>>();
    m.fit.iterations = doc.at("iterations").get<std::size_t>();
    m.fit.converged = doc.at("converged").get<bool>();
    m.fit.degenerate = doc.at("degenerate").get<bool>();
    m.fit.ill_posed = doc.at("ill_posed").get<bool>();
    m.fit.seed = doc.at("fit_seed").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
}

namespace {

json cell_to_json(const GridCell& c) {
  json j;
  j["regimes"] = c.regimes;
  j["switch_budget"] = c.switch_budget;
  j["l1_bounds"] = c.l1_bounds.empty() ? json(nullptr) : json(c.l1_bounds);
  j["loglik"] = c.loglik;
  j["bic"] = c.bic;
  j["param_count"] = c.param_count;
  j["schwarz_weight"] = c.schwarz_weight;
  j["converged"] = c.converged;
  j["ill_posed"] = c.ill_posed;
  return j;
}

}  // namespace

std::string selection_report_to_json(const SelectionReport& report, const ScalingMap& scaling,
                                     const ModelConfig& base, std::vector<std::string> labels) {
  json doc;
  doc["schema"] = ModelFile::kSchema;
  json s1 = json::array(), s2 = json::array();
  for (const auto& c : report.stage1) s1.push_back(cell_to_json(c));
  for (const auto& c : report.stage2) s2.push_back(cell_to_json(c));
  doc["stage1"] = s1;
  doc["stage1_choice"] = report.stage1_choice;
  doc["stage2"] = s2;
  doc["stage2_choice"] = report.stage2_choice;
  doc["k_star"] = report.k_star;

  ModelConfig chosen = base;
  const GridCell& cell = report.stage2.empty() ? report.stage1.at(report.stage1_choice)
                                               : report.stage2.at(report.stage2_choice);
  chosen.regimes = cell.regimes;
  chosen.switch_budget = cell.switch_budget;
  chosen.l1_bounds = cell.l1_bounds;
  const auto model = ModelFile::from_fit(report.best, scaling, chosen, std::move(labels));
  doc["model"] = json::parse(model.to_json());
  return doc.dump(2) + "\n";
}

std::string selection_report_to_csv(const SelectionReport& report) {
  std::string out = "stage,regimes,switch_budget,l1_bounds,loglik,bic,param_count,schwarz_weight,ill_posed\n";
  const auto emit = [&](int stage, const GridCell& c) {
    std::string bounds;
    for (std::size_t k = 0; k < c.l1_bounds.size(); ++k)
      bounds += (k ? ";" : "") + format_double(c.l1_bounds[k]);
    out += std::to_string(stage) + "," + std::to_string(c.regimes) + "," +
           format_double(c.switch_budget) + "," + (bounds.empty() ? "inf" : bounds) + "," +
           format_double(c.loglik) + "," + format_double(c.bic) + "," +
           std::to_string(c.param_count) + "," + format_double(c.schwarz_weight) + "," +
           (c.ill_posed ? "1" : "0") + "\n";
  };
  for (const auto& c : report.stage1) emit(1, c);
  for (const auto& c : report.stage2) emit(2, c);
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void ModelFile::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json());
}

ModelFile ModelFile::load(const std::filesystem::path& path) {
  return from_json(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace tvent

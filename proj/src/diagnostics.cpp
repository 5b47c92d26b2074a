#include "tvent/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

#include "tvent/error.hpp"
#include "tvent/maxent_density.hpp"
#include "tvent/parallel.hpp"

namespace tvent {

SyntheticCase gen_two_regime_gaussian(double v2, std::size_t length,
                                      std::size_t switch_period, std::uint64_t seed) {
  if (!(v2 > 0.0)) throw DomainError("variance ratio must be positive");
  if (length < 2) throw DomainError("need at least two points");
  if (switch_period < 1) throw DomainError("switch period must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(length), v(length);
  std::vector<std::vector<int>> labels(1, std::vector<int>(length));
  const double sd = std::sqrt(v2);
  for (std::size_t t = 0; t < length; ++t) {
    const int k = static_cast<int>((t / switch_period) % 2);
    labels[0][t] = k;
    v[t] = k == 0 ? 1.0 : v2;
    x[t] = normal(rng) * (k == 0 ? 1.0 : sd);
  }
  return {Panel::from_series(x), AffiliationField::from_labels(2, labels), std::move(v)};
}

double classification_error(const AffiliationField& truth, const AffiliationField& estimate) {
  if (truth.dims() != estimate.dims() || truth.length() != estimate.length())
    throw DomainError("affiliation fields differ in shape");
  const std::size_t K = std::max(truth.regimes(), estimate.regimes());
  if (K > 8) throw DomainError("too many regimes for permutation search");
  std::vector<std::size_t> confusion(K * K, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < truth.dims(); ++i) {
    const auto a = truth.hard_labels(i);
    const auto b = estimate.hard_labels(i);
    for (std::size_t t = 0; t < a.size(); ++t) {
      ++confusion[static_cast<std::size_t>(a[t]) * K + static_cast<std::size_t>(b[t])];
      ++total;
    }
  }
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t matched = 0;
    for (std::size_t k = 0; k < K; ++k) matched += confusion[k * K + perm[k]];
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(total - best) / static_cast<double>(total);
}

double relative_error(const std::vector<double>& v_true, const std::vector<double>& v_est) {
  if (v_true.size() != v_est.size()) throw DomainError("paths differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < v_true.size(); ++t) {
    num += (v_est[t] - v_true[t]) * (v_est[t] - v_true[t]);
    den += v_true[t] * v_true[t];
  }
  if (!(den > 0.0)) throw DomainError("reference path has zero norm");
  return std::sqrt(num / den);
}

std::vector<double> regime_variances(const FitResult& fit, const ScalingMap& scaling,
                                     std::size_t i, const QuadratureRule& quad) {
  const double a = scaling[i].a;
  std::vector<double> out;
  for (const auto& lam : fit.lambdas) {
    const auto mu = moments(lam, quad, 2);
    out.push_back((mu[1] - mu[0] * mu[0]) / (a * a));
  }
  return out;
}

std::vector<double> variance_path(const FitResult& fit, const ScalingMap& scaling,
                                  std::size_t i, const QuadratureRule& quad) {
  if (i >= fit.gamma.dims()) throw DomainError("dimension out of range");
  const auto v = regime_variances(fit, scaling, i, quad);
  std::vector<double> out(fit.gamma.length(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto g = fit.gamma.series(k, i);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += g[t] * v[k];
  }
  return out;
}

std::vector<double> gmw_variance(const std::vector<double>& x, std::size_t bandwidth) {
  if (bandwidth < 2) throw DomainError("bandwidth must be at least 2");
  const std::size_t T = x.size();
  std::vector<double> out(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t lo = t >= bandwidth ? t - bandwidth : 0;
    const std::size_t hi = std::min(T, t + bandwidth + 1);
    const auto count = static_cast<double>(hi - lo);
    if (hi - lo < 2) continue;
    double mean = 0.0;
    for (std::size_t s = lo; s < hi; ++s) mean += x[s];
    mean /= count;
    double ss = 0.0;
    for (std::size_t s = lo; s < hi; ++s) ss += (x[s] - mean) * (x[s] - mean);
    out[t] = ss / (count - 1.0);
  }
  return out;
}

std::vector<double> acf_abs(const std::vector<double>& x, double d, std::size_t max_lag) {
  const std::size_t T = x.size();
  if (max_lag >= T) throw DomainError("max_lag must be smaller than the series length");
  std::vector<double> y(T);
  for (std::size_t t = 0; t < T; ++t) y[t] = std::pow(std::abs(x[t]), d);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*lo == *hi) throw DegenerateSeries("|x|^d is constant; autocorrelation undefined");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(T);
  for (double& v : y) v -= mean;
  double c0 = 0.0;
  for (double v : y) c0 += v * v;
  std::vector<double> rho(max_lag);
  for (std::size_t l = 1; l <= max_lag; ++l) {
    double c = 0.0;
    for (std::size_t t = 0; t + l < T; ++t) c += y[t] * y[t + l];
    rho[l - 1] = c / c0;
  }
  return rho;
}

AcfBands acf_bands(const std::vector<double>& rho, std::size_t length) {
  if (length == 0) throw DomainError("series length must be positive");
  const double T = static_cast<double>(length);
  AcfBands out;
  out.iid = 1.96 / std::sqrt(T);
  double acc = 0.0;
  for (double r : rho) {
    out.ma.push_back(1.96 * std::sqrt((1.0 + 2.0 * acc) / T));
    acc += r * r;
  }
  return out;
}

std::vector<double> simulated_acf(const FitResult& fit, const ScalingMap& scaling,
                                  std::size_t i, const QuadratureRule& quad,
                                  std::size_t n_samples, double d, std::size_t max_lag,
                                  std::uint64_t seed, std::size_t jobs) {
  if (n_samples == 0) throw DomainError("need at least one sample path");
  if (i >= fit.gamma.dims()) throw DomainError("dimension out of range");
  const std::size_t K = fit.regimes();
  const std::size_t T = fit.gamma.length();

  // One distribution per distinct affiliation vector along the path.
  std::map<std::vector<double>, std::size_t> index;
  std::vector<MaxEntDistribution> dists;
  std::vector<std::size_t> which(T);
  std::vector<double> w(K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) w[k] = fit.gamma(k, t, i);
    auto [it, inserted] = index.emplace(w, dists.size());
    if (inserted) dists.emplace_back(compose_lambda(w, fit.lambdas), quad);
    which[t] = it->second;
  }

  std::vector<std::vector<double>> acfs(n_samples);
  parallel_for(n_samples, jobs, [&](std::size_t s) {
    std::mt19937_64 rng(seed + s);
    std::vector<double> path(T);
    for (std::size_t t = 0; t < T; ++t)
      path[t] = scaling[i].inverse(dists[which[t]].draw(unit_uniform(rng())));
    acfs[s] = acf_abs(path, d, max_lag);
  });
  std::vector<double> mean(max_lag, 0.0);
  for (const auto& a : acfs)
    for (std::size_t l = 0; l < max_lag; ++l) mean[l] += a[l];
  for (double& v : mean) v /= static_cast<double>(n_samples);
  return mean;
}

JumpSeries jump_series(const FitResult& fit, std::size_t i, const QuadratureRule& quad) {
  if (i >= fit.gamma.dims()) throw DomainError("dimension out of range");
  std::vector<double> var;
  for (const auto& lam : fit.lambdas) {
    const auto mu = moments(lam, quad, 2);
    var.push_back(mu[1] - mu[0] * mu[0]);
  }
  const auto labels = fit.gamma.hard_labels(i);
  JumpSeries out;
  out.up.assign(labels.size(), 0);
  out.down.assign(labels.size(), 0);
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (labels[t] == labels[t - 1]) continue;
    const double before = var[static_cast<std::size_t>(labels[t - 1])];
    const double after = var[static_cast<std::size_t>(labels[t])];
    if (after > before) out.up[t] = 1;
    if (after < before) out.down[t] = 1;
  }
  return out;
}

namespace {

__extension__ typedef unsigned __int128 u128;

u128 binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (std::uint64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;  // exact at each step
  return r;
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Beyond this total the binomial products may overflow 128 bits.
constexpr std::uint64_t kExactTotal = 120;

}  // namespace

double fisher_exact(const ContingencyTable2x2& table) {
  const std::uint64_t r1 = table.a + table.b;
  const std::uint64_t r2 = table.c + table.d;
  const std::uint64_t c1 = table.a + table.c;
  const std::uint64_t total = r1 + r2;
  if (total == 0) throw DomainError("contingency table is empty");
  const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0;
  const std::uint64_t hi = std::min(r1, c1);

  if (total <= kExactTotal) {
    // Probabilities share the denominator C(total, c1); compare numerators.
    const u128 observed = binomial(r1, table.a) * binomial(r2, c1 - table.a);
    u128 tail = 0;
    for (std::uint64_t x = lo; x <= hi; ++x) {
      const u128 w = binomial(r1, x) * binomial(r2, c1 - x);
      if (w <= observed) tail += w;
    }
    const u128 den = binomial(total, c1);
    if (tail >= den) return 1.0;
    return static_cast<double>(tail) / static_cast<double>(den);
  }

  const auto lp = [&](std::uint64_t x) {
    return log_binomial(static_cast<double>(r1), static_cast<double>(x)) +
           log_binomial(static_cast<double>(r2), static_cast<double>(c1 - x)) -
           log_binomial(static_cast<double>(total), static_cast<double>(c1));
  };
  const double observed = lp(table.a);
  double p = 0.0;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    const double v = lp(x);
    if (v <= observed + 1e-7 * std::abs(observed)) p += std::exp(v);
  }
  return std::min(1.0, p);
}

std::string to_string(JumpKind kind) { return kind == JumpKind::Up ? "up" : "down"; }

RelationGraph transition_graph(const std::vector<std::string>& names,
                               const std::vector<JumpSeries>& jumps,
                               const TransitionGraphOptions& options) {
  if (names.size() != jumps.size()) throw DomainError("need one name per jump series");
  if (!(options.p_threshold >= 0.0 && options.p_threshold <= 1.0))
    throw DomainError("p threshold must lie in [0, 1]");
  RelationGraph graph;
  graph.nodes = names;
  if (jumps.size() < 2) return graph;
  const std::size_t T = jumps.front().up.size();
  for (const auto& j : jumps)
    if (j.up.size() != T || j.down.size() != T) throw DomainError("jump series differ in length");

  const JumpKind kinds[] = {JumpKind::Up, JumpKind::Down};
  const auto series = [&](std::size_t s, JumpKind kind) -> const std::vector<std::uint8_t>& {
    return kind == JumpKind::Up ? jumps[s].up : jumps[s].down;
  };
  for (std::size_t s = 0; s < jumps.size(); ++s) {
    for (std::size_t g = 0; g < jumps.size(); ++g) {
      if (s == g) continue;
      for (JumpKind sk : kinds) {
        for (JumpKind gk : kinds) {
          const auto& src = series(s, sk);
          const auto& dst = series(g, gk);
          RelationEdge best{s, g, sk, gk, 0, 2.0};
          for (std::size_t lag = 0; lag <= options.max_lag && lag < T; ++lag) {
            ContingencyTable2x2 tab;
            for (std::size_t u = 0; u + lag < T; ++u) {
              const bool x = src[u] != 0;
              const bool y = dst[u + lag] != 0;
              if (x && y) ++tab.a;
              else if (x) ++tab.b;
              else if (y) ++tab.c;
              else ++tab.d;
            }
            const double p = fisher_exact(tab);
            if (p < best.p_value) {
              best.p_value = p;
              best.lag = lag;
            }
          }
          if (best.p_value <= options.p_threshold) graph.edges.push_back(best);
        }
      }
    }
  }
  return graph;
}

RelationGraph transition_graph(const FitResult& fit, const std::vector<std::string>& names,
                               const QuadratureRule& quad,
                               const TransitionGraphOptions& options) {
  if (names.size() != fit.gamma.dims()) throw DomainError("need one name per dimension");
  std::vector<JumpSeries> jumps;
  for (std::size_t i = 0; i < names.size(); ++i) jumps.push_back(jump_series(fit, i, quad));
  return transition_graph(names, jumps, options);
}

std::string RelationGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["nodes"] = nodes;
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : edges) {
    nlohmann::ordered_json j;
    j["source"] = nodes.at(e.source);
    j["target"] = nodes.at(e.target);
    j["source_jump"] = to_string(e.source_kind);
    j["target_jump"] = to_string(e.target_kind);
    j["lag"] = e.lag;
    j["p_value"] = e.p_value;
    doc["edges"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string RelationGraph::to_dot() const {
  const auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << "digraph transitions {\n";
  for (const auto& n : nodes) os << "  " << quote(n) << ";\n";
  for (const auto& e : edges) {
    const double width = std::min(8.0, 1.0 + std::max(0.0, -std::log10(std::max(e.p_value, 1e-300)) - 2.0));
    os << "  " << quote(nodes.at(e.source)) << " -> " << quote(nodes.at(e.target))
       << " [label=" << quote(to_string(e.source_kind) + "/" + to_string(e.target_kind) +
                              " lag " + std::to_string(e.lag))
       << ", penwidth=" << width << ", p=" << e.p_value << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tvent

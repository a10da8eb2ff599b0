#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "arda/oracles.hpp"
#include "arda/params.hpp"
#include "arda/problems.hpp"

namespace arda {

/// Raised for malformed or inconsistent run configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::string name = "quadratic";  // quadratic | quadratic1d | rosenbrock | quartic | sigmoid-ls
  int n = 2;
  std::string dataset;  // sigmoid-ls: CSV path; empty means synthetic
  long synthetic_N = 10000;
  std::uint64_t dataset_seed = 1;

  bool operator==(const ProblemConfig&) const = default;
};

struct OracleConfig {
  std::string kind = "exact";  // exact | noisy | subsampled
  double noise_fraction = 0.9;
  double t_bar = 0.1;
  std::optional<double> t;  // derived from t_bar and eps when absent

  bool operator==(const OracleConfig&) const = default;
};

struct OutputConfig {
  std::string trace;
  std::string summary;

  bool operator==(const OutputConfig&) const = default;
};

/// Everything one solve needs. Serialized as JSON with sections
/// "problem", "orders", "oracle", "params", "output" and a top-level "seed".
struct RunConfig {
  ProblemConfig problem;
  Orders orders;
  OracleConfig oracle;
  AlgoParams params;
  std::uint64_t seed = 0;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;

  void validate() const {
    try {
      orders.validate();
      params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    static const std::set<std::string> problems{"quadratic", "quadratic1d", "rosenbrock", "quartic", "sigmoid-ls"};
    if (!problems.count(problem.name)) throw ConfigError("unknown problem '" + problem.name + "'");
    if (problem.n < 1) throw ConfigError("problem.n must be positive");
    if (problem.synthetic_N < 1) throw ConfigError("problem.synthetic_N must be positive");
    if (oracle.kind != "exact" && oracle.kind != "noisy" && oracle.kind != "subsampled")
      throw ConfigError("unknown oracle '" + oracle.kind + "' (expected exact|noisy|subsampled)");
    if (!(oracle.noise_fraction >= 0.0 && oracle.noise_fraction <= 1.0))
      throw ConfigError("oracle.noise_fraction must lie in [0,1]");
    if (!(oracle.t_bar > 0.0 && oracle.t_bar < 1.0)) throw ConfigError("oracle.t_bar must lie in (0,1)");
    if (oracle.t && !(*oracle.t > 0.0 && *oracle.t < 1.0)) throw ConfigError("oracle.t must lie in (0,1)");
    if (oracle.kind == "subsampled" && problem.name != "sigmoid-ls")
      throw ConfigError("the subsampled oracle needs the sigmoid-ls problem");
  }

  double effective_t() const {
    return oracle.t ? *oracle.t : StochasticConfig::auto_t(oracle.t_bar, params.eps, orders);
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool found = false;
    for (const char* a : allowed) found = found || key == a;
    if (!found) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["problem"] = {{"name", c.problem.name},
                  {"n", c.problem.n},
                  {"dataset", c.problem.dataset},
                  {"synthetic_N", c.problem.synthetic_N},
                  {"dataset_seed", c.problem.dataset_seed}};
  j["orders"] = {{"p", c.orders.p}, {"q", c.orders.q}, {"beta", c.orders.beta}};
  j["oracle"] = {{"kind", c.oracle.kind}, {"noise_fraction", c.oracle.noise_fraction}, {"t_bar", c.oracle.t_bar}};
  if (c.oracle.t) j["oracle"]["t"] = *c.oracle.t;
  const AlgoParams& p = c.params;
  j["params"] = {{"eta1", p.eta1},           {"eta2", p.eta2},
                 {"gamma1", p.gamma1},       {"gamma2", p.gamma2},
                 {"gamma3", p.gamma3},       {"sigma0", p.sigma0},
                 {"sigma_min", p.sigma_min}, {"alpha", p.alpha},
                 {"kappa_omega", p.kappa_omega}, {"theta", p.theta},
                 {"mu", p.mu},               {"vartheta", p.vartheta},
                 {"delta_init", p.delta_init}, {"eps", p.eps},
                 {"gamma_eps", p.gamma_eps}, {"kappa_eps", p.kappa_eps},
                 {"max_iter", p.max_iter},   {"schedule", to_string(p.schedule)}};
  j["seed"] = c.seed;
  j["output"] = {{"trace", c.output.trace}, {"summary", c.output.summary}};
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::read;
  RunConfig c;
  detail::check_keys(j, "config", {"problem", "orders", "oracle", "params", "seed", "output"});
  if (j.contains("problem")) {
    const auto& s = j["problem"];
    detail::check_keys(s, "problem", {"name", "n", "dataset", "synthetic_N", "dataset_seed"});
    read(s, "name", c.problem.name, "problem");
    read(s, "n", c.problem.n, "problem");
    read(s, "dataset", c.problem.dataset, "problem");
    read(s, "synthetic_N", c.problem.synthetic_N, "problem");
    read(s, "dataset_seed", c.problem.dataset_seed, "problem");
  }
  if (j.contains("orders")) {
    const auto& s = j["orders"];
    detail::check_keys(s, "orders", {"p", "q", "beta"});
    read(s, "p", c.orders.p, "orders");
    read(s, "q", c.orders.q, "orders");
    read(s, "beta", c.orders.beta, "orders");
  }
  if (j.contains("oracle")) {
    const auto& s = j["oracle"];
    detail::check_keys(s, "oracle", {"kind", "noise_fraction", "t_bar", "t"});
    read(s, "kind", c.oracle.kind, "oracle");
    read(s, "noise_fraction", c.oracle.noise_fraction, "oracle");
    read(s, "t_bar", c.oracle.t_bar, "oracle");
    if (s.contains("t")) {
      double t = 0.0;
      read(s, "t", t, "oracle");
      c.oracle.t = t;
    }
  }
  if (j.contains("params")) {
    const auto& s = j["params"];
    detail::check_keys(s, "params",
                       {"eta1", "eta2", "gamma1", "gamma2", "gamma3", "sigma0", "sigma_min", "alpha", "kappa_omega",
                        "theta", "mu", "vartheta", "delta_init", "eps", "gamma_eps", "kappa_eps", "max_iter",
                        "schedule"});
    AlgoParams& p = c.params;
    read(s, "eta1", p.eta1, "params");
    read(s, "eta2", p.eta2, "params");
    read(s, "gamma1", p.gamma1, "params");
    read(s, "gamma2", p.gamma2, "params");
    read(s, "gamma3", p.gamma3, "params");
    read(s, "sigma0", p.sigma0, "params");
    read(s, "sigma_min", p.sigma_min, "params");
    read(s, "alpha", p.alpha, "params");
    read(s, "kappa_omega", p.kappa_omega, "params");
    read(s, "theta", p.theta, "params");
    read(s, "mu", p.mu, "params");
    read(s, "vartheta", p.vartheta, "params");
    read(s, "delta_init", p.delta_init, "params");
    read(s, "eps", p.eps, "params");
    read(s, "gamma_eps", p.gamma_eps, "params");
    read(s, "kappa_eps", p.kappa_eps, "params");
    read(s, "max_iter", p.max_iter, "params");
    if (s.contains("schedule")) {
      std::string name;
      read(s, "schedule", name, "params");
      try {
        p.schedule = schedule_from_string(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params.schedule: ") + e.what());
      }
    }
  }
  read(j, "seed", c.seed, "config");
  if (j.contains("output")) {
    const auto& s = j["output"];
    detail::check_keys(s, "output", {"trace", "summary"});
    read(s, "trace", c.output.trace, "output");
    read(s, "summary", c.output.summary, "output");
  }
  return c;
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::shared_ptr<const Problem> make_problem(const RunConfig& c) {
  const auto& pc = c.problem;
  if (pc.name == "quadratic") return std::make_shared<const Problem>(make_default_quadratic(pc.n));
  if (pc.name == "quadratic1d") return std::make_shared<const Problem>(make_default_quadratic(1));
  if (pc.name == "rosenbrock") return std::make_shared<const Problem>(make_rosenbrock());
  if (pc.name == "quartic") return std::make_shared<const Problem>(make_quartic(Vector::Ones(pc.n)));
  if (pc.name == "sigmoid-ls") {
    auto ds = std::make_shared<const Dataset>(pc.dataset.empty()
                                                  ? make_synthetic_dataset(pc.synthetic_N, pc.n, pc.dataset_seed)
                                                  : load_dataset(pc.dataset));
    return std::make_shared<const Problem>(make_sigmoid_ls(ds));
  }
  throw ConfigError("unknown problem '" + pc.name + "'");
}

inline std::unique_ptr<Oracle> make_oracle(const RunConfig& c, const std::shared_ptr<const Problem>& p) {
  if (c.oracle.kind == "exact") return std::make_unique<ExactOracle>(p);
  if (c.oracle.kind == "noisy") return std::make_unique<NoisyOracle>(p, c.oracle.noise_fraction, c.seed);
  if (c.oracle.kind == "subsampled") {
    if (!p->dataset) throw ConfigError("the subsampled oracle needs a finite-sum problem");
    return std::make_unique<SubsampledOracle>(p->dataset, c.effective_t(), c.seed);
  }
  throw ConfigError("unknown oracle '" + c.oracle.kind + "'");
}

}  // namespace arda

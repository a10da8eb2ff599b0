// Command-line harness: single solves, epsilon-grid scaling studies and
// sample-size validation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arda/arda.hpp"

namespace fs = std::filesystem;
using namespace arda;

namespace {

enum Exit : int { kOk = 0, kError = 1, kUsage = 2, kBudget = 3, kCheckFailed = 4 };

struct Overrides {
  std::string config_path;
  std::optional<std::string> problem;
  std::optional<int> n;
  std::optional<std::string> dataset;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> schedule;
  std::optional<std::string> oracle;
  std::optional<double> noise_fraction;
  std::optional<double> t;
  std::optional<int> p;
  std::optional<int> q;
  std::optional<long> max_iter;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--problem", o.problem, "quadratic|quadratic1d|rosenbrock|quartic|sigmoid-ls");
  cmd->add_option("--n", o.n, "problem dimension (feature count for sigmoid-ls)");
  cmd->add_option("--dataset", o.dataset, "CSV dataset for sigmoid-ls");
  cmd->add_option("--eps", o.eps, "target accuracy in (0,1)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--schedule", o.schedule, "flexible|monotonic");
  cmd->add_option("--oracle", o.oracle, "exact|noisy|subsampled");
  cmd->add_option("--noise-fraction", o.noise_fraction, "noisy oracle error as a fraction of the accuracy");
  cmd->add_option("--t", o.t, "per-inequality failure probability of the subsampled oracle");
  cmd->add_option("--p", o.p, "model degree (1 or 2)");
  cmd->add_option("--q", o.q, "optimality order (1 or 2)");
  cmd->add_option("--max-iter", o.max_iter, "iteration budget");
  cmd->add_option("--out", o.out_dir, "output directory");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.problem) c.problem.name = *o.problem;
  if (o.n) c.problem.n = *o.n;
  if (o.dataset) c.problem.dataset = *o.dataset;
  if (o.eps) c.params.eps = *o.eps;
  if (o.seed) c.seed = *o.seed;
  if (o.schedule) {
    try {
      c.params.schedule = schedule_from_string(*o.schedule);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.oracle) c.oracle.kind = *o.oracle;
  if (o.noise_fraction) c.oracle.noise_fraction = *o.noise_fraction;
  if (o.t) c.oracle.t = *o.t;
  if (o.p) c.orders.p = *o.p;
  if (o.q) c.orders.q = *o.q;
  if (o.max_iter) c.params.max_iter = *o.max_iter;
  c.validate();
  return c;
}

std::optional<ComplexityBudget> try_budget(const Problem& p, const RunConfig& c, double eps) {
  if (!p.L(c.orders.p) || !p.f_low) return std::nullopt;
  return complexity_budget(p, c.params, c.orders, eps);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

int cmd_solve(const Overrides& o) {
  const RunConfig c = build_config(o);
  const auto problem = make_problem(c);
  auto oracle = make_oracle(c, problem);
  const RunReport rep = run(*problem, *oracle, c.params, c.orders);
  const auto summary = summary_to_json(rep, *problem, c.params, try_budget(*problem, c, c.params.eps));

  fs::path trace_path = c.output.trace, summary_path = c.output.summary;
  // relative config paths land under --out
  if (!o.out_dir.empty()) {
    trace_path = fs::path(o.out_dir) / (trace_path.empty() ? fs::path("trace.jsonl") : trace_path);
    summary_path = fs::path(o.out_dir) / (summary_path.empty() ? fs::path("summary.json") : summary_path);
  }
  if (!trace_path.empty()) {
    auto out = open_out(trace_path);
    write_trace(out, rep);
  }
  if (!summary_path.empty()) {
    auto out = open_out(summary_path);
    out << summary.dump() << '\n';
  }
  std::cout << summary.dump() << '\n';
  return rep.status.kind == TerminationKind::Budget ? kBudget : kOk;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto a = spec.find(':'), b = spec.rfind(':');
  if (a == std::string::npos || a == b) throw ConfigError("--eps-grid expects LO:HI:POINTS");
  double lo = 0, hi = 0;
  long pts = 0;
  try {
    lo = std::stod(spec.substr(0, a));
    hi = std::stod(spec.substr(a + 1, b - a - 1));
    pts = std::stol(spec.substr(b + 1));
  } catch (const std::exception&) {
    throw ConfigError("--eps-grid expects LO:HI:POINTS, got '" + spec + "'");
  }
  if (!(lo > 0 && lo <= hi && hi < 1 && pts >= 1)) throw ConfigError("--eps-grid needs 0 < LO <= HI < 1, POINTS >= 1");
  std::vector<double> grid;
  for (long i = 0; i < pts; ++i) {
    const double f = pts == 1 ? 0.0 : static_cast<double>(i) / (pts - 1);
    grid.push_back(std::exp(std::log(hi) + f * (std::log(lo) - std::log(hi))));
  }
  return grid;
}

int cmd_scaling(const Overrides& o, const std::string& grid_spec) {
  const RunConfig base = build_config(o);
  const auto grid = parse_grid(grid_spec);
  const auto problem = make_problem(base);
  const fs::path csv_path = fs::path(o.out_dir.empty() ? "." : o.out_dir) / "scaling.csv";
  auto csv = open_out(csv_path);
  csv << "eps,status,successful_iters,total_iters,fun_evals,deriv_evals,component_evals,total_shrinks,"
         "theorem_bound_succ,theorem_bound_total,bounds_ok,counting_ok\n";
  csv.precision(10);
  bool all_ok = true;
  std::vector<double> lx, ly;
  for (double eps : grid) {
    RunConfig c = base;
    c.params.eps = eps;
    c.validate();
    auto oracle = make_oracle(c, problem);
    const RunReport rep = run(*problem, *oracle, c.params, c.orders);
    const auto budget = try_budget(*problem, c, eps);
    bool ok = true;
    std::string why;
    if (budget) {
      const auto chk = check_theorem_bounds(rep, *budget, c.params);
      const auto shr = check_shrinks(rep, c.params, budget->nu_max);
      ok = chk.ok && shr.ok;
      why = !chk.ok ? chk.detail : shr.detail;
    }
    const auto cnt = check_counting(rep, c.params);
    if (!cnt.ok) why = cnt.detail;
    ok = ok && cnt.ok;
    all_ok = all_ok && ok;
    if (!ok) std::cerr << "eps=" << eps << ": " << why << '\n';
    csv << eps << ',' << to_string(rep.status.kind) << ',' << rep.successful() << ',' << rep.iterations() << ','
        << rep.counters.fun_evals << ',' << rep.counters.total_deriv_evals() << ',' << rep.counters.component_evals
        << ',' << rep.total_shrinks << ',';
    if (budget)
      csv << budget->successful_bound << ',' << budget->tau << ',';
    else
      csv << ",,";
    csv << (budget ? (ok ? "1" : "0") : "") << ',' << (cnt.ok ? 1 : 0) << '\n';
    if (rep.successful() > 0) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(static_cast<double>(rep.successful())));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    if (sxx > 0)
      std::cout << "fitted slope of log(successful) vs log(eps): " << sxy / sxx << " (worst-case exponent -"
                << base.orders.complexity_exponent() << ")\n";
  }
  std::cout << "wrote " << csv_path.string() << '\n';
  return all_ok ? kOk : kCheckFailed;
}

int cmd_sample_check(const Overrides& o, long trials, const std::vector<double>& factors) {
  RunConfig c = build_config(o);
  if (c.problem.name != "sigmoid-ls") throw ConfigError("sample-check needs --problem sigmoid-ls");
  const auto problem = make_problem(c);
  const Dataset& ds = *problem->dataset;
  const double t = c.oracle.t ? *c.oracle.t : 0.05;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> nd;
  Vector x(ds.dim());
  for (auto& v : x) v = nd(rng);
  const fs::path csv_path = fs::path(o.out_dir.empty() ? "." : o.out_dir) / "sample_check.csv";
  auto csv = open_out(csv_path);
  csv << "order,eps,m,trials,failures,frequency,threshold,ok\n";
  csv.precision(10);
  bool all_ok = true;
  std::uint64_t stream = c.seed;
  for (int j = 0; j <= 2; ++j)
    for (double f : factors) {
      const double eps = f * ds.kappa[j];
      if (!(eps > 0)) continue;
      const auto sc = sample_check(ds, x, j, eps, t, trials, ++stream);
      all_ok = all_ok && sc.ok;
      csv << j << ',' << eps << ',' << sc.m << ',' << sc.trials << ',' << sc.failures << ',' << sc.frequency << ','
          << sc.threshold << ',' << (sc.ok ? 1 : 0) << '\n';
      std::cout << "order " << j << " eps " << eps << " m " << sc.m << " failure rate " << sc.frequency
                << (sc.ok ? " <= " : " > ") << sc.threshold << '\n';
    }
  std::cout << "wrote " << csv_path.string() << '\n';
  return all_ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive regularization with dynamic accuracy (p, q in {1,2})"};
  app.require_subcommand(1);

  Overrides solve_o, scale_o, sample_o;
  auto* solve = app.add_subcommand("solve", "run the solver once and write its trace");
  add_common(solve, solve_o);

  auto* scaling = app.add_subcommand("scaling", "solve over an epsilon grid and check the worst-case bounds");
  add_common(scaling, scale_o);
  std::string grid = "1e-5:1e-1:5";
  scaling->add_option("--eps-grid", grid, "LO:HI:POINTS, log-spaced");

  auto* sample = app.add_subcommand("sample-check", "validate subsample sizes by resampling");
  add_common(sample, sample_o);
  long trials = 2000;
  std::vector<double> factors{0.1, 0.3, 1.0};
  sample->add_option("--trials", trials, "resamples per (order, eps)");
  sample->add_option("--eps-factors", factors, "eps_j as multiples of kappa_j");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    if (*solve) return cmd_solve(solve_o);
    if (*scaling) return cmd_scaling(scale_o, grid);
    if (*sample) return cmd_sample_check(sample_o, trials, factors);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kUsage;
}

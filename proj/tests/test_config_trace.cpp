#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "arda/config.hpp"
#include "arda/trace.hpp"

using namespace arda;

TEST(Config, RoundTrip) {
  RunConfig c;
  c.problem.name = "sigmoid-ls";
  c.problem.n = 7;
  c.problem.synthetic_N = 321;
  c.orders = Orders{2, 2, 1.0};
  c.oracle.kind = "subsampled";
  c.oracle.t = 0.0125;
  c.params.eps = 3e-4;
  c.params.schedule = Schedule::Monotonic;
  c.params.sigma0 = 0.1 + 0.2;  // not exactly representable in decimal
  c.seed = 0xfeedfacecafebeefULL;
  c.output.trace = "out/trace.jsonl";
  EXPECT_EQ(parse_config(serialize_config(c)), c);
  EXPECT_EQ(parse_config(serialize_config(RunConfig{})), RunConfig{});
}

TEST(Config, PartialConfigKeepsDefaults) {
  const RunConfig c = parse_config(R"({"params": {"eps": 0.01}, "orders": {"p": 1}})");
  EXPECT_EQ(c.params.eps, 0.01);
  EXPECT_EQ(c.orders.p, 1);
  EXPECT_EQ(c.params.eta1, AlgoParams{}.eta1);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"params": {"epsilon": 0.01}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"eps": "small"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"schedule": "sometimes"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  RunConfig c = parse_config(R"({"params": {"kappa_omega": 0.5}})");
  EXPECT_THROW(c.validate(), ConfigError);
  c = parse_config(R"({"oracle": {"kind": "subsampled"}})");
  EXPECT_THROW(c.validate(), ConfigError);
  c = parse_config(R"({"problem": {"name": "himmelblau"}})");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, FactoriesBuildWhatTheyName) {
  RunConfig c;
  c.problem.name = "quartic";
  c.problem.n = 3;
  c.oracle.kind = "noisy";
  auto p = make_problem(c);
  EXPECT_EQ(p->n, 3);
  EXPECT_STREQ(make_oracle(c, p)->kind(), "noisy");
  c.problem.name = "sigmoid-ls";
  c.problem.synthetic_N = 50;
  c.oracle.kind = "subsampled";
  c.params.eps = 1e-2;
  auto s = make_problem(c);
  auto o = make_oracle(c, s);
  EXPECT_STREQ(o->kind(), "subsampled");
  EXPECT_NEAR(static_cast<SubsampledOracle&>(*o).t(), 2e-5, 1e-18);
}

TEST(Trace, RecordFieldSetIsPinned) {
  AlgoParams prm;
  prm.eps = 1e-3;
  auto p = std::make_shared<const Problem>(make_default_quadratic(1));
  ExactOracle o(p);
  const RunReport rep = run(*p, o, prm, Orders{1, 1, 1.0});
  const auto j = record_to_json(rep.trace.front());
  std::set<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.insert(k);
  const std::set<std::string> want{"schema", "type", "k", "terminal", "sigma", "sigma_next", "omega", "f_estimate",
                                   "rho", "step_norm", "success", "delta_k", "delta_T", "phi_bar", "mterm_clause",
                                   "eps", "shrinks", "flags", "fun_evals", "deriv_evals", "component_evals",
                                   "sample_sizes", "full_batch"};
  EXPECT_EQ(keys, want);
  EXPECT_EQ(j["schema"], kTraceSchema);
  EXPECT_TRUE(record_to_json(rep.trace.back())["rho"].is_null());

  const auto s = summary_to_json(rep, *p, prm, complexity_budget(*p, prm, Orders{1, 1, 1.0}, prm.eps));
  EXPECT_EQ(s["schema"], kTraceSchema);
  EXPECT_EQ(s["successful"], 1);
  EXPECT_TRUE(s["bounds_ok"].get<bool>());
  EXPECT_TRUE(s.contains("budget"));
}

TEST(Trace, ByteIdenticalOnReplay) {
  AlgoParams prm;
  prm.eps = 1e-4;
  auto p = std::make_shared<const Problem>(make_rosenbrock());
  std::string out[2];
  for (auto& text : out) {
    NoisyOracle o(p, 0.9, 21);
    std::ostringstream os;
    write_trace(os, run(*p, o, prm, Orders{2, 1, 1.0}));
    text = os.str();
  }
  EXPECT_FALSE(out[0].empty());
  EXPECT_EQ(out[0], out[1]);
}

TEST(Trace, DigestDependsOnBits) {
  Vector a = Vector::Zero(2), b = Vector::Zero(2);
  b[1] = -0.0;
  EXPECT_NE(digest(a), digest(b));
  EXPECT_EQ(digest(a), digest(Vector::Zero(2)));
}

#include <gtest/gtest.h>

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

#include "linucbd/error.hpp"
#include "linucbd/experiment.hpp"
#include "linucbd/policy.hpp"
#include "linucbd/presets.hpp"
#include "linucbd/simulate.hpp"
#include "linucbd/trace_io.hpp"

using namespace linucbd;

namespace {

ExperimentConfig small_config(const std::string& name, std::size_t T, std::size_t runs) {
  auto config = ExperimentConfig::from_preset(name);
  config.horizon = T;
  config.runs = runs;
  config.master_seed = 17;
  return config;
}

nlohmann::json without_wall_time(nlohmann::json doc) {
  doc.erase("wall_time_seconds");
  return doc;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

}  // namespace

TEST(Checkpoints, Defaults) {
  EXPECT_EQ(default_checkpoints(5), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  const auto cps = default_checkpoints(200000);
  EXPECT_EQ(cps.front(), 10u);
  EXPECT_EQ(cps.back(), 200000u);
  EXPECT_LE(cps.size(), 50u);
  EXPECT_GE(cps.size(), 45u);
  EXPECT_TRUE(std::is_sorted(cps.begin(), cps.end()));
  EXPECT_EQ(std::adjacent_find(cps.begin(), cps.end()), cps.end());
}

TEST(Checkpoints, ValidProperty) {
  for (std::size_t T = 1; T < 5000; T = T * 3 / 2 + 1) {
    const auto cps = default_checkpoints(T);
    ASSERT_FALSE(cps.empty());
    EXPECT_EQ(cps.back(), T);
    EXPECT_GE(cps.front(), 1u);
    for (std::size_t i = 1; i < cps.size(); ++i) EXPECT_LT(cps[i - 1], cps[i]);
  }
}

TEST(Seeds, MixSeedIsDeterministicAndSpreads) {
  EXPECT_EQ(mix_seed(1, 2, 3), mix_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 8; ++m)
    for (std::uint64_t r = 0; r < 64; ++r)
      for (std::uint64_t s = 0; s < 4; ++s) seen.insert(mix_seed(m, r, s));
  EXPECT_EQ(seen.size(), 8u * 64u * 4u);
}

TEST(Seeds, MixSeedMatchesSplitmixReference) {
  std::uint64_t z = 0 + 0x9E3779B97F4A7C15ULL * 1 + 0xBF58476D1CE4E5B9ULL * 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  EXPECT_EQ(mix_seed(0, 0, 0), z);
}

TEST(MeanStd, SampleStd) {
  const auto [m, s] = mean_and_std({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(s, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(mean_and_std({7}).second, 0.0);
  EXPECT_EQ(mean_and_std({}).first, 0.0);
}

TEST(Experiment, ByteIdenticalAcrossJobCounts) {
  auto config = small_config("paper61", 3000, 6);
  const auto a = run_experiment(config, 1);
  const auto b = run_experiment(config, 3);
  EXPECT_EQ(regret_csv(a), regret_csv(b));
  EXPECT_EQ(without_wall_time(summary_json(a, config)).dump(), without_wall_time(summary_json(b, config)).dump());
}

TEST(Experiment, CsvRowsAndRoundTrip) {
  auto config = small_config("paper61", 100, 3);
  config.policies = {"linucb-d", "greedy"};
  config.checkpoints = {10, 50, 100};
  const auto result = run_experiment(config, 2);
  const std::string csv = regret_csv(result);
  const auto rows = parse_regret_csv(csv);
  ASSERT_EQ(rows.size(), 6u);
  std::size_t i = 0;
  for (const auto& curve : result.curves) {
    for (std::size_t k = 0; k < result.checkpoints.size(); ++k, ++i) {
      EXPECT_EQ(rows[i].policy, curve.policy);
      EXPECT_EQ(rows[i].t, result.checkpoints[k]);
      EXPECT_EQ(rows[i].mean, curve.mean[k]);
      EXPECT_EQ(rows[i].std, curve.std[k]);
      EXPECT_EQ(rows[i].runs, 3u);
    }
  }
}

TEST(Experiment, EmptyResultIsHeaderOnly) {
  const AggregateResult empty;
  const std::string csv = regret_csv(empty);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_TRUE(parse_regret_csv(csv).empty());
}

TEST(Experiment, MalformedCsv) {
  EXPECT_EQ(code_of([] { parse_regret_csv("policy,t,mean_pseudo_regret,std_pseudo_regret,runs\nx,1,2\n"); }),
            ErrorCode::kParse);
  EXPECT_EQ(code_of([] { parse_regret_csv("nonsense\n"); }), ErrorCode::kParse);
}

TEST(Experiment, NoiselessGreedyIsReproducible) {
  auto config = ExperimentConfig::from_json(
      {{"preset", "paper61"}, {"noise", "none"}, {"policies", {"greedy"}}, {"T", 500}, {"runs", 3}});
  const auto a = run_experiment(config, 1);
  const auto b = run_experiment(config, 2);
  EXPECT_EQ(a.curves[0].per_run, b.curves[0].per_run);
  EXPECT_EQ(a.curves[0].realized_mean, a.curves[0].final_mean);
}

TEST(Experiment, RegretNondecreasingAndMatchesTraces) {
  auto config = small_config("paper61-diverse", 2000, 4);
  config.policies = {"linucb-d", "ucb-per-context"};
  config.diagnostics = true;
  std::mutex m;
  std::vector<std::vector<double>> from_traces(config.policies.size(), std::vector<double>(config.runs));
  const auto result = run_experiment(config, 2, [&](std::size_t run, std::size_t p, Trace&& tr) {
    double sum = 0.0;
    double prev = 0.0;
    for (std::size_t t = 1; t <= tr.rounds; ++t) {
      EXPECT_GE(tr.regret[t - 1], -1e-15);
      sum += tr.regret[t - 1];
      EXPECT_GE(sum, prev);
      prev = sum;
    }
    std::lock_guard lock(m);
    from_traces[p][run] = sum;
  });
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    const auto& curve = result.curves[p];
    for (std::size_t r = 0; r < config.runs; ++r) {
      EXPECT_NEAR(curve.per_run[r].back(), from_traces[p][r], 1e-9);
      EXPECT_TRUE(std::is_sorted(curve.per_run[r].begin(), curve.per_run[r].end()));
    }
    double mean = 0.0;
    for (double v : from_traces[p]) mean += v / static_cast<double>(config.runs);
    EXPECT_NEAR(curve.final_mean, mean, 1e-9);
  }
}

TEST(Experiment, CommonRandomNumbersAcrossPolicies) {
  auto config = small_config("paper61", 300, 2);
  config.policies = {"linucb-d", "linucb"};
  config.diagnostics = true;
  std::mutex m;
  std::vector<std::vector<std::vector<std::int64_t>>> contexts(2, std::vector<std::vector<std::int64_t>>(2));
  run_experiment(config, 1, [&](std::size_t run, std::size_t p, Trace&& tr) {
    std::lock_guard lock(m);
    contexts[run][p] = tr.context;
  });
  EXPECT_EQ(contexts[0][0], contexts[0][1]);
  EXPECT_EQ(contexts[1][0], contexts[1][1]);
  EXPECT_NE(contexts[0][0], contexts[1][0]);
}

TEST(Experiment, AuditGapIsSmall) {
  auto config = small_config("paper61", 500, 2);
  config.policies = {"linucb-d"};
  config.audit = true;
  const auto result = run_experiment(config, 1);
  ASSERT_TRUE(result.audit_max_gap.has_value());
  EXPECT_LT(*result.audit_max_gap, 1e-7);
}

TEST(Config, JsonRoundTrip) {
  auto config = small_config("paper62", 1000, 2);
  config.checkpoints = {10, 100, 1000};
  auto doc = config.to_json();
  doc.erase("preset");
  const auto back = ExperimentConfig::from_json(doc);
  EXPECT_EQ(back.to_json()["instance"], config.to_json()["instance"]);
  EXPECT_EQ(back.horizon, 1000u);
  EXPECT_EQ(back.runs, 2u);
  EXPECT_EQ(back.master_seed, 17u);
  EXPECT_EQ(back.checkpoints, config.checkpoints);
  EXPECT_EQ(back.policies, config.policies);
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(nlohmann::json::array()); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json({{"T", 5}}); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json({{"preset", "nope"}}); }), ErrorCode::kUnknownPreset);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json({{"preset", "paper61"}, {"T", "many"}}); }),
            ErrorCode::kParse);
  auto bad = small_config("paper61", 100, 1);
  bad.policies = {"thompson"};
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::kUnknownPolicy);
  auto unsorted = small_config("paper61", 100, 1);
  unsorted.checkpoints = {50, 10};
  EXPECT_EQ(code_of([&] { unsorted.validate(); }), ErrorCode::kInvalidConfig);
  auto beyond = small_config("paper61", 100, 1);
  beyond.checkpoints = {10, 101};
  EXPECT_EQ(code_of([&] { beyond.validate(); }), ErrorCode::kInvalidConfig);
  auto long_diag = small_config("paper61", kDiagnosticsMaxHorizon + 1, 1);
  long_diag.diagnostics = true;
  EXPECT_EQ(code_of([&] { long_diag.validate(); }), ErrorCode::kInvalidConfig);
  auto tabular = small_config("paper62", 100, 1);
  tabular.policies = {"ucb-per-context"};
  EXPECT_EQ(code_of([&] { tabular.validate(); }), ErrorCode::kInvalidConfig);
  auto zero_runs = small_config("paper61", 100, 1);
  zero_runs.runs = 0;
  EXPECT_EQ(code_of([&] { zero_runs.validate(); }), ErrorCode::kInvalidConfig);
}

TEST(TraceIo, RoundTripFinite) {
  const Instance inst = preset("paper61").instance;
  auto p = make_policy("linucb-d", inst);
  RunOptions opt;
  opt.horizon = 200;
  opt.checkpoints = {200};
  opt.record_trace = true;
  const Trace tr = *simulate_run(inst, *p, 5, opt).trace;
  std::stringstream ss;
  write_trace(ss, inst, tr);
  const auto back = read_trace(ss);
  EXPECT_EQ(back.trace.rounds, tr.rounds);
  EXPECT_EQ(back.trace.policy, tr.policy);
  EXPECT_EQ(back.trace.seed, tr.seed);
  EXPECT_EQ(back.trace.context, tr.context);
  EXPECT_EQ(back.trace.chosen, tr.chosen);
  EXPECT_EQ(back.trace.optimal, tr.optimal);
  EXPECT_EQ(back.trace.regret, tr.regret);
  EXPECT_EQ(back.trace.alpha, tr.alpha);
  EXPECT_EQ(back.trace.r_hat, tr.r_hat);
  EXPECT_EQ(back.trace.sigma_hat, tr.sigma_hat);
  EXPECT_EQ(back.trace.reward, tr.reward);
  EXPECT_EQ(instance_to_json(back.instance), instance_to_json(inst));
  EXPECT_FALSE(back.partition.has_value());
}

TEST(TraceIo, RoundTripGeneralWithPartition) {
  const Instance inst = preset("paper62").instance;
  auto p = make_policy("linucb-d", inst);
  RunOptions opt;
  opt.horizon = 50;
  opt.checkpoints = {50};
  opt.record_trace = true;
  const Trace tr = *simulate_run(inst, *p, 6, opt).trace;
  MetaContextPartition part;
  part.anchors.assign(5, Matrix::Identity(4, 4));
  part.lambda0 = 1.0;
  part.radius = 0.25;
  part.p = 0.01;
  std::stringstream ss;
  write_trace(ss, inst, tr, &part);
  const auto back = read_trace(ss);
  EXPECT_EQ(back.trace.optimal_feature, tr.optimal_feature);
  ASSERT_TRUE(back.partition.has_value());
  EXPECT_EQ(back.partition->radius, 0.25);
  EXPECT_EQ(back.partition->anchors.size(), 5u);
}

TEST(TraceIo, Malformed) {
  std::stringstream empty;
  EXPECT_EQ(code_of([&] { read_trace(empty); }), ErrorCode::kParse);
  std::stringstream junk("{not json\n");
  EXPECT_EQ(code_of([&] { read_trace(junk); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { read_trace(std::filesystem::path("/nonexistent/trace.jsonl")); }), ErrorCode::kIo);
}

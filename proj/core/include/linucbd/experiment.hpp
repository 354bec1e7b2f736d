#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linucbd/model.hpp"
#include "linucbd/simulate.hpp"

namespace linucbd {

/// Traces are kept only up to this horizon.
inline constexpr std::size_t kDiagnosticsMaxHorizon = 200'000;
/// Audit ledgers grow with every new context; capped likewise.
inline constexpr std::size_t kAuditMaxHorizon = 100'000;

struct ExperimentConfig {
  explicit ExperimentConfig(Instance inst, std::optional<std::string> preset_name = std::nullopt)
      : preset(std::move(preset_name)), instance(std::move(inst)) {}

  std::optional<std::string> preset;
  Instance instance;
  std::vector<std::string> policies;
  std::size_t horizon = 1;
  std::size_t runs = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> checkpoints;  // empty: default_checkpoints(horizon)
  bool diagnostics = false;
  bool audit = false;

  /// Preset defaults (horizon, runs, policies).
  static ExperimentConfig from_preset(std::string_view name);
  /// {"preset": name} or {"instance": {...}}, plus optional "policies", "T",
  /// "runs", "master_seed", "checkpoints", "diagnostics", "audit".
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  /// Explicit checkpoints, or the default ones.
  std::vector<std::size_t> effective_checkpoints() const;
  /// Throws kInvalidConfig / kUnknownPolicy.
  void validate() const;
};

/// `count` log-spaced rounds from 10 to T (rounded, deduplicated, T included).
/// Horizons below 10 get every round.
std::vector<std::size_t> default_checkpoints(std::size_t T, std::size_t count = 50);

struct PolicyCurve {
  std::string policy;
  std::vector<double> mean;                   // per checkpoint
  std::vector<double> std;                    // sample standard deviation
  std::vector<std::vector<double>> per_run;   // [run][checkpoint]
  double final_mean = 0.0;
  double final_std = 0.0;
  double realized_mean = 0.0;
  double realized_std = 0.0;
  double suboptimal_pulls_mean = 0.0;
};

struct AggregateResult {
  std::vector<std::size_t> checkpoints;
  std::vector<PolicyCurve> curves;
  std::size_t runs = 0;
  double wall_seconds = 0.0;
  std::optional<double> audit_max_gap;  // aggregated vs explicit estimates
};

/// Receives each finished trace. Called from worker threads, one at a time.
using TraceSink = std::function<void(std::size_t run, std::size_t policy_index, Trace&& trace)>;

/// Runs every (run, policy) pair on `jobs` workers (0: hardware concurrency).
/// Run r uses the environment seed mix_seed(master_seed, r, kEnvironmentStream)
/// for every policy.
AggregateResult run_experiment(const ExperimentConfig& config, std::size_t jobs = 1,
                               const TraceSink& sink = {});

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_and_std(const std::vector<double>& values);

struct RegretRow {
  std::string policy;
  std::size_t t = 0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t runs = 0;
};

/// "policy,t,mean_pseudo_regret,std_pseudo_regret,runs" with %.17g values.
std::string regret_csv(const AggregateResult& result);
/// Throws kParse on malformed input.
std::vector<RegretRow> parse_regret_csv(std::string_view text);

nlohmann::json summary_json(const AggregateResult& result, const ExperimentConfig& config);

/// Writes regret.csv and summary.json into `out` (created if missing).
void emit_results(const AggregateResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& out);

}  // namespace linucbd

#include "linucbd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "linucbd/error.hpp"
#include "linucbd/policy.hpp"
#include "linucbd/presets.hpp"

namespace linucbd {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Largest gap between the aggregated and the explicit estimates of every arm,
// probed at a handful of rounds drawn from the instance.
double audit_gap(const LinUcbD& policy, const Instance& instance, std::uint64_t seed) {
  RoundSampler sampler(instance, seed);
  Round round;
  double gap = 0.0;
  for (int probe = 0; probe < 8; ++probe) {
    sampler.next(round);
    for (std::size_t a = 0; a < policy.arms(); ++a) {
      const Vector x = round.features.col(static_cast<Eigen::Index>(a));
      const Estimate fast = policy.arm(a).estimate(x, 0.0);
      const Estimate slow = policy.arm(a).estimate_explicit(x, 0.0);
      gap = std::max({gap, std::abs(fast.r_hat - slow.r_hat), std::abs(fast.sigma_hat - slow.sigma_hat)});
    }
  }
  return gap;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_preset(std::string_view name) {
  Preset p = linucbd::preset(name);
  ExperimentConfig config(std::move(p.instance), p.name);
  config.policies = std::move(p.policies);
  config.horizon = p.horizon;
  config.runs = p.runs;
  return config;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
    if (doc.contains("preset") == doc.contains("instance")) {
      throw Error(ErrorCode::kInvalidConfig, "config needs exactly one of 'preset' or 'instance'");
    }
    ExperimentConfig config = doc.contains("preset")
                                  ? from_preset(doc.at("preset").get<std::string>())
                                  : ExperimentConfig(instance_from_json(doc.at("instance")));
    if (doc.contains("noise")) {
      auto inst = instance_to_json(config.instance);
      inst["noise"] = doc.at("noise");
      config.instance = instance_from_json(inst);
    }
    if (doc.contains("policies")) config.policies = doc.at("policies").get<std::vector<std::string>>();
    config.horizon = doc.value("T", config.horizon);
    config.runs = doc.value("runs", config.runs);
    config.master_seed = doc.value("master_seed", config.master_seed);
    config.checkpoints = doc.value("checkpoints", config.checkpoints);
    config.diagnostics = doc.value("diagnostics", config.diagnostics);
    config.audit = doc.value("audit", config.audit);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc;
  if (preset) doc["preset"] = *preset;
  doc["instance"] = instance_to_json(instance);
  doc["policies"] = policies;
  doc["T"] = horizon;
  doc["runs"] = runs;
  doc["master_seed"] = master_seed;
  doc["checkpoints"] = effective_checkpoints();
  doc["diagnostics"] = diagnostics;
  doc["audit"] = audit;
  return doc;
}

std::vector<std::size_t> ExperimentConfig::effective_checkpoints() const {
  return checkpoints.empty() ? default_checkpoints(horizon) : checkpoints;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw Error(ErrorCode::kInvalidConfig, "T must be at least 1");
  if (runs < 1) throw Error(ErrorCode::kInvalidConfig, "runs must be at least 1");
  if (policies.empty()) throw Error(ErrorCode::kInvalidConfig, "no policies configured");
  const auto cps = effective_checkpoints();
  if (!std::is_sorted(cps.begin(), cps.end()) || std::adjacent_find(cps.begin(), cps.end()) != cps.end() ||
      cps.front() < 1 || cps.back() > horizon) {
    throw Error(ErrorCode::kInvalidConfig, "checkpoints must be strictly increasing and within [1, T]");
  }
  if (diagnostics && horizon > kDiagnosticsMaxHorizon) {
    throw Error(ErrorCode::kInvalidConfig, "diagnostics mode is limited to T <= 200000");
  }
  if (audit && horizon > kAuditMaxHorizon) {
    throw Error(ErrorCode::kInvalidConfig, "audit mode is limited to T <= 100000");
  }
  const auto report = validate_instance(instance);
  if (!report.valid) throw Error(ErrorCode::kInvalidInstance, report.violations.front());
  for (const auto& name : policies) make_policy(name, instance);
}

std::vector<std::size_t> default_checkpoints(std::size_t T, std::size_t count) {
  std::vector<std::size_t> out;
  if (T < 10 || count < 2) {
    for (std::size_t t = (T < 10 ? 1 : T); t <= T; ++t) out.push_back(t);
    return out;
  }
  const double lo = std::log(10.0);
  const double hi = std::log(static_cast<double>(T));
  for (std::size_t i = 0; i < count; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(std::exp(x))), 10, T));
  }
  out.back() = T;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

AggregateResult run_experiment(const ExperimentConfig& config, std::size_t jobs, const TraceSink& sink) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t P = config.policies.size();
  const std::size_t tasks = config.runs * P;

  RunOptions options;
  options.horizon = config.horizon;
  options.checkpoints = config.effective_checkpoints();
  options.record_trace = config.diagnostics;

  std::vector<RunResult> results(tasks);
  std::vector<double> audit_gaps(tasks, 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t run = task / P;
      const std::size_t pi = task % P;
      try {
        auto policy = make_policy(config.policies[pi], config.instance, config.audit);
        const std::uint64_t env_seed = mix_seed(config.master_seed, run, kEnvironmentStream);
        RunResult r = simulate_run(config.instance, *policy, env_seed, options);
        if (config.audit) {
          if (const LinUcbD* impl = as_linucb_d(*policy)) {
            audit_gaps[task] = audit_gap(*impl, config.instance, env_seed ^ 0xA5A5A5A5ULL);
          }
        }
        if (r.trace && sink) {
          std::lock_guard lock(sink_mutex);
          sink(run, pi, std::move(*r.trace));
        }
        r.trace.reset();
        results[task] = std::move(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, tasks);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  AggregateResult out;
  out.checkpoints = options.checkpoints;
  out.runs = config.runs;
  for (std::size_t pi = 0; pi < P; ++pi) {
    PolicyCurve curve;
    curve.policy = config.policies[pi];
    for (std::size_t run = 0; run < config.runs; ++run) {
      curve.per_run.push_back(results[run * P + pi].checkpoint_regret);
    }
    std::vector<double> column(config.runs);
    for (std::size_t c = 0; c < out.checkpoints.size(); ++c) {
      for (std::size_t run = 0; run < config.runs; ++run) column[run] = curve.per_run[run][c];
      const auto [m, s] = mean_and_std(column);
      curve.mean.push_back(m);
      curve.std.push_back(s);
    }
    for (std::size_t run = 0; run < config.runs; ++run) column[run] = results[run * P + pi].pseudo_regret;
    std::tie(curve.final_mean, curve.final_std) = mean_and_std(column);
    for (std::size_t run = 0; run < config.runs; ++run) column[run] = results[run * P + pi].realized_regret;
    std::tie(curve.realized_mean, curve.realized_std) = mean_and_std(column);
    for (std::size_t run = 0; run < config.runs; ++run) {
      column[run] = static_cast<double>(results[run * P + pi].suboptimal_pulls);
    }
    curve.suboptimal_pulls_mean = mean_and_std(column).first;
    out.curves.push_back(std::move(curve));
  }
  if (config.audit) out.audit_max_gap = *std::max_element(audit_gaps.begin(), audit_gaps.end());
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string regret_csv(const AggregateResult& result) {
  std::string csv = "policy,t,mean_pseudo_regret,std_pseudo_regret,runs\n";
  for (const auto& curve : result.curves) {
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
      csv += curve.policy + ',' + std::to_string(result.checkpoints[c]) + ',' + format_double(curve.mean[c]) +
             ',' + format_double(curve.std[c]) + ',' + std::to_string(result.runs) + '\n';
    }
  }
  return csv;
}

std::vector<RegretRow> parse_regret_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "policy,t,mean_pseudo_regret,std_pseudo_regret,runs") {
    throw Error(ErrorCode::kParse, "regret.csv header mismatch");
  }
  std::vector<RegretRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (fields.size() != 5) throw Error(ErrorCode::kParse, "regret.csv row needs 5 fields: " + line);
    try {
      RegretRow row;
      row.policy = fields[0];
      row.t = std::stoull(fields[1]);
      row.mean = std::stod(fields[2]);
      row.std = std::stod(fields[3]);
      row.runs = std::stoull(fields[4]);
      rows.push_back(std::move(row));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParse, "bad number in regret.csv row: " + line);
    }
  }
  return rows;
}

nlohmann::json summary_json(const AggregateResult& result, const ExperimentConfig& config) {
  nlohmann::json final_values = nlohmann::json::object();
  for (const auto& curve : result.curves) {
    final_values[curve.policy] = {{"mean_pseudo_regret", curve.final_mean},
                                  {"std_pseudo_regret", curve.final_std},
                                  {"mean_realized_regret", curve.realized_mean},
                                  {"std_realized_regret", curve.realized_std},
                                  {"mean_suboptimal_pulls", curve.suboptimal_pulls_mean}};
  }
  nlohmann::json doc = {{"config", config.to_json()},
                        {"wall_time_seconds", result.wall_seconds},
                        {"final", std::move(final_values)}};
  if (result.audit_max_gap) doc["audit_max_gap"] = *result.audit_max_gap;
  return doc;
}

void emit_results(const AggregateResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out.string() + ": " + ec.message());
  {
    std::ofstream csv(out / "regret.csv", std::ios::binary);
    csv << regret_csv(result);
    if (!csv) throw Error(ErrorCode::kIo, "failed writing regret.csv");
  }
  std::ofstream summary(out / "summary.json");
  summary << summary_json(result, config).dump(2) << '\n';
  if (!summary) throw Error(ErrorCode::kIo, "failed writing summary.json");
}

}  // namespace linucbd

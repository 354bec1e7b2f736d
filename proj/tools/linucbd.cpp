#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "linucbd/diagnostics.hpp"
#include "linucbd/diversity.hpp"
#include "linucbd/error.hpp"
#include "linucbd/experiment.hpp"
#include "linucbd/linalg.hpp"
#include "linucbd/oracle.hpp"
#include "linucbd/presets.hpp"
#include "linucbd/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void print_error(std::string_view code, std::string_view message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw linucbd::Error(linucbd::ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw linucbd::Error(linucbd::ErrorCode::kParse, path + ": " + e.what());
  }
}

linucbd::ExperimentConfig load_config(const std::string& preset, const std::string& config) {
  if (preset.empty() == config.empty()) {
    throw linucbd::Error(linucbd::ErrorCode::kInvalidConfig, "give exactly one of --preset or --config");
  }
  if (!preset.empty()) return linucbd::ExperimentConfig::from_preset(preset);
  return linucbd::ExperimentConfig::from_json(read_json_file(config));
}

std::optional<linucbd::MetaContextPartition> partition_for(const linucbd::Instance& instance) {
  if (linucbd::is_finite(instance)) return std::nullopt;
  return linucbd::default_meta_contexts(instance, linucbd::kDefaultPartitionSeed);
}

json diversity_report(const linucbd::Instance& instance) {
  if (const auto* f = std::get_if<linucbd::FiniteInstance>(&instance)) {
    const auto report = linucbd::lambda0_finite(*f);
    const double p = 1.0 / static_cast<double>(f->contexts());
    return linucbd::diversity_to_json(report, p, linucbd::meta_context_radius(report.lambda0, f->dim()));
  }
  const auto partition = *partition_for(instance);
  linucbd::DiversityReport report;
  report.lambda0 = partition.lambda0;
  report.delta = linucbd::diversity_delta(linucbd::feature_bound(instance), linucbd::dimension(instance),
                                          partition.lambda0);
  report.approximate = true;
  for (const auto& phi : partition.anchors) {
    report.per_arm.push_back({phi, linucbd::lambda_min(phi.transpose() * phi), {}});
  }
  json doc = linucbd::diversity_to_json(report, partition.p, partition.radius);
  doc["p_lower"] = partition.p_lower_min;
  doc["p_verified"] = partition.verified;
  doc["samples"] = partition.samples;
  return doc;
}

json constants_report(const linucbd::Instance& instance) {
  const auto partition = partition_for(instance);
  const auto inputs = linucbd::theory_inputs_for(instance, partition ? &*partition : nullptr);
  json doc = linucbd::constants_to_json(linucbd::theory_constants(inputs));
  doc["inputs"] = {{"d", inputs.d}, {"K", inputs.K}, {"Delta", inputs.gap}, {"l", inputs.l},
                   {"s", inputs.s}};
  doc["inputs"]["n"] = inputs.n ? json(*inputs.n) : json(nullptr);
  doc["inputs"]["p"] = inputs.p ? json(*inputs.p) : json(nullptr);
  return doc;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw linucbd::Error(linucbd::ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear contextual bandit simulator"};
  app.require_subcommand(1);

  std::string preset, config, out_dir, trace_path;
  std::optional<std::size_t> horizon, runs, jobs, trials;
  std::optional<std::uint64_t> seed;
  bool diagnostics = false, audit = false;

  auto* run = app.add_subcommand("run", "Simulate replicates and write regret.csv / summary.json");
  run->add_option("--preset", preset, "Preset name");
  run->add_option("--config", config, "Experiment config JSON");
  run->add_option("--T", horizon, "Horizon");
  run->add_option("--runs", runs, "Replicates");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--diagnostics", diagnostics, "Write per-run traces");
  run->add_flag("--audit", audit, "Keep explicit per-context ledgers and cross-check them");

  auto* diversity = app.add_subcommand("diversity", "Diversity metric lambda0, delta, p and r");
  diversity->add_option("--preset", preset, "Preset name");
  diversity->add_option("--config", config, "Experiment config JSON");

  auto* constants = app.add_subcommand("constants", "Theoretical constants t1..t4");
  constants->add_option("--preset", preset, "Preset name");
  constants->add_option("--config", config, "Experiment config JSON");

  auto* analyze = app.add_subcommand("analyze", "Classify a trace into error events");
  analyze->add_option("--trace", trace_path, "Trace file")->required();
  analyze->add_option("--out", out_dir, "Output directory (default: next to the trace)");

  auto* oracle = app.add_subcommand("oracle-check", "Closed-form vs KKT and aggregated vs explicit estimates");
  oracle->add_option("--trials", trials, "Random audit states");
  oracle->add_option("--seed", seed, "Seed");

  auto* dump = app.add_subcommand("preset", "Print a preset as an experiment config");
  dump->add_option("name", preset, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*run) {
      auto cfg = load_config(preset, config);
      if (horizon) cfg.horizon = *horizon;
      if (runs) cfg.runs = *runs;
      if (seed) cfg.master_seed = *seed;
      if (diagnostics) cfg.diagnostics = true;
      if (audit) cfg.audit = true;
      const fs::path out(out_dir);
      fs::create_directories(out);
      std::optional<linucbd::MetaContextPartition> partition;
      linucbd::TraceSink sink;
      if (cfg.diagnostics) {
        cfg.validate();
        partition = partition_for(cfg.instance);
        fs::create_directories(out / "traces");
        sink = [&](std::size_t r, std::size_t p, linucbd::Trace&& trace) {
          const auto name = "run" + std::to_string(r) + "_" + cfg.policies[p] + ".jsonl";
          linucbd::write_trace(out / "traces" / name, cfg.instance, trace, partition ? &*partition : nullptr);
        };
      }
      const auto result = linucbd::run_experiment(cfg, jobs.value_or(1), sink);
      linucbd::emit_results(result, cfg, out);
      return 0;
    }
    if (*diversity) {
      std::cout << diversity_report(load_config(preset, config).instance).dump(2) << '\n';
      return 0;
    }
    if (*constants) {
      std::cout << constants_report(load_config(preset, config).instance).dump(2) << '\n';
      return 0;
    }
    if (*analyze) {
      const auto file = linucbd::read_trace(fs::path(trace_path));
      const auto ctx = linucbd::make_diagnostic_context(file.instance, file.partition);
      const auto ledger = linucbd::classify_trace(file.trace, ctx);
      std::optional<linucbd::LemmaNuReport> nu;
      if (ctx.finite) nu = linucbd::lemma_nu_check(ledger, file.trace, ctx);
      const auto ell = linucbd::elliptical_potential_check(file.trace, linucbd::dimension(file.instance),
                                                           linucbd::feature_bound(file.instance));
      const fs::path out = out_dir.empty() ? fs::path(trace_path).parent_path() : fs::path(out_dir);
      if (!out.empty()) fs::create_directories(out);
      write_json(out / "events.json", linucbd::events_to_json(ledger, nu, ell));
      const auto inputs = linucbd::theory_inputs_for(file.instance, file.partition ? &*file.partition : nullptr);
      write_json(out / "constants.json", linucbd::constants_to_json(linucbd::theory_constants(inputs)));
      return 0;
    }
    if (*oracle) {
      const auto report = linucbd::run_oracle_check(trials.value_or(200), seed.value_or(1));
      std::cout << report.to_json().dump(2) << '\n';
      if (!report.passed) {
        print_error("oracle_mismatch", "closed form and oracle disagree beyond tolerance");
        return kExitFailure;
      }
      return 0;
    }
    if (*dump) {
      std::cout << linucbd::ExperimentConfig::from_preset(preset).to_json().dump(2) << '\n';
      return 0;
    }
  } catch (const linucbd::Error& e) {
    print_error(linucbd::to_string(e.code()), e.what());
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    print_error("io", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linucbd/model.hpp"
#include "linucbd/policy.hpp"

namespace linucbd {

/// Stream tags for mix_seed.
inline constexpr std::uint64_t kEnvironmentStream = 0;
inline constexpr std::uint64_t kPolicyStreamBase = 1;

/// splitmix64 finalizer over a combination of the three inputs:
///   z = master + 0x9E3779B97F4A7C15 * (run + 1) + 0xBF58476D1CE4E5B9 * (stream + 1)
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t run, std::uint64_t stream);

/// Full per-round record of one run. Per-arm arrays are round-major:
/// entry (t, a) sits at (t - 1) * arms + a.
struct Trace {
  std::string policy;
  std::size_t arms = 0;
  std::size_t dim = 0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;

  std::vector<std::int64_t> context;   // -1 on general instances
  std::vector<std::uint32_t> chosen;
  std::vector<std::uint32_t> optimal;
  std::vector<double> regret;          // pseudo-regret increment
  std::vector<double> alpha;
  std::vector<double> r_hat;
  std::vector<double> sigma_hat;
  std::vector<double> reward;          // true r(a, c_t)
  std::vector<double> optimal_feature; // x(a*_t, c_t), general instances only, round-major by d

  bool has_estimates() const { return r_hat.size() == rounds * arms && sigma_hat.size() == rounds * arms; }
  std::size_t at(std::size_t t, std::size_t a) const { return (t - 1) * arms + a; }
  void reserve(std::size_t T, bool general);
};

struct RunOptions {
  std::size_t horizon = 1;
  std::vector<std::size_t> checkpoints;  // sorted, within [1, horizon]
  bool record_trace = false;
};

struct RunResult {
  std::vector<double> checkpoint_regret;  // cumulative pseudo-regret at each checkpoint
  double pseudo_regret = 0.0;
  double realized_regret = 0.0;           // sum r(a*_t) - y_t
  std::size_t suboptimal_pulls = 0;
  std::optional<Trace> trace;
};

/// Runs `policy` for options.horizon rounds on the stream seeded by `env_seed`.
RunResult simulate_run(const Instance& instance, Policy& policy, std::uint64_t env_seed,
                       const RunOptions& options);

}  // namespace linucbd

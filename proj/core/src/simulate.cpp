#include "linucbd/simulate.hpp"

#include <algorithm>

#include "linucbd/error.hpp"

namespace linucbd {

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t run, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (run + 1) + 0xBF58476D1CE4E5B9ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void Trace::reserve(std::size_t T, bool general) {
  context.reserve(T);
  chosen.reserve(T);
  optimal.reserve(T);
  regret.reserve(T);
  alpha.reserve(T);
  r_hat.reserve(T * arms);
  sigma_hat.reserve(T * arms);
  reward.reserve(T * arms);
  if (general) optimal_feature.reserve(T * dim);
}

RunResult simulate_run(const Instance& instance, Policy& policy, std::uint64_t env_seed,
                       const RunOptions& options) {
  if (options.horizon == 0) throw Error(ErrorCode::kInvalidConfig, "horizon must be at least 1");
  if (!std::is_sorted(options.checkpoints.begin(), options.checkpoints.end()) ||
      (!options.checkpoints.empty() &&
       (options.checkpoints.front() < 1 || options.checkpoints.back() > options.horizon))) {
    throw Error(ErrorCode::kInvalidConfig, "checkpoints must be sorted and within [1, T]");
  }
  const std::size_t K = arm_count(instance);
  const std::size_t d = dimension(instance);
  const auto* finite = std::get_if<FiniteInstance>(&instance);
  const auto* general = std::get_if<GeneralInstance>(&instance);

  std::vector<std::size_t> best_for_context;
  if (finite) {
    for (std::size_t c = 0; c < finite->contexts(); ++c) best_for_context.push_back(optimal_arm(*finite, c));
  }

  RunResult result;
  result.checkpoint_regret.reserve(options.checkpoints.size());
  if (options.record_trace) {
    Trace& tr = result.trace.emplace();
    tr.policy = std::string(policy.name());
    tr.arms = K;
    tr.dim = d;
    tr.rounds = options.horizon;
    tr.seed = env_seed;
    tr.reserve(options.horizon, general != nullptr);
  }

  RoundSampler sampler(instance, env_seed);
  Round round;
  std::vector<double> rewards(K);
  std::size_t next_checkpoint = 0;
  for (std::size_t t = 1; t <= options.horizon; ++t) {
    sampler.next(round);
    std::size_t best = 0;
    if (finite) {
      const auto r = finite->rewards(*round.context);
      std::copy(r.begin(), r.end(), rewards.begin());
      best = best_for_context[*round.context];
    } else {
      for (std::size_t a = 0; a < K; ++a) {
        rewards[a] = general->theta(a).dot(round.features.col(static_cast<Eigen::Index>(a)));
      }
      best = static_cast<std::size_t>(std::max_element(rewards.begin(), rewards.end()) - rewards.begin());
    }

    const std::size_t arm = policy.choose(t, round);
    if (arm >= K) throw Error(ErrorCode::kNumericalFailure, "policy chose an arm out of range");
    const double y = rewards[arm] + round.noise;
    policy.observe(t, round, arm, y);

    const double increment = rewards[best] - rewards[arm];
    result.pseudo_regret += increment;
    result.realized_regret += rewards[best] - y;
    if (arm != best) ++result.suboptimal_pulls;
    while (next_checkpoint < options.checkpoints.size() && options.checkpoints[next_checkpoint] == t) {
      result.checkpoint_regret.push_back(result.pseudo_regret);
      ++next_checkpoint;
    }

    if (result.trace) {
      Trace& tr = *result.trace;
      tr.context.push_back(round.context ? static_cast<std::int64_t>(*round.context) : -1);
      tr.chosen.push_back(static_cast<std::uint32_t>(arm));
      tr.optimal.push_back(static_cast<std::uint32_t>(best));
      tr.regret.push_back(increment);
      tr.alpha.push_back(policy.last_alpha());
      const auto est = policy.estimates();
      for (std::size_t a = 0; a < K; ++a) {
        tr.reward.push_back(rewards[a]);
        if (!est.empty()) {
          tr.r_hat.push_back(est[a].r_hat);
          tr.sigma_hat.push_back(est[a].sigma_hat);
        }
      }
      if (general) {
        const auto col = round.features.col(static_cast<Eigen::Index>(best));
        tr.optimal_feature.insert(tr.optimal_feature.end(), col.data(), col.data() + d);
      }
    }
  }
  return result;
}

}  // namespace linucbd

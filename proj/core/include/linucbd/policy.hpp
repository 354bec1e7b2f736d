#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linucbd/baselines.hpp"
#include "linucbd/linucb_d.hpp"
#include "linucbd/model.hpp"

namespace linucbd {

/// A bandit policy as driven by the simulator. Rounds are numbered from 1.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t choose(std::size_t t, const Round& round) = 0;
  virtual void observe(std::size_t t, const Round& round, std::size_t arm, double y) = 0;

  /// Per-arm estimates from the last choose(); empty for policies without them.
  virtual std::span<const Estimate> estimates() const { return {}; }
  virtual double last_alpha() const { return 0.0; }
};

/// "linucb-d", "linucb", "greedy", "ucb-per-context".
std::vector<std::string> policy_names();

/// Throws kUnknownPolicy, or kInvalidConfig for "ucb-per-context" on a
/// general instance (contexts never recur there).
std::unique_ptr<Policy> make_policy(std::string_view name, const Instance& instance,
                                    bool audit = false);

/// Config shared by the linear policies for an instance.
PolicyConfig policy_config_for(const Instance& instance, AlphaMode mode = AlphaMode::kSchedule);

/// Access to the LinUCB-d object behind a "linucb-d" or "greedy" policy.
const LinUcbD* as_linucb_d(const Policy& policy);

}  // namespace linucbd

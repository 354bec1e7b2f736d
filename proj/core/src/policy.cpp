#include "linucbd/policy.hpp"

#include "linucbd/error.hpp"

namespace linucbd {

namespace {

// Audit ledgers key contexts by id for finite instances; on general
// instances every round is a fresh context.
std::uint64_t context_key(std::size_t t, const Round& round) {
  return round.context ? static_cast<std::uint64_t>(*round.context) : (std::uint64_t{1} << 63) + t;
}

class LinUcbDPolicy final : public Policy {
 public:
  LinUcbDPolicy(std::string name, std::size_t arms, PolicyConfig config, bool audit)
      : name_(std::move(name)), impl_(arms, config, audit), audit_(audit) {}

  std::string_view name() const override { return name_; }
  std::size_t choose(std::size_t t, const Round& round) override {
    return impl_.select(t, round.features);
  }
  void observe(std::size_t t, const Round& round, std::size_t arm, double y) override {
    std::optional<std::uint64_t> key;
    if (audit_) key = context_key(t, round);
    impl_.update(arm, round.features.col(static_cast<Eigen::Index>(arm)), y, key);
  }
  std::span<const Estimate> estimates() const override { return impl_.last_estimates(); }
  double last_alpha() const override { return impl_.last_alpha(); }

  const LinUcbD& impl() const { return impl_; }

 private:
  std::string name_;
  LinUcbD impl_;
  bool audit_;
};

class RidgePolicy final : public Policy {
 public:
  RidgePolicy(std::size_t arms, PolicyConfig config) : impl_(arms, config) {}

  std::string_view name() const override { return "linucb"; }
  std::size_t choose(std::size_t t, const Round& round) override {
    return impl_.step(t, round.features);
  }
  void observe(std::size_t, const Round& round, std::size_t arm, double y) override {
    impl_.update(arm, round.features.col(static_cast<Eigen::Index>(arm)), y);
  }
  std::span<const Estimate> estimates() const override { return impl_.last_estimates(); }
  double last_alpha() const override { return impl_.last_alpha(); }

 private:
  RidgeLinUcb impl_;
};

class TabularPolicy final : public Policy {
 public:
  explicit TabularPolicy(std::size_t arms) : impl_(arms) {}

  std::string_view name() const override { return "ucb-per-context"; }
  std::size_t choose(std::size_t t, const Round& round) override {
    return impl_.select(*round.context, t);
  }
  void observe(std::size_t, const Round& round, std::size_t arm, double y) override {
    impl_.update(arm, *round.context, y);
  }

 private:
  TabularUcb impl_;
};

}  // namespace

std::vector<std::string> policy_names() { return {"linucb-d", "linucb", "greedy", "ucb-per-context"}; }

PolicyConfig policy_config_for(const Instance& instance, AlphaMode mode) {
  PolicyConfig config;
  config.l = feature_bound(instance);
  config.s = parameter_bound(instance);
  config.d = dimension(instance);
  config.alpha_mode = mode;
  return config;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const Instance& instance, bool audit) {
  const std::size_t K = arm_count(instance);
  if (name == "linucb-d") {
    return std::make_unique<LinUcbDPolicy>("linucb-d", K, policy_config_for(instance), audit);
  }
  if (name == "greedy") {
    return std::make_unique<LinUcbDPolicy>("greedy", K, policy_config_for(instance, AlphaMode::kZero),
                                           audit);
  }
  if (name == "linucb") return std::make_unique<RidgePolicy>(K, policy_config_for(instance));
  if (name == "ucb-per-context") {
    if (!is_finite(instance)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "ucb-per-context needs recurring contexts and cannot run on a general instance");
    }
    return std::make_unique<TabularPolicy>(K);
  }
  throw Error(ErrorCode::kUnknownPolicy, "unknown policy '" + std::string(name) + "'");
}

const LinUcbD* as_linucb_d(const Policy& policy) {
  if (const auto* p = dynamic_cast<const LinUcbDPolicy*>(&policy)) return &p->impl();
  return nullptr;
}

}  // namespace linucbd

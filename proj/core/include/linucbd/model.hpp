#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace linucbd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class NoiseKind { kStandardNormal, kNone };

/// Reward noise. Standard normal is 1-subgaussian; kNone exists for
/// deterministic test environments.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kStandardNormal;
};

/// theta' x. Throws kDimensionMismatch when the sizes differ.
double expected_reward(const Vector& theta, const Vector& x);

/// Index of the largest entry. Throws kGapViolation unless it beats every
/// other entry by at least `min_margin` (and strictly, when min_margin <= 0).
std::size_t argmax_with_margin(std::span<const double> rewards, double min_margin);

/// K arms, n contexts drawn uniformly, fixed feature table x(a, c).
class FiniteInstance {
 public:
  FiniteInstance(std::vector<Vector> theta, std::vector<std::vector<Vector>> features,
                 double l, double s, NoiseSpec noise = {},
                 std::optional<double> delta = std::nullopt);

  std::size_t arms() const { return theta_.size(); }
  std::size_t dim() const { return d_; }
  std::size_t contexts() const { return n_; }
  double l() const { return l_; }
  double s() const { return s_; }
  NoiseSpec noise() const { return noise_; }
  /// Gap the instance was declared with, if any.
  std::optional<double> declared_delta() const { return delta_; }

  const Vector& theta(std::size_t arm) const { return theta_[arm]; }
  const Vector& feature(std::size_t arm, std::size_t context) const {
    return features_[arm][context];
  }
  /// d x K matrix whose column a is x(a, context).
  const Matrix& context_features(std::size_t context) const { return by_context_[context]; }
  double reward(std::size_t arm, std::size_t context) const {
    return rewards_[context][arm];
  }
  std::span<const double> rewards(std::size_t context) const { return rewards_[context]; }

 private:
  std::vector<Vector> theta_;
  std::vector<std::vector<Vector>> features_;
  std::vector<Matrix> by_context_;
  std::vector<std::vector<double>> rewards_;
  std::size_t d_ = 0;
  std::size_t n_ = 0;
  double l_ = 1.0;
  double s_ = 1.0;
  NoiseSpec noise_;
  std::optional<double> delta_;
};

/// Continuous contexts: each round draws x(a, c_t) uniformly from [0,1]^d per
/// arm, resampling the whole round until the best arm leads by delta.
class GeneralInstance {
 public:
  GeneralInstance(std::vector<Vector> theta, double l, double s, double delta,
                  NoiseSpec noise = {}, std::uint64_t seed = 0,
                  std::size_t max_attempts = 1'000'000);

  /// theta(a) uniform on the sphere of radius `radius` in R^d.
  static GeneralInstance random_on_sphere(std::size_t arms, std::size_t d, double radius,
                                          double l, double delta, std::uint64_t seed,
                                          NoiseSpec noise = {});

  std::size_t arms() const { return theta_.size(); }
  std::size_t dim() const { return d_; }
  double l() const { return l_; }
  double s() const { return s_; }
  double delta() const { return delta_; }
  NoiseSpec noise() const { return noise_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t max_attempts() const { return max_attempts_; }
  const Vector& theta(std::size_t arm) const { return theta_[arm]; }

 private:
  std::vector<Vector> theta_;
  std::size_t d_ = 0;
  double l_ = 1.0;
  double s_ = 1.0;
  double delta_ = 0.0;
  NoiseSpec noise_;
  std::uint64_t seed_ = 0;
  std::size_t max_attempts_ = 1'000'000;
};

using Instance = std::variant<FiniteInstance, GeneralInstance>;

std::size_t arm_count(const Instance& instance);
std::size_t dimension(const Instance& instance);
double feature_bound(const Instance& instance);
double parameter_bound(const Instance& instance);
NoiseSpec noise_of(const Instance& instance);
bool is_finite(const Instance& instance);

/// Optimal arm under `context`; throws kGapViolation on a tie (or a margin
/// below the declared delta).
std::size_t optimal_arm(const FiniteInstance& instance, std::size_t context);

/// Minimum over contexts of best minus second-best reward. +inf when K = 1.
/// Throws kInvalidInstance when that minimum is not positive.
double reward_gap(const FiniteInstance& instance);

/// The gap used by the analysis: reward_gap for finite instances, the
/// configured delta for general ones.
double analysis_gap(const Instance& instance);

struct ValidationReport {
  bool valid = true;
  double max_theta_norm = 0.0;
  double max_feature_norm = 0.0;
  double gap = 0.0;
  std::vector<std::string> violations;
};

/// Checks the norm bounds and the positive-gap condition; never throws.
ValidationReport validate_instance(const Instance& instance);

/// One environment round. `features` is d x K with column a = x(a, c_t).
struct Round {
  std::optional<std::size_t> context;
  Matrix features;
  double noise = 0.0;
};

/// Seeded stream of rounds for one replicate. Owns its engine; not shareable.
class RoundSampler {
 public:
  RoundSampler(const Instance& instance, std::uint64_t seed);

  void next(Round& out);
  Round next();

 private:
  double draw_noise();

  const Instance* instance_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace linucbd

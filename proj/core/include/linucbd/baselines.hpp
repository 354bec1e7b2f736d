#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "linucbd/linucb_d.hpp"

namespace linucbd {

/// sqrt(2 ln f(t)).
double tabular_alpha(std::size_t t);

/// Independent UCB per context: each context is its own K-armed bandit.
class TabularUcb {
 public:
  struct Cell {
    std::size_t count = 0;
    double sum = 0.0;
  };

  explicit TabularUcb(std::size_t arms);

  /// +inf for an unpulled (arm, context) pair, else S/N + alpha_t / sqrt(N).
  double index(std::size_t arm, std::uint64_t context, std::size_t t) const;
  /// Highest index, lowest arm on ties. Unseen contexts pick arm 0.
  std::size_t select(std::uint64_t context, std::size_t t) const;
  void update(std::size_t arm, std::uint64_t context, double y);

  Cell cell(std::size_t arm, std::uint64_t context) const;
  std::size_t arms() const { return arms_; }

 private:
  std::size_t arms_;
  std::unordered_map<std::uint64_t, std::vector<Cell>> cells_;
};

/// Classical ridge-regression LinUCB: theta_hat = V^{-1} b with penalty l^2,
/// score theta_hat' x + alpha_t sqrt(x' V^{-1} x). V is refactored after every
/// update; no rank-one inverse is kept.
class RidgeLinUcb {
 public:
  RidgeLinUcb(std::size_t arms, PolicyConfig config);

  Estimate estimate(std::size_t arm, Eigen::Ref<const Vector> x, double alpha_t) const;
  std::size_t step(std::size_t t, const Matrix& features);
  void update(std::size_t arm, Eigen::Ref<const Vector> x, double y);

  const Matrix& V(std::size_t arm) const { return arms_[arm].V; }
  const Vector& b(std::size_t arm) const { return arms_[arm].b; }
  const Vector& theta_hat(std::size_t arm) const { return arms_[arm].theta_hat; }
  std::span<const Estimate> last_estimates() const { return estimates_; }
  double last_alpha() const { return last_alpha_; }
  std::size_t arms() const { return arms_.size(); }

 private:
  struct Arm {
    Matrix V;
    Vector b;
    Vector theta_hat;
    Eigen::LLT<Matrix> factor;
  };

  PolicyConfig config_;
  std::vector<Arm> arms_;
  std::vector<Estimate> estimates_;
  double last_alpha_ = 0.0;
};

}  // namespace linucbd

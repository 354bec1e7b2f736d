#include "linucbd/baselines.hpp"

#include <cmath>
#include <limits>

#include "linucbd/error.hpp"

namespace linucbd {

double tabular_alpha(std::size_t t) {
  if (t == 0) throw Error(ErrorCode::kInvalidConfig, "rounds start at t = 1");
  return std::sqrt(2.0 * std::log(exploration_f(t)));
}

TabularUcb::TabularUcb(std::size_t arms) : arms_(arms) {
  if (arms == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one arm");
}

double TabularUcb::index(std::size_t arm, std::uint64_t context, std::size_t t) const {
  const Cell c = cell(arm, context);
  if (c.count == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(c.count);
  return c.sum / n + tabular_alpha(t) / std::sqrt(n);
}

std::size_t TabularUcb::select(std::uint64_t context, std::size_t t) const {
  std::size_t best = 0;
  double best_index = index(0, context, t);
  for (std::size_t a = 1; a < arms_; ++a) {
    const double i = index(a, context, t);
    if (i > best_index) {
      best = a;
      best_index = i;
    }
  }
  return best;
}

void TabularUcb::update(std::size_t arm, std::uint64_t context, double y) {
  if (arm >= arms_) throw Error(ErrorCode::kInvalidConfig, "arm out of range");
  auto [it, inserted] = cells_.try_emplace(context, arms_);
  Cell& c = it->second[arm];
  ++c.count;
  c.sum += y;
}

TabularUcb::Cell TabularUcb::cell(std::size_t arm, std::uint64_t context) const {
  if (arm >= arms_) throw Error(ErrorCode::kInvalidConfig, "arm out of range");
  auto it = cells_.find(context);
  if (it == cells_.end()) return {};
  return it->second[arm];
}

RidgeLinUcb::RidgeLinUcb(std::size_t arms, PolicyConfig config) : config_(config) {
  if (arms == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one arm");
  const auto d = static_cast<Eigen::Index>(config.d);
  arms_.resize(arms);
  for (auto& arm : arms_) {
    arm.V = config.l * config.l * Matrix::Identity(d, d);
    arm.b = Vector::Zero(d);
    arm.theta_hat = Vector::Zero(d);
    arm.factor.compute(arm.V);
  }
  estimates_.resize(arms);
}

Estimate RidgeLinUcb::estimate(std::size_t arm, Eigen::Ref<const Vector> x, double alpha_t) const {
  const Arm& a = arms_.at(arm);
  Estimate e;
  e.r_hat = a.theta_hat.dot(x);
  e.sigma_hat = std::sqrt(std::max(0.0, x.dot(a.factor.solve(x))));
  e.ucb = e.r_hat + alpha_t * e.sigma_hat;
  return e;
}

std::size_t RidgeLinUcb::step(std::size_t t, const Matrix& features) {
  if (features.cols() != static_cast<Eigen::Index>(arms_.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "need one feature column per arm");
  }
  last_alpha_ = alpha(t, config_);
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    estimates_[a] = estimate(a, features.col(static_cast<Eigen::Index>(a)), last_alpha_);
  }
  return select_arm(estimates_);
}

void RidgeLinUcb::update(std::size_t arm, Eigen::Ref<const Vector> x, double y) {
  Arm& a = arms_.at(arm);
  a.V.noalias() += x * x.transpose();
  a.b += y * x;
  a.factor.compute(a.V);
  a.theta_hat = a.factor.solve(a.b);
}

}  // namespace linucbd

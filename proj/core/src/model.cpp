#include "linucbd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "linucbd/error.hpp"

namespace linucbd {

namespace {

constexpr double kNormSlack = 1e-12;

std::string describe_margin(std::size_t best, std::size_t runner_up, double margin) {
  std::ostringstream os;
  os << "arms " << best + 1 << " and " << runner_up + 1 << " differ by " << margin;
  return os.str();
}

}  // namespace

double expected_reward(const Vector& theta, const Vector& x) {
  if (theta.size() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "theta has dimension " +
                                                   std::to_string(theta.size()) +
                                                   ", feature has " + std::to_string(x.size()));
  }
  return theta.dot(x);
}

std::size_t argmax_with_margin(std::span<const double> rewards, double min_margin) {
  if (rewards.empty()) throw Error(ErrorCode::kInvalidInstance, "no arms");
  std::size_t best = 0;
  for (std::size_t a = 1; a < rewards.size(); ++a) {
    if (rewards[a] > rewards[best]) best = a;
  }
  for (std::size_t a = 0; a < rewards.size(); ++a) {
    if (a == best) continue;
    const double margin = rewards[best] - rewards[a];
    if (margin <= 0.0 || margin < min_margin) {
      throw Error(ErrorCode::kGapViolation, describe_margin(best, a, margin));
    }
  }
  return best;
}

FiniteInstance::FiniteInstance(std::vector<Vector> theta,
                               std::vector<std::vector<Vector>> features, double l, double s,
                               NoiseSpec noise, std::optional<double> delta)
    : theta_(std::move(theta)),
      features_(std::move(features)),
      l_(l),
      s_(s),
      noise_(noise),
      delta_(delta) {
  if (theta_.empty()) throw Error(ErrorCode::kInvalidInstance, "instance needs at least one arm");
  if (features_.size() != theta_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature table must have one row per arm");
  }
  d_ = static_cast<std::size_t>(theta_.front().size());
  n_ = features_.front().size();
  if (d_ == 0 || n_ == 0) throw Error(ErrorCode::kInvalidInstance, "empty dimension or context set");
  if (!(l_ > 0.0) || !(s_ > 0.0)) throw Error(ErrorCode::kInvalidInstance, "l and s must be positive");
  for (std::size_t a = 0; a < theta_.size(); ++a) {
    if (static_cast<std::size_t>(theta_[a].size()) != d_) {
      throw Error(ErrorCode::kDimensionMismatch, "theta(" + std::to_string(a + 1) + ") has wrong dimension");
    }
    if (features_[a].size() != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "arm " + std::to_string(a + 1) + " has wrong context count");
    }
    for (const auto& x : features_[a]) {
      if (static_cast<std::size_t>(x.size()) != d_) {
        throw Error(ErrorCode::kDimensionMismatch, "feature vector has wrong dimension");
      }
    }
  }
  by_context_.reserve(n_);
  rewards_.reserve(n_);
  for (std::size_t c = 0; c < n_; ++c) {
    Matrix m(d_, theta_.size());
    std::vector<double> r(theta_.size());
    for (std::size_t a = 0; a < theta_.size(); ++a) {
      m.col(static_cast<Eigen::Index>(a)) = features_[a][c];
      r[a] = theta_[a].dot(features_[a][c]);
    }
    by_context_.push_back(std::move(m));
    rewards_.push_back(std::move(r));
  }
}

GeneralInstance::GeneralInstance(std::vector<Vector> theta, double l, double s, double delta,
                                 NoiseSpec noise, std::uint64_t seed, std::size_t max_attempts)
    : theta_(std::move(theta)),
      l_(l),
      s_(s),
      delta_(delta),
      noise_(noise),
      seed_(seed),
      max_attempts_(max_attempts) {
  if (theta_.empty()) throw Error(ErrorCode::kInvalidInstance, "instance needs at least one arm");
  d_ = static_cast<std::size_t>(theta_.front().size());
  if (d_ == 0) throw Error(ErrorCode::kInvalidInstance, "empty dimension");
  for (const auto& t : theta_) {
    if (static_cast<std::size_t>(t.size()) != d_) {
      throw Error(ErrorCode::kDimensionMismatch, "theta vectors must share one dimension");
    }
  }
  if (!(l_ > 0.0) || !(s_ > 0.0)) throw Error(ErrorCode::kInvalidInstance, "l and s must be positive");
  if (!(delta_ > 0.0)) throw Error(ErrorCode::kInvalidInstance, "delta must be positive");
  if (max_attempts_ == 0) throw Error(ErrorCode::kInvalidInstance, "attempt cap must be positive");
}

GeneralInstance GeneralInstance::random_on_sphere(std::size_t arms, std::size_t d, double radius,
                                                  double l, double delta, std::uint64_t seed,
                                                  NoiseSpec noise) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> theta;
  theta.reserve(arms);
  for (std::size_t a = 0; a < arms; ++a) {
    Vector v(d);
    do {
      for (std::size_t j = 0; j < d; ++j) v(static_cast<Eigen::Index>(j)) = normal(engine);
    } while (v.norm() == 0.0);
    theta.push_back(v * (radius / v.norm()));
  }
  return GeneralInstance(std::move(theta), l, radius, delta, noise, seed);
}

std::size_t arm_count(const Instance& instance) {
  return std::visit([](const auto& i) { return i.arms(); }, instance);
}
std::size_t dimension(const Instance& instance) {
  return std::visit([](const auto& i) { return i.dim(); }, instance);
}
double feature_bound(const Instance& instance) {
  return std::visit([](const auto& i) { return i.l(); }, instance);
}
double parameter_bound(const Instance& instance) {
  return std::visit([](const auto& i) { return i.s(); }, instance);
}
NoiseSpec noise_of(const Instance& instance) {
  return std::visit([](const auto& i) { return i.noise(); }, instance);
}
bool is_finite(const Instance& instance) {
  return std::holds_alternative<FiniteInstance>(instance);
}

std::size_t optimal_arm(const FiniteInstance& instance, std::size_t context) {
  if (context >= instance.contexts()) {
    throw Error(ErrorCode::kInvalidInstance, "context " + std::to_string(context + 1) + " out of range");
  }
  return argmax_with_margin(instance.rewards(context), instance.declared_delta().value_or(0.0));
}

double reward_gap(const FiniteInstance& instance) {
  if (instance.arms() == 1) return std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < instance.contexts(); ++c) {
    auto r = instance.rewards(c);
    std::vector<double> sorted(r.begin(), r.end());
    std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end(), std::greater<>());
    gap = std::min(gap, sorted[0] - sorted[1]);
  }
  if (!(gap > 0.0)) {
    throw Error(ErrorCode::kInvalidInstance, "non-positive reward gap " + std::to_string(gap));
  }
  return gap;
}

double analysis_gap(const Instance& instance) {
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) return reward_gap(*f);
  return std::get<GeneralInstance>(instance).delta();
}

ValidationReport validate_instance(const Instance& instance) {
  ValidationReport report;
  const double l = feature_bound(instance);
  const double s = parameter_bound(instance);
  for (std::size_t a = 0; a < arm_count(instance); ++a) {
    const double norm = std::visit([a](const auto& i) { return i.theta(a).norm(); }, instance);
    report.max_theta_norm = std::max(report.max_theta_norm, norm);
    if (norm > s + kNormSlack) {
      std::ostringstream os;
      os << "||theta(" << a + 1 << ")||_2 = " << norm << " exceeds s = " << s;
      report.violations.push_back(os.str());
    }
  }
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) {
    for (std::size_t a = 0; a < f->arms(); ++a) {
      for (std::size_t c = 0; c < f->contexts(); ++c) {
        const double norm = f->feature(a, c).norm();
        report.max_feature_norm = std::max(report.max_feature_norm, norm);
        if (norm > l + kNormSlack) {
          std::ostringstream os;
          os << "||x(" << a + 1 << "," << c + 1 << ")||_2 = " << norm << " exceeds l = " << l;
          report.violations.push_back(os.str());
        }
      }
    }
    try {
      report.gap = reward_gap(*f);
      if (auto declared = f->declared_delta(); declared && report.gap < *declared) {
        std::ostringstream os;
        os << "reward gap " << report.gap << " below declared delta " << *declared;
        report.violations.push_back(os.str());
      }
    } catch (const Error& e) {
      report.gap = 0.0;
      report.violations.push_back(std::string("gap violation: ") + e.what());
    }
  } else {
    const auto& g = std::get<GeneralInstance>(instance);
    // Features live in [0,1]^d, so sqrt(d) is the largest possible norm.
    report.max_feature_norm = std::sqrt(static_cast<double>(g.dim()));
    if (report.max_feature_norm > l + kNormSlack) {
      std::ostringstream os;
      os << "features in [0,1]^" << g.dim() << " reach norm " << report.max_feature_norm
         << " above l = " << l;
      report.violations.push_back(os.str());
    }
    report.gap = g.delta();
  }
  report.valid = report.violations.empty();
  return report;
}

RoundSampler::RoundSampler(const Instance& instance, std::uint64_t seed)
    : instance_(&instance), engine_(seed) {}

double RoundSampler::draw_noise() {
  if (noise_of(*instance_).kind == NoiseKind::kNone) return 0.0;
  return normal_(engine_);
}

void RoundSampler::next(Round& out) {
  if (const auto* f = std::get_if<FiniteInstance>(instance_)) {
    std::uniform_int_distribution<std::size_t> pick(0, f->contexts() - 1);
    const std::size_t c = pick(engine_);
    out.context = c;
    out.features = f->context_features(c);
    out.noise = draw_noise();
    return;
  }
  const auto& g = std::get<GeneralInstance>(*instance_);
  const auto K = static_cast<Eigen::Index>(g.arms());
  const auto d = static_cast<Eigen::Index>(g.dim());
  out.context.reset();
  out.features.resize(d, K);
  for (std::size_t attempt = 0; attempt < g.max_attempts(); ++attempt) {
    for (Eigen::Index a = 0; a < K; ++a) {
      for (Eigen::Index j = 0; j < d; ++j) out.features(j, a) = unit_(engine_);
    }
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < K; ++a) {
      const double r = g.theta(static_cast<std::size_t>(a)).dot(out.features.col(a));
      if (r > best) {
        second = best;
        best = r;
      } else if (r > second) {
        second = r;
      }
    }
    if (best - second >= g.delta()) {
      out.noise = draw_noise();
      return;
    }
  }
  throw Error(ErrorCode::kInstanceInfeasible,
              "no round met the reward gap within " + std::to_string(g.max_attempts()) + " attempts");
}

Round RoundSampler::next() {
  Round r;
  next(r);
  return r;
}

}  // namespace linucbd

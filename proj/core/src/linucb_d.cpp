#include "linucbd/linucb_d.hpp"

#include <cmath>

#include "linucbd/error.hpp"

namespace linucbd {

double exploration_f(std::size_t t) {
  const double tt = static_cast<double>(t);
  const double lt = std::log(tt);
  return 1.0 + tt * lt * lt;
}

double alpha(std::size_t t, const PolicyConfig& config) {
  if (t == 0) throw Error(ErrorCode::kInvalidConfig, "rounds start at t = 1");
  if (config.alpha_mode == AlphaMode::kZero) return 0.0;
  const double d = static_cast<double>(config.d);
  return config.l * config.s + std::sqrt((2.0 + d) * std::log(exploration_f(t)));
}

std::size_t select_arm(std::span<const Estimate> estimates) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < estimates.size(); ++a) {
    if (estimates[a].ucb > estimates[best].ucb) best = a;
  }
  return best;
}

void AuditLedger::record(std::uint64_t key, const Vector& x, double y) {
  if (auto it = index_.find(key); it != index_.end()) {
    const std::size_t i = it->second;
    if ((columns_[i] - x).cwiseAbs().maxCoeff() > 0.0) {
      throw Error(ErrorCode::kInvalidInstance,
                  "context key " + std::to_string(key) + " seen with two feature vectors");
    }
    counts_[i] += 1.0;
    sums_[i] += y;
    return;
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(key);
  columns_.push_back(x);
  counts_.push_back(1.0);
  sums_.push_back(y);
}

std::optional<std::size_t> AuditLedger::find(std::uint64_t key) const {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

Matrix AuditLedger::design(std::size_t d, double l) const {
  const auto m = static_cast<Eigen::Index>(columns_.size());
  const auto dd = static_cast<Eigen::Index>(d);
  Matrix X(dd, m + dd);
  for (Eigen::Index i = 0; i < m; ++i) X.col(i) = columns_[static_cast<std::size_t>(i)];
  X.rightCols(dd) = l * Matrix::Identity(dd, dd);
  return X;
}

Vector AuditLedger::counts(std::size_t d) const {
  const auto m = static_cast<Eigen::Index>(counts_.size());
  Vector n(m + static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m; ++i) n(i) = counts_[static_cast<std::size_t>(i)];
  n.tail(static_cast<Eigen::Index>(d)).setOnes();
  return n;
}

Vector AuditLedger::sums(std::size_t d) const {
  const auto m = static_cast<Eigen::Index>(sums_.size());
  Vector s = Vector::Zero(m + static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m; ++i) s(i) = sums_[static_cast<std::size_t>(i)];
  return s;
}

ArmState::ArmState(std::size_t d, double l, bool audit)
    : l_(l),
      V_(l * l * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))),
      Vinv_(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) / (l * l)),
      w_(Vector::Zero(static_cast<Eigen::Index>(d))) {
  if (d == 0) throw Error(ErrorCode::kInvalidConfig, "dimension must be positive");
  if (!(l > 0.0)) throw Error(ErrorCode::kInvalidConfig, "l must be positive");
  if (audit) ledger_.emplace();
}

Estimate ArmState::estimate(Eigen::Ref<const Vector> x, double alpha_t) const {
  if (x.size() != V_.rows()) throw Error(ErrorCode::kDimensionMismatch, "feature dimension mismatch");
  const Vector z = Vinv_ * x;
  Estimate e;
  e.r_hat = w_.dot(z);
  e.sigma_hat = std::sqrt(std::max(0.0, x.dot(z)));
  e.ucb = e.r_hat + alpha_t * e.sigma_hat;
  if (!std::isfinite(e.r_hat) || !std::isfinite(e.sigma_hat)) {
    throw Error(ErrorCode::kNumericalFailure, "non-finite estimate; inverse design matrix is corrupt");
  }
  return e;
}

void ArmState::update(Eigen::Ref<const Vector> x, double y,
                      std::optional<std::uint64_t> context_key) {
  if (x.size() != V_.rows()) throw Error(ErrorCode::kDimensionMismatch, "feature dimension mismatch");
  if (ledger_) {
    if (!context_key) throw Error(ErrorCode::kInvalidConfig, "audit mode needs a context key per pull");
    ledger_->record(*context_key, x, y);
  }
  V_.noalias() += x * x.transpose();
  w_ += y * x;
  ++pulls_;
  // Sherman-Morrison: (V + x x')^{-1} = Vinv - (Vinv x)(Vinv x)' / (1 + x' Vinv x).
  const Vector z = Vinv_ * x;
  Vinv_.noalias() -= (z * z.transpose()) / (1.0 + x.dot(z));
  if (++since_refresh_ >= kRefreshPeriod || inverse_drift() > kDriftTolerance) refresh_inverse();
}

double ArmState::inverse_drift() const {
  const auto d = V_.rows();
  return (V_ * Vinv_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

void ArmState::refresh_inverse() {
  const auto d = V_.rows();
  Vinv_ = V_.llt().solve(Matrix::Identity(d, d));
  Vinv_ = 0.5 * (Vinv_ + Vinv_.transpose()).eval();
  since_refresh_ = 0;
  ++refreshes_;
}

const AuditLedger& ArmState::ledger() const {
  if (!ledger_) throw Error(ErrorCode::kInvalidConfig, "arm state was built without an audit ledger");
  return *ledger_;
}

Matrix ArmState::ledger_gram() const {
  const auto& led = ledger();
  const Matrix X = led.design(dim(), l_);
  const Vector n = led.counts(dim());
  return X * n.asDiagonal() * X.transpose();
}

Vector ArmState::beta_closed_form(const Vector& x) const {
  const auto& led = ledger();
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature dimension mismatch");
  }
  const Matrix X = led.design(dim(), l_);
  const Vector n = led.counts(dim());
  const Matrix gram = X * n.asDiagonal() * X.transpose();
  const Vector lambda = gram.ldlt().solve(x);
  return n.asDiagonal() * (X.transpose() * lambda);
}

Estimate ArmState::estimate_explicit(const Vector& x, double alpha_t) const {
  const auto& led = ledger();
  const Vector beta = beta_closed_form(x);
  const Vector n = led.counts(dim());
  const Vector s = led.sums(dim());
  Vector n_pinv(n.size());
  for (Eigen::Index i = 0; i < n.size(); ++i) n_pinv(i) = n(i) > 0.0 ? 1.0 / n(i) : 0.0;
  Estimate e;
  e.r_hat = s.dot(n_pinv.cwiseProduct(beta));
  e.sigma_hat = std::sqrt(std::max(0.0, beta.dot(n_pinv.cwiseProduct(beta))));
  e.ucb = e.r_hat + alpha_t * e.sigma_hat;
  return e;
}

void ArmState::restore(Matrix V, Vector w, std::size_t pulls) {
  if (V.rows() != V_.rows() || V.cols() != V_.cols() || w.size() != w_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "snapshot dimension mismatch");
  }
  V_ = std::move(V);
  w_ = std::move(w);
  pulls_ = pulls;
  ledger_.reset();
  refresh_inverse();
}

LinUcbD::LinUcbD(std::size_t arms, PolicyConfig config, bool audit) : config_(config) {
  if (arms == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one arm");
  if (!(config.l > 0.0) || !(config.s > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "l and s must be positive");
  }
  arms_.reserve(arms);
  for (std::size_t a = 0; a < arms; ++a) arms_.emplace_back(config.d, config.l, audit);
  estimates_.resize(arms);
}

std::size_t LinUcbD::select(std::size_t t, const Matrix& features) {
  if (features.cols() != static_cast<Eigen::Index>(arms_.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "need one feature column per arm");
  }
  last_alpha_ = alpha(t, config_);
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    estimates_[a] = arms_[a].estimate(features.col(static_cast<Eigen::Index>(a)), last_alpha_);
  }
  return select_arm(estimates_);
}

void LinUcbD::update(std::size_t arm, Eigen::Ref<const Vector> x, double y,
                     std::optional<std::uint64_t> context_key) {
  arms_.at(arm).update(x, y, context_key);
}

nlohmann::json LinUcbD::snapshot() const {
  nlohmann::json doc;
  doc["l"] = config_.l;
  doc["s"] = config_.s;
  doc["d"] = config_.d;
  doc["alpha_mode"] = config_.alpha_mode == AlphaMode::kZero ? "zero" : "schedule";
  auto arms = nlohmann::json::array();
  for (const auto& arm : arms_) {
    auto V = nlohmann::json::array();
    for (Eigen::Index i = 0; i < arm.V().rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < arm.V().cols(); ++j) row.push_back(arm.V()(i, j));
      V.push_back(std::move(row));
    }
    std::vector<double> w(arm.w().data(), arm.w().data() + arm.w().size());
    arms.push_back({{"V", std::move(V)}, {"w", std::move(w)}, {"pulls", arm.pulls()}});
  }
  doc["arms"] = std::move(arms);
  return doc;
}

LinUcbD LinUcbD::restore(const nlohmann::json& snapshot) {
  try {
    PolicyConfig config;
    config.l = snapshot.at("l").get<double>();
    config.s = snapshot.at("s").get<double>();
    config.d = snapshot.at("d").get<std::size_t>();
    config.alpha_mode = snapshot.at("alpha_mode").get<std::string>() == "zero" ? AlphaMode::kZero
                                                                                 : AlphaMode::kSchedule;
    const auto& arms = snapshot.at("arms");
    LinUcbD policy(arms.size(), config);
    const auto d = static_cast<Eigen::Index>(config.d);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      Matrix V(d, d);
      Vector w(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        w(i) = arms[a].at("w").at(static_cast<std::size_t>(i)).get<double>();
        for (Eigen::Index j = 0; j < d; ++j) {
          V(i, j) = arms[a].at("V").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
        }
      }
      policy.arms_[a].restore(std::move(V), std::move(w), arms[a].at("pulls").get<std::size_t>());
    }
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("policy snapshot: ") + e.what());
  }
}

}  // namespace linucbd

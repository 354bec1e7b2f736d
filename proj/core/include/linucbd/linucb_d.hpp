#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "linucbd/model.hpp"

namespace linucbd {

enum class AlphaMode { kSchedule, kZero };

struct PolicyConfig {
  double l = 1.0;
  double s = 1.0;
  std::size_t d = 1;
  AlphaMode alpha_mode = AlphaMode::kSchedule;
};

/// f(t) = 1 + t ln^2 t.
double exploration_f(std::size_t t);

/// alpha_t = l s + sqrt((2 + d) ln f(t)), or 0 in greedy mode. Rounds start at 1.
double alpha(std::size_t t, const PolicyConfig& config);

struct Estimate {
  double r_hat = 0.0;
  double sigma_hat = 0.0;
  double ucb = 0.0;
};

/// Argmax of ucb; ties go to the lowest arm index.
std::size_t select_arm(std::span<const Estimate> estimates);

/// Explicit per-context history of one arm: the columns X_t(a), counts
/// N_t(a,c) and reward sums S_t(a,c) of every context the arm was pulled
/// under. The d dummy columns l e_j (count 1, sum 0) are implicit.
class AuditLedger {
 public:
  void record(std::uint64_t key, const Vector& x, double y);

  std::size_t observed() const { return columns_.size(); }
  std::uint64_t key(std::size_t i) const { return keys_[i]; }
  const Vector& column(std::size_t i) const { return columns_[i]; }
  double count(std::size_t i) const { return counts_[i]; }
  double sum(std::size_t i) const { return sums_[i]; }
  std::optional<std::size_t> find(std::uint64_t key) const;

  /// d x (m + d): observed columns followed by the dummy columns.
  Matrix design(std::size_t d, double l) const;
  /// Diagonal of N_t(a), length m + d.
  Vector counts(std::size_t d) const;
  /// s_t(a), length m + d.
  Vector sums(std::size_t d) const;

 private:
  std::vector<std::uint64_t> keys_;
  std::vector<Vector> columns_;
  std::vector<double> counts_;
  std::vector<double> sums_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// Sufficient statistics of one arm: V = l^2 I + sum x x', its inverse and
/// w = sum y x. The inverse follows rank-one updates and is recomputed every
/// 4096 updates or when ||V Vinv - I||_max exceeds 1e-6.
class ArmState {
 public:
  static constexpr std::size_t kRefreshPeriod = 4096;
  static constexpr double kDriftTolerance = 1e-6;

  ArmState(std::size_t d, double l, bool audit = false);

  Estimate estimate(Eigen::Ref<const Vector> x, double alpha_t) const;

  /// Adds one pull. In audit mode `context_key` identifies the context and is required.
  void update(Eigen::Ref<const Vector> x, double y,
              std::optional<std::uint64_t> context_key = std::nullopt);

  std::size_t dim() const { return static_cast<std::size_t>(V_.rows()); }
  double l() const { return l_; }
  const Matrix& V() const { return V_; }
  const Matrix& V_inverse() const { return Vinv_; }
  const Vector& w() const { return w_; }
  std::size_t pulls() const { return pulls_; }
  std::size_t refreshes() const { return refreshes_; }
  double inverse_drift() const;

  bool audited() const { return ledger_.has_value(); }
  const AuditLedger& ledger() const;

  /// beta = N X' (X N X')^{-1} x from the ledger; one coefficient per ledger column.
  Vector beta_closed_form(const Vector& x) const;
  /// r_hat = s' N^+ beta and sigma_hat = sqrt(beta' N^+ beta) from the ledger.
  Estimate estimate_explicit(const Vector& x, double alpha_t) const;
  /// X N X' accumulated from the ledger alone.
  Matrix ledger_gram() const;

  /// Replaces the statistics (checkpoint restore); the inverse is recomputed.
  void restore(Matrix V, Vector w, std::size_t pulls);

 private:
  void refresh_inverse();

  double l_;
  Matrix V_;
  Matrix Vinv_;
  Vector w_;
  std::size_t pulls_ = 0;
  std::size_t since_refresh_ = 0;
  std::size_t refreshes_ = 0;
  std::optional<AuditLedger> ledger_;
};

/// LinUCB-d over K arms. Greedy LinUCB is the same policy with AlphaMode::kZero.
class LinUcbD {
 public:
  LinUcbD(std::size_t arms, PolicyConfig config, bool audit = false);

  /// Scores every arm on `features` (d x K) at round t and returns the pick.
  std::size_t select(std::size_t t, const Matrix& features);
  void update(std::size_t arm, Eigen::Ref<const Vector> x, double y,
              std::optional<std::uint64_t> context_key = std::nullopt);

  std::span<const Estimate> last_estimates() const { return estimates_; }
  double last_alpha() const { return last_alpha_; }
  const PolicyConfig& config() const { return config_; }
  const ArmState& arm(std::size_t a) const { return arms_[a]; }
  std::size_t arms() const { return arms_.size(); }

  /// {"l","s","d","alpha_mode","arms":[{"V","w","pulls"}]}
  nlohmann::json snapshot() const;
  static LinUcbD restore(const nlohmann::json& snapshot);

 private:
  PolicyConfig config_;
  std::vector<ArmState> arms_;
  std::vector<Estimate> estimates_;
  double last_alpha_ = 0.0;
};

}  // namespace linucbd

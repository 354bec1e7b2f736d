#include "linucbd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "linucbd/error.hpp"
#include "linucbd/linalg.hpp"

namespace linucbd {

namespace {

Vector random_vector_in_ball(std::mt19937_64& rng, std::size_t d, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
  return v * (r / v.norm());
}

}  // namespace

Vector beta_qp_oracle(const ArmState& state, const Vector& x) {
  const auto& ledger = state.ledger();
  const std::size_t d = state.dim();
  const std::size_t m = ledger.observed();
  const std::size_t cols = m + d;
  const std::size_t size = cols + d;
  Matrix kkt = Matrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  Vector rhs = Vector::Zero(static_cast<Eigen::Index>(size));
  for (std::size_t c = 0; c < cols; ++c) {
    const bool dummy = c >= m;
    const double count = dummy ? 1.0 : ledger.count(c);
    if (!(count > 0.0)) throw Error(ErrorCode::kSingularSystem, "ledger column with zero count");
    const auto ci = static_cast<Eigen::Index>(c);
    kkt(ci, ci) = 1.0 / count;
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = dummy ? (c - m == j ? state.l() : 0.0)
                              : ledger.column(c)(static_cast<Eigen::Index>(j));
      const auto row = static_cast<Eigen::Index>(cols + j);
      kkt(ci, row) = xj;
      kkt(row, ci) = xj;
    }
  }
  for (std::size_t j = 0; j < d; ++j) rhs(static_cast<Eigen::Index>(cols + j)) = x(static_cast<Eigen::Index>(j));
  const Vector sol = solve_dense(std::move(kkt), std::move(rhs));
  return sol.head(static_cast<Eigen::Index>(cols));
}

double beta_objective(const ArmState& state, const Vector& beta) {
  const Vector n = state.ledger().counts(state.dim());
  double value = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (n(i) > 0.0) value += beta(i) * beta(i) / n(i);
  }
  return value;
}

ArmState random_audit_state(std::mt19937_64& rng, std::size_t d, double l,
                            std::size_t max_contexts, std::size_t max_count) {
  std::uniform_int_distribution<std::size_t> context_count(0, max_contexts);
  std::uniform_int_distribution<std::size_t> pulls(1, max_count);
  std::normal_distribution<double> noise(0.0, 1.0);
  ArmState state(d, l, true);
  const std::size_t contexts = context_count(rng);
  for (std::size_t c = 0; c < contexts; ++c) {
    const Vector x = random_vector_in_ball(rng, d, l);
    const std::size_t k = pulls(rng);
    for (std::size_t i = 0; i < k; ++i) state.update(x, noise(rng), c);
  }
  return state;
}

nlohmann::json OracleCheckReport::to_json() const {
  return {{"trials", trials},
          {"max_beta_gap", max_beta_gap},
          {"max_residual", max_residual},
          {"max_estimate_gap", max_estimate_gap},
          {"max_gram_gap", max_gram_gap},
          {"passed", passed}};
}

OracleCheckReport run_oracle_check(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 4);
  OracleCheckReport report;
  report.trials = trials;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t d = dim(rng);
    const double l = 1.0;
    const ArmState state = random_audit_state(rng, d, l, 10, 5);
    const Vector x = random_vector_in_ball(rng, d, l);

    const Vector closed = state.beta_closed_form(x);
    const Vector oracle = beta_qp_oracle(state, x);
    const Matrix X = state.ledger().design(d, l);
    report.max_beta_gap = std::max(report.max_beta_gap, (closed - oracle).cwiseAbs().maxCoeff());
    report.max_residual = std::max(report.max_residual, (X * closed - x).cwiseAbs().maxCoeff());
    report.max_residual = std::max(report.max_residual, (X * oracle - x).cwiseAbs().maxCoeff());

    const double a = 2.0;
    const Estimate agg = state.estimate(x, a);
    const Estimate exp = state.estimate_explicit(x, a);
    report.max_estimate_gap = std::max({report.max_estimate_gap, std::abs(agg.r_hat - exp.r_hat),
                                        std::abs(agg.sigma_hat - exp.sigma_hat)});
    report.max_gram_gap =
        std::max(report.max_gram_gap, (state.V() - state.ledger_gram()).cwiseAbs().maxCoeff());
  }
  report.passed = report.max_beta_gap < 1e-7 && report.max_residual < 1e-9 &&
                  report.max_estimate_gap < 1e-9 && report.max_gram_gap < 1e-8;
  return report;
}

}  // namespace linucbd

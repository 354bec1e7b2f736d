#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <nlohmann/json.hpp>

#include "linucbd/linucb_d.hpp"

namespace linucbd {

/// Minimizes beta' N^+ beta subject to X beta = x over the ledger columns of
/// an audited arm (pulled contexts plus dummies) by forming the KKT system
///   [ N^{-1}  X' ] [beta]   [0]
///   [ X       0  ] [mu  ] = [x]
/// and solving it with Gaussian elimination. Shares no code with the
/// closed form; throws kSingularSystem if the ledger is inconsistent.
Vector beta_qp_oracle(const ArmState& state, const Vector& x);

/// beta' N^+ beta for the arm's ledger counts.
double beta_objective(const ArmState& state, const Vector& beta);

/// Random audited arm: d-dimensional features of norm <= l under up to
/// `max_contexts` contexts, each pulled 1..max_count times with N(0,1) rewards.
ArmState random_audit_state(std::mt19937_64& rng, std::size_t d, double l,
                            std::size_t max_contexts, std::size_t max_count);

struct OracleCheckReport {
  std::size_t trials = 0;
  double max_beta_gap = 0.0;        // ||closed - oracle||_inf
  double max_residual = 0.0;        // ||X beta - x||_inf
  double max_estimate_gap = 0.0;    // aggregated vs explicit (r_hat, sigma_hat)
  double max_gram_gap = 0.0;        // aggregated V vs ledger X N X'
  bool passed = false;

  nlohmann::json to_json() const;
};

/// Runs both equivalence checks on `trials` random audited states.
/// Pass thresholds: beta 1e-7, residual 1e-9, estimates 1e-9, Gram 1e-8.
OracleCheckReport run_oracle_check(std::size_t trials, std::uint64_t seed);

}  // namespace linucbd

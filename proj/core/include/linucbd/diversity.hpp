#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "linucbd/model.hpp"

namespace linucbd {

/// Exhaustive subset enumeration stops being attempted above this many subsets.
inline constexpr std::size_t kSubsetCap = 1'000'000;
/// Random subsets tried after the greedy pass when enumeration is capped.
inline constexpr std::size_t kRandomSubsets = 10'000;

struct ArmBasis {
  Matrix basis;                      // d x d, columns are the chosen feature vectors
  double lambda_min = 0.0;           // lambda_min(basis' basis)
  std::vector<std::size_t> members;  // context ids (finite) or pilot sample indices
};

struct DiversityReport {
  std::vector<ArmBasis> per_arm;
  double lambda0 = 0.0;
  double delta = 0.0;        // l sqrt(d / lambda0)
  bool approximate = false;  // true when some arm fell back to the heuristic search
};

struct SubsetSearch {
  std::vector<std::size_t> indices;
  double lambda_min = 0.0;
  bool approximate = false;
};

/// d-subset of `candidates` maximizing lambda_min(Phi' Phi). Exhaustive when
/// C(m, d) <= cap, otherwise greedy column selection followed by
/// kRandomSubsets random subsets (result flagged approximate).
SubsetSearch best_basis_subset(std::span<const Vector> candidates, std::size_t d,
                               std::uint64_t seed = 0, std::size_t cap = kSubsetCap);

/// l sqrt(d / lambda0).
double diversity_delta(double l, std::size_t d, double lambda0);

/// Per arm, the best d-subset of {x(a,c) : a optimal under c}; lambda0 is the
/// worst arm's value. Throws kDiversityViolation when an arm is optimal under
/// fewer than d contexts.
DiversityReport lambda0_finite(const FiniteInstance& instance, std::size_t cap = kSubsetCap,
                               std::uint64_t seed = 0);

/// Meta-context construction over anchors {Phi_a} with ball radius r.
struct MetaContextPartition {
  std::vector<Matrix> anchors;                  // per arm, d x d
  double lambda0 = 0.0;                         // min_a lambda_min(Phi_a' Phi_a)
  double radius = 0.0;                          // 1/2 sqrt(lambda0 / d)
  std::size_t samples = 0;
  std::vector<std::vector<std::size_t>> hits;   // [a][i]
  std::vector<std::vector<double>> p_hat;       // hits / samples
  std::vector<std::vector<double>> p_lower;     // one-sided 95% Wilson lower bound
  double p = 0.0;                               // min p_hat
  double p_lower_min = 0.0;
  bool verified = false;                        // every p_lower > 0
};

/// 1/2 sqrt(lambda0 / d).
double meta_context_radius(double lambda0, std::size_t d);

/// Group i of x: the anchor with the largest normalized projection
/// x' phi_i / ||phi_i||, ties going to the lowest index.
std::size_t meta_context_group(const Matrix& anchors, Eigen::Ref<const Vector> x);

/// The group of x if x also lies in the radius-r ball around that anchor.
std::optional<std::size_t> meta_context_of(const Matrix& anchors, double radius,
                                           Eigen::Ref<const Vector> x);

/// Monte Carlo masses P[c_t in meta-context (a, i)] over `samples` rounds.
/// Requires lambda_min(Phi_a' Phi_a) > 0 for every arm.
MetaContextPartition meta_contexts(const Instance& instance, std::vector<Matrix> anchors,
                                   std::size_t samples, std::uint64_t seed);

/// Anchors from a pilot run over a grid of radii r: per arm, the densest
/// pilot features (ball mass within r) that keep lambda_min >= 4 d r^2, for
/// the radius minimizing (l^2 d / lambda0 + 2 K d) / p. At most
/// `max_candidates` pilot features per arm are considered.
std::vector<Matrix> select_anchors(const Instance& instance, std::size_t pilot_samples,
                                   std::uint64_t seed, std::size_t max_candidates = 2000);

inline constexpr std::size_t kPilotSamples = 20'000;
inline constexpr std::size_t kMassSamples = 100'000;
/// Seed the command line uses for the meta-context partition of general instances.
inline constexpr std::uint64_t kDefaultPartitionSeed = 0x6d657461;

/// select_anchors followed by meta_contexts, with the default sample sizes.
MetaContextPartition default_meta_contexts(const Instance& instance, std::uint64_t seed);

struct PerturbationResult {
  double worst_lambda_min = 0.0;
  double bound = 0.0;  // (sqrt(lambda_min(Phi' Phi)) - sqrt(d) r)^2
};

/// Moves each column of Phi by a random vector of norm <= r, `trials` times,
/// and checks lambda_min of the perturbed Gram matrix against the bound.
/// Throws kBoundViolation on any violation, kInvalidConfig if r is too large.
PerturbationResult perturbed_basis_bound(const Matrix& phi, double r, std::size_t trials,
                                         std::mt19937_64& rng);

struct L1Representation {
  Vector beta;
  double l1_norm = 0.0;
  double bound = 0.0;  // ||x|| sqrt(d) / sqrt(lambda_min(Phi' Phi))
};

/// Solves x = Phi beta and checks ||beta||_1 against the bound.
/// Throws kSingularSystem for singular Phi, kBoundViolation on violation.
L1Representation l1_representation_bound(const Matrix& phi, const Vector& x);

/// {"lambda0","delta","per_arm":[{"basis","lambda_min"}],"p","r"}
nlohmann::json diversity_to_json(const DiversityReport& report, double p, double r);

}  // namespace linucbd

#include "linucbd/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linucbd/error.hpp"
#include "linucbd/linalg.hpp"

namespace linucbd {

namespace {

constexpr double kWilsonZ = 1.6448536269514722;  // one-sided 95%

// C(m, k), saturating at `limit + 1`.
std::size_t binomial_capped(std::size_t m, std::size_t k, std::size_t limit) {
  if (k > m) return 0;
  k = std::min(k, m - k);
  long double acc = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(m - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<std::size_t>(std::llround(acc));
}

Matrix gather(std::span<const Vector> candidates, std::span<const std::size_t> indices) {
  const auto d = candidates[indices.front()].size();
  Matrix phi(d, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    phi.col(static_cast<Eigen::Index>(j)) = candidates[indices[j]];
  }
  return phi;
}

double gram_lambda_min(std::span<const Vector> candidates, std::span<const std::size_t> indices) {
  const Matrix phi = gather(candidates, indices);
  return lambda_min(phi.transpose() * phi);
}

double wilson_lower(std::size_t hits, std::size_t n) {
  if (n == 0 || hits == 0) return 0.0;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = kWilsonZ * kWilsonZ;
  const double centre = p + z2 / (2.0 * nn);
  const double spread = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return std::max(0.0, (centre - spread) / (1.0 + z2 / nn));
}

std::size_t optimal_of(const Instance& instance, const Round& round) {
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) return optimal_arm(*f, *round.context);
  const auto& g = std::get<GeneralInstance>(instance);
  std::vector<double> r(g.arms());
  for (std::size_t a = 0; a < g.arms(); ++a) {
    r[a] = g.theta(a).dot(round.features.col(static_cast<Eigen::Index>(a)));
  }
  return argmax_with_margin(r, g.delta());
}

}  // namespace

SubsetSearch best_basis_subset(std::span<const Vector> candidates, std::size_t d,
                               std::uint64_t seed, std::size_t cap) {
  const std::size_t m = candidates.size();
  if (d == 0 || m < d) {
    throw Error(ErrorCode::kDiversityViolation,
                "need at least " + std::to_string(d) + " candidate vectors, have " + std::to_string(m));
  }
  SubsetSearch best;
  best.lambda_min = -std::numeric_limits<double>::infinity();

  if (binomial_capped(m, d, cap) <= cap) {
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      const double value = gram_lambda_min(candidates, idx);
      if (value > best.lambda_min) {
        best.lambda_min = value;
        best.indices = idx;
      }
      // Next combination in lexicographic order.
      std::size_t i = d;
      while (i > 0 && idx[i - 1] == m - d + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
  }

  best.approximate = true;
  std::vector<std::size_t> chosen;
  std::vector<bool> used(m, false);
  for (std::size_t k = 0; k < d; ++k) {
    double top = -std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t c = 0; c < m; ++c) {
      if (used[c]) continue;
      chosen.push_back(c);
      const double value = gram_lambda_min(candidates, chosen);
      chosen.pop_back();
      if (value > top) {
        top = value;
        pick = c;
      }
    }
    chosen.push_back(pick);
    used[pick] = true;
  }
  best.indices = chosen;
  best.lambda_min = gram_lambda_min(candidates, chosen);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t trial = 0; trial < kRandomSubsets; ++trial) {
    for (std::size_t j = 0; j < d; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, m - 1);
      std::swap(pool[j], pool[pick(rng)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(d));
    const double value = gram_lambda_min(candidates, subset);
    if (value > best.lambda_min) {
      best.lambda_min = value;
      std::sort(subset.begin(), subset.end());
      best.indices = std::move(subset);
    }
  }
  return best;
}

double diversity_delta(double l, std::size_t d, double lambda0) {
  return l * std::sqrt(static_cast<double>(d) / lambda0);
}

DiversityReport lambda0_finite(const FiniteInstance& instance, std::size_t cap, std::uint64_t seed) {
  const std::size_t d = instance.dim();
  DiversityReport report;
  report.lambda0 = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> favored(instance.arms());
  for (std::size_t c = 0; c < instance.contexts(); ++c) favored[optimal_arm(instance, c)].push_back(c);
  for (std::size_t a = 0; a < instance.arms(); ++a) {
    if (favored[a].size() < d) {
      throw Error(ErrorCode::kDiversityViolation,
                  "arm " + std::to_string(a + 1) + " is optimal under " +
                      std::to_string(favored[a].size()) + " contexts; need " + std::to_string(d));
    }
    std::vector<Vector> candidates;
    for (std::size_t c : favored[a]) candidates.push_back(instance.feature(a, c));
    const SubsetSearch search = best_basis_subset(candidates, d, seed + a, cap);
    ArmBasis basis;
    basis.lambda_min = search.lambda_min;
    basis.basis = gather(candidates, search.indices);
    for (std::size_t i : search.indices) basis.members.push_back(favored[a][i]);
    report.approximate = report.approximate || search.approximate;
    report.lambda0 = std::min(report.lambda0, basis.lambda_min);
    report.per_arm.push_back(std::move(basis));
  }
  if (!(report.lambda0 > 0.0)) {
    throw Error(ErrorCode::kDiversityViolation, "feature vectors of some arm do not span R^d");
  }
  report.delta = diversity_delta(instance.l(), d, report.lambda0);
  return report;
}

double meta_context_radius(double lambda0, std::size_t d) {
  return 0.5 * std::sqrt(lambda0 / static_cast<double>(d));
}

std::size_t meta_context_group(const Matrix& anchors, Eigen::Ref<const Vector> x) {
  // Member of group i iff its projection strictly beats every j < i and is at
  // least every j > i; that is the first maximizer.
  std::size_t best = 0;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < anchors.cols(); ++i) {
    const double proj = x.dot(anchors.col(i)) / anchors.col(i).norm();
    if (proj > top) {
      top = proj;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

std::optional<std::size_t> meta_context_of(const Matrix& anchors, double radius,
                                           Eigen::Ref<const Vector> x) {
  const std::size_t i = meta_context_group(anchors, x);
  if ((x - anchors.col(static_cast<Eigen::Index>(i))).norm() <= radius) return i;
  return std::nullopt;
}

MetaContextPartition meta_contexts(const Instance& instance, std::vector<Matrix> anchors,
                                   std::size_t samples, std::uint64_t seed) {
  const std::size_t K = arm_count(instance);
  const std::size_t d = dimension(instance);
  if (anchors.size() != K) throw Error(ErrorCode::kDimensionMismatch, "need one anchor matrix per arm");
  MetaContextPartition part;
  part.lambda0 = std::numeric_limits<double>::infinity();
  for (const auto& phi : anchors) {
    if (phi.rows() != static_cast<Eigen::Index>(d) || phi.cols() != static_cast<Eigen::Index>(d)) {
      throw Error(ErrorCode::kDimensionMismatch, "anchor matrices must be d x d");
    }
    part.lambda0 = std::min(part.lambda0, lambda_min(phi.transpose() * phi));
  }
  if (!(part.lambda0 > 0.0)) {
    throw Error(ErrorCode::kDiversityViolation, "anchor columns must span R^d for every arm");
  }
  part.anchors = std::move(anchors);
  part.radius = meta_context_radius(part.lambda0, d);
  part.samples = samples;
  part.hits.assign(K, std::vector<std::size_t>(d, 0));

  RoundSampler sampler(instance, seed);
  Round round;
  for (std::size_t n = 0; n < samples; ++n) {
    sampler.next(round);
    const std::size_t a = optimal_of(instance, round);
    if (auto i = meta_context_of(part.anchors[a], part.radius,
                                 round.features.col(static_cast<Eigen::Index>(a)))) {
      ++part.hits[a][*i];
    }
  }

  part.p = std::numeric_limits<double>::infinity();
  part.p_lower_min = std::numeric_limits<double>::infinity();
  part.p_hat.assign(K, std::vector<double>(d, 0.0));
  part.p_lower.assign(K, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t i = 0; i < d; ++i) {
      part.p_hat[a][i] = samples ? static_cast<double>(part.hits[a][i]) / static_cast<double>(samples) : 0.0;
      part.p_lower[a][i] = wilson_lower(part.hits[a][i], samples);
      part.p = std::min(part.p, part.p_hat[a][i]);
      part.p_lower_min = std::min(part.p_lower_min, part.p_lower[a][i]);
    }
  }
  part.verified = part.p_lower_min > 0.0;
  return part;
}

std::vector<Matrix> select_anchors(const Instance& instance, std::size_t pilot_samples,
                                   std::uint64_t seed, std::size_t max_candidates) {
  const std::size_t K = arm_count(instance);
  const std::size_t d = dimension(instance);
  const double dd = static_cast<double>(d);
  const double l = feature_bound(instance);
  std::vector<std::vector<Vector>> observed(K);
  RoundSampler sampler(instance, seed);
  Round round;
  for (std::size_t n = 0; n < pilot_samples; ++n) {
    sampler.next(round);
    const std::size_t a = optimal_of(instance, round);
    if (observed[a].size() < max_candidates) {
      observed[a].push_back(round.features.col(static_cast<Eigen::Index>(a)));
    }
  }
  std::vector<std::vector<float>> dist(K);
  for (std::size_t a = 0; a < K; ++a) {
    const std::size_t m = observed[a].size();
    if (m < d) {
      throw Error(ErrorCode::kDiversityViolation,
                  "arm " + std::to_string(a + 1) + " was optimal on only " + std::to_string(m) +
                      " pilot rounds");
    }
    dist[a].resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        dist[a][i * m + j] = static_cast<float>((observed[a][i] - observed[a][j]).norm());
      }
    }
  }

  // For each trial radius r: per arm, take the densest pilot points in turn,
  // keeping one only if the chosen set still has lambda_min >= 4 d r^2 (so
  // the final radius is at least r). Keep the radius whose anchors minimize
  // (l^2 d / lambda0 + 2 K d) / p, with p the smallest ball mass.
  std::vector<Matrix> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 24; ++step) {
    const double r = 0.01 * std::pow(50.0, step / 23.0);
    const double floor = 4.0 * dd * r * r;
    std::vector<Matrix> anchors;
    double lambda0 = std::numeric_limits<double>::infinity();
    std::size_t min_mass = std::numeric_limits<std::size_t>::max();
    bool feasible = true;
    for (std::size_t a = 0; a < K && feasible; ++a) {
      const std::size_t m = observed[a].size();
      std::vector<std::size_t> mass(m, 0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) mass[i] += dist[a][i * m + j] <= r ? 1 : 0;
      }
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return mass[x] > mass[y]; });
      std::vector<std::size_t> chosen;
      for (std::size_t k = 0; k < d; ++k) {
        bool added = false;
        for (std::size_t idx : order) {
          if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) continue;
          chosen.push_back(idx);
          if (gram_lambda_min(observed[a], chosen) >= floor) {
            added = true;
            break;
          }
          chosen.pop_back();
        }
        if (!added) break;
      }
      if (chosen.size() < d) {
        feasible = false;
        break;
      }
      for (std::size_t idx : chosen) min_mass = std::min(min_mass, mass[idx]);
      lambda0 = std::min(lambda0, gram_lambda_min(observed[a], chosen));
      anchors.push_back(gather(observed[a], chosen));
    }
    if (!feasible || min_mass == 0) continue;
    const double p = static_cast<double>(min_mass) / static_cast<double>(pilot_samples);
    const double score = (l * l * dd / lambda0 + 2.0 * static_cast<double>(K) * dd) / p;
    if (score < best_score) {
      best_score = score;
      best = std::move(anchors);
    }
  }
  if (best.empty()) {
    throw Error(ErrorCode::kDiversityViolation, "no anchor set with positive mass found in the pilot");
  }
  return best;
}

MetaContextPartition default_meta_contexts(const Instance& instance, std::uint64_t seed) {
  return meta_contexts(instance, select_anchors(instance, kPilotSamples, seed), kMassSamples, seed + 1);
}

PerturbationResult perturbed_basis_bound(const Matrix& phi, double r, std::size_t trials,
                                         std::mt19937_64& rng) {
  const auto d = phi.rows();
  if (phi.cols() != d) throw Error(ErrorCode::kDimensionMismatch, "basis must be square");
  const double base = lambda_min(phi.transpose() * phi);
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  if (!(r >= 0.0) || !(r < std::sqrt(base / static_cast<double>(d)))) {
    throw Error(ErrorCode::kInvalidConfig, "radius must satisfy 0 <= r < sqrt(lambda_min / d)");
  }
  PerturbationResult result;
  result.bound = std::pow(std::sqrt(base) - sqrt_d * r, 2);
  result.worst_lambda_min = std::numeric_limits<double>::infinity();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Matrix moved = phi;
    for (Eigen::Index j = 0; j < d; ++j) {
      Vector dir(d);
      do {
        for (Eigen::Index i = 0; i < d; ++i) dir(i) = normal(rng);
      } while (dir.norm() == 0.0);
      // Half the moves sit on the sphere of radius r, where the bound is tightest.
      const double len = unit(rng) < 0.5 ? r : r * std::pow(unit(rng), 1.0 / static_cast<double>(d));
      moved.col(j) += dir * (len / dir.norm());
    }
    const double value = lambda_min(moved.transpose() * moved);
    result.worst_lambda_min = std::min(result.worst_lambda_min, value);
  }
  if (trials == 0) result.worst_lambda_min = base;
  if (result.worst_lambda_min < result.bound - 1e-9 * std::max(1.0, result.bound)) {
    throw Error(ErrorCode::kBoundViolation, "perturbed basis eigenvalue " +
                                                std::to_string(result.worst_lambda_min) +
                                                " below bound " + std::to_string(result.bound));
  }
  return result;
}

L1Representation l1_representation_bound(const Matrix& phi, const Vector& x) {
  if (phi.rows() != phi.cols() || phi.rows() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need a square basis matching x");
  }
  L1Representation rep;
  rep.beta = solve_dense(phi, x);
  rep.l1_norm = rep.beta.cwiseAbs().sum();
  const double lmin = lambda_min(phi.transpose() * phi);
  rep.bound = x.norm() * std::sqrt(static_cast<double>(phi.rows())) / std::sqrt(lmin);
  if (rep.l1_norm > rep.bound * (1.0 + 1e-9) + 1e-12) {
    throw Error(ErrorCode::kBoundViolation, "l1 norm " + std::to_string(rep.l1_norm) +
                                                " exceeds bound " + std::to_string(rep.bound));
  }
  return rep;
}

nlohmann::json diversity_to_json(const DiversityReport& report, double p, double r) {
  auto arms = nlohmann::json::array();
  for (const auto& arm : report.per_arm) {
    auto basis = nlohmann::json::array();
    for (Eigen::Index j = 0; j < arm.basis.cols(); ++j) {
      basis.push_back(std::vector<double>(arm.basis.col(j).data(),
                                          arm.basis.col(j).data() + arm.basis.rows()));
    }
    arms.push_back({{"basis", std::move(basis)}, {"lambda_min", arm.lambda_min},
                    {"members", arm.members}});
  }
  return {{"lambda0", report.lambda0}, {"delta", report.delta}, {"approximate", report.approximate},
          {"per_arm", std::move(arms)}, {"p", p}, {"r", r}};
}

}  // namespace linucbd

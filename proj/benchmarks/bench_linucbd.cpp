#include <benchmark/benchmark.h>

#include <random>

#include "linucbd/baselines.hpp"
#include "linucbd/diversity.hpp"
#include "linucbd/linalg.hpp"
#include "linucbd/linucb_d.hpp"
#include "linucbd/policy.hpp"
#include "linucbd/presets.hpp"
#include "linucbd/simulate.hpp"

namespace {

using namespace linucbd;

Vector random_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(d);
  for (auto& x : v) x = u(rng);
  return v.normalized();
}

void BM_ArmUpdate(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  ArmState arm(d, 1.0);
  const Vector x = random_vector(rng, static_cast<Eigen::Index>(d));
  for (auto _ : state) {
    arm.update(x, 0.5);
    benchmark::DoNotOptimize(arm.V_inverse().data());
  }
}
BENCHMARK(BM_ArmUpdate)->Arg(2)->Arg(4)->Arg(16)->Arg(64);

void BM_ArmEstimate(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  ArmState arm(d, 1.0);
  for (int i = 0; i < 100; ++i) arm.update(random_vector(rng, static_cast<Eigen::Index>(d)), 0.1);
  const Vector x = random_vector(rng, static_cast<Eigen::Index>(d));
  for (auto _ : state) benchmark::DoNotOptimize(arm.estimate(x, 2.0));
}
BENCHMARK(BM_ArmEstimate)->Arg(2)->Arg(4)->Arg(16)->Arg(64);

void BM_RidgeUpdate(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  RidgeLinUcb ridge(1, PolicyConfig{1.0, 1.0, d, AlphaMode::kSchedule});
  const Vector x = random_vector(rng, static_cast<Eigen::Index>(d));
  for (auto _ : state) ridge.update(0, x, 0.5);
}
BENCHMARK(BM_RidgeUpdate)->Arg(2)->Arg(4)->Arg(16)->Arg(64);

void BM_SimulateRound(benchmark::State& state) {
  static const char* const kPresets[] = {"paper61", "paper62"};
  const Instance inst = preset(kPresets[state.range(0)]).instance;
  const std::size_t T = 1000;
  RunOptions opt;
  opt.horizon = T;
  opt.checkpoints = {T};
  for (auto _ : state) {
    auto policy = make_policy("linucb-d", inst);
    benchmark::DoNotOptimize(simulate_run(inst, *policy, 7, opt).pseudo_regret);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * T));
  state.SetLabel(kPresets[state.range(0)]);
}
BENCHMARK(BM_SimulateRound)->Arg(0)->Arg(1);

void BM_BestBasisSubset(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<Vector> xs;
  for (int i = 0; i < state.range(0); ++i) xs.push_back(random_vector(rng, 3));
  for (auto _ : state) benchmark::DoNotOptimize(best_basis_subset(xs, 3).lambda_min);
}
BENCHMARK(BM_BestBasisSubset)->Arg(8)->Arg(16)->Arg(32);

void BM_JacobiEigenvalues(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto d = state.range(0);
  Matrix a(d, d);
  for (Eigen::Index j = 0; j < d; ++j) a.col(j) = random_vector(rng, d);
  const Matrix sym = a.transpose() * a;
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigenvalues(sym));
}
BENCHMARK(BM_JacobiEigenvalues)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();

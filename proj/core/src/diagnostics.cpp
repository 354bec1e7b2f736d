#include "linucbd/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "linucbd/error.hpp"
#include "linucbd/linucb_d.hpp"

namespace linucbd {

namespace {

constexpr double kSlack = 1e-9;

double frame_start(std::size_t k) { return std::ldexp(1.0, static_cast<int>(k) - 1); }

}  // namespace

std::size_t frame_of(std::size_t t) {
  if (t == 0) throw Error(ErrorCode::kInvalidConfig, "rounds start at t = 1");
  return static_cast<std::size_t>(std::bit_width(t));
}

std::vector<Frame> frames(std::size_t T) {
  std::vector<Frame> out;
  for (std::size_t k = 1;; ++k) {
    const std::size_t first = std::size_t{1} << (k - 1);
    if (first > T) break;
    out.push_back({k, first, std::min((std::size_t{1} << k) - 1, T)});
  }
  return out;
}

DiagnosticContext make_diagnostic_context(const Instance& instance,
                                          std::optional<MetaContextPartition> partition) {
  DiagnosticContext ctx;
  ctx.arms = arm_count(instance);
  ctx.gap = analysis_gap(instance);
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) {
    ctx.finite = true;
    ctx.contexts = f->contexts();
    const DiversityReport report = lambda0_finite(*f);
    for (const auto& arm : report.per_arm) ctx.basis.push_back(arm.members);
    ctx.optimal_under.assign(f->arms(), std::vector<bool>(f->contexts(), false));
    for (std::size_t c = 0; c < f->contexts(); ++c) ctx.optimal_under[optimal_arm(*f, c)][c] = true;
  } else {
    ctx.finite = false;
    ctx.partition = std::move(partition);
  }
  return ctx;
}

EventLedger classify_trace(const Trace& trace, const DiagnosticContext& ctx) {
  if (!trace.has_estimates()) {
    throw Error(ErrorCode::kMissingEstimates, "trace has no per-arm estimates; B cannot be classified");
  }
  if (trace.arms != ctx.arms) throw Error(ErrorCode::kDimensionMismatch, "trace and instance disagree on K");
  const std::size_t T = trace.rounds;
  const std::size_t K = trace.arms;
  const auto fs = frames(T);

  EventLedger ledger;
  ledger.flags.assign(T, 0);
  ledger.b_by_frame.assign(fs.size(), 0);

  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t a = 0; a < K; ++a) {
      const std::size_t i = trace.at(t, a);
      if (std::abs(trace.r_hat[i] - trace.reward[i]) > trace.alpha[t - 1] * trace.sigma_hat[i]) {
        ledger.flags[t - 1] |= kEventB;
        ++ledger.b_by_frame[frame_of(t) - 1];
        break;
      }
    }
  }

  // Tracked items: basis contexts (finite) or meta-contexts (a, i) (general).
  std::vector<std::size_t> tracked_contexts;
  double mass = 0.0;
  if (ctx.finite) {
    for (const auto& b : ctx.basis) tracked_contexts.insert(tracked_contexts.end(), b.begin(), b.end());
    std::sort(tracked_contexts.begin(), tracked_contexts.end());
    tracked_contexts.erase(std::unique(tracked_contexts.begin(), tracked_contexts.end()), tracked_contexts.end());
    mass = 1.0 / static_cast<double>(ctx.contexts);
  } else if (ctx.partition) {
    mass = ctx.partition->p;
  } else {
    ledger.ac_available = false;
  }

  if (ledger.ac_available) {
    const std::size_t items = ctx.finite ? tracked_contexts.size() : K * trace.dim;
    std::vector<std::int64_t> slot_of_context;
    if (ctx.finite) {
      slot_of_context.assign(ctx.contexts, -1);
      for (std::size_t j = 0; j < tracked_contexts.size(); ++j) {
        slot_of_context[tracked_contexts[j]] = static_cast<std::int64_t>(j);
      }
    }
    ledger.arrivals.assign(fs.size(), std::vector<std::size_t>(items, 0));
    for (std::size_t t = 1; t <= T; ++t) {
      auto& counts = ledger.arrivals[frame_of(t) - 1];
      if (ctx.finite) {
        const auto c = trace.context[t - 1];
        if (c >= 0 && slot_of_context[static_cast<std::size_t>(c)] >= 0) {
          ++counts[static_cast<std::size_t>(slot_of_context[static_cast<std::size_t>(c)])];
        }
      } else {
        const std::size_t a = trace.optimal[t - 1];
        const Eigen::Map<const Vector> x(trace.optimal_feature.data() + (t - 1) * trace.dim,
                                         static_cast<Eigen::Index>(trace.dim));
        if (auto i = meta_context_of(ctx.partition->anchors[a], ctx.partition->radius, x)) {
          ++counts[a * trace.dim + *i];
        }
      }
    }
    for (std::size_t f = 0; f + 1 < fs.size(); ++f) {
      const double start = frame_start(fs[f].k);
      const double a_threshold = 0.5 * mass * start;
      const double c_threshold = 0.25 * mass * start;
      const auto& counts = ledger.arrivals[f];
      const bool irregular = std::any_of(counts.begin(), counts.end(), [&](std::size_t n) {
        return static_cast<double>(n) <= a_threshold;
      });
      const bool bad = static_cast<double>(ledger.b_by_frame[f]) >= c_threshold;
      for (std::size_t t = fs[f + 1].first; t <= fs[f + 1].last; ++t) {
        if (irregular) ledger.flags[t - 1] |= kEventA;
        if (bad) ledger.flags[t - 1] |= kEventC;
      }
    }
  }

  for (std::size_t t = 1; t <= T; ++t) {
    std::uint8_t& f = ledger.flags[t - 1];
    if (!(f & (kEventA | kEventB | kEventC)) && trace.chosen[t - 1] != trace.optimal[t - 1]) f |= kEventD;
    if (f & kEventA) ++ledger.A;
    if (f & kEventB) ++ledger.B;
    if (f & kEventC) ++ledger.C;
    if (f & kEventD) ++ledger.D;
  }
  return ledger;
}

LemmaNuReport lemma_nu_check(const EventLedger& ledger, const Trace& trace, const DiagnosticContext& ctx) {
  if (!ctx.finite) throw Error(ErrorCode::kInvalidConfig, "the per-context pull bound needs a finite instance");
  LemmaNuReport report;
  const std::size_t K = trace.arms;
  const std::size_t n = ctx.contexts;
  std::vector<std::size_t> good_pulls(K * n, 0);
  const double gap2 = ctx.gap * ctx.gap;
  for (std::size_t t = 1; t <= trace.rounds; ++t) {
    const double a_t = trace.alpha[t - 1];
    const double bound = 4.0 * a_t * a_t / gap2;
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t c = 0; c < n; ++c) {
        if (ctx.optimal_under[a][c]) continue;
        const std::size_t count = good_pulls[a * n + c];
        report.max_count = std::max(report.max_count, count);
        if (static_cast<double>(count) > bound * (1.0 + kSlack)) {
          ++report.violations;
          if (report.first.size() < kKeptViolations) report.first.push_back({t, a, c, count, bound});
        }
      }
    }
    if (!ledger.in(t, kEventB)) {
      ++good_pulls[trace.chosen[t - 1] * n + static_cast<std::size_t>(trace.context[t - 1])];
    }
  }
  return report;
}

EllipticalReport elliptical_potential_check(const std::vector<double>& sigma, std::size_t d, double l) {
  EllipticalReport report;
  const double dd = static_cast<double>(d);
  const double l2 = l * l;
  report.min_margin = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t m = 1; m <= sigma.size(); ++m) {
    sum += std::min(1.0, sigma[m - 1] * sigma[m - 1]);
    const double bound = 2.0 * dd * std::log((dd * l2 + static_cast<double>(m) * l2) / (dd * l2));
    const double margin = bound - sum;
    report.min_margin = std::min(report.min_margin, margin);
    if (margin < -kSlack * (1.0 + bound)) ++report.violations;
  }
  if (sigma.empty()) report.min_margin = 0.0;
  report.sums.push_back(sum);
  return report;
}

EllipticalReport elliptical_potential_check(const Trace& trace, std::size_t d, double l) {
  if (!trace.has_estimates()) throw Error(ErrorCode::kMissingEstimates, "trace has no per-arm estimates");
  std::vector<std::vector<double>> per_arm(trace.arms);
  for (std::size_t t = 1; t <= trace.rounds; ++t) {
    const std::size_t a = trace.chosen[t - 1];
    per_arm[a].push_back(trace.sigma_hat[trace.at(t, a)]);
  }
  EllipticalReport total;
  total.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& sigma : per_arm) {
    const EllipticalReport r = elliptical_potential_check(sigma, d, l);
    total.violations += r.violations;
    total.min_margin = std::min(total.min_margin, r.min_margin);
    total.sums.push_back(r.sums.front());
  }
  return total;
}

TheoryInputs theory_inputs_for(const Instance& instance, const MetaContextPartition* partition) {
  TheoryInputs in;
  in.d = dimension(instance);
  in.K = arm_count(instance);
  in.gap = analysis_gap(instance);
  in.l = feature_bound(instance);
  in.s = parameter_bound(instance);
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) {
    const DiversityReport report = lambda0_finite(*f);
    in.delta = report.delta;
    in.n = f->contexts();
    in.p = 1.0 / static_cast<double>(f->contexts());
  } else {
    if (!partition) throw Error(ErrorCode::kInvalidConfig, "general instances need a meta-context partition");
    in.delta = diversity_delta(in.l, in.d, partition->lambda0);
    in.p = partition->p;
  }
  return in;
}

double TheoryConstants::value(const std::optional<double>& log_value) {
  if (!log_value) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(*log_value);
}

TheoryConstants theory_constants(const TheoryInputs& in) {
  if (in.d == 0 || in.K == 0 || !(in.gap > 0.0) || !(in.delta > 0.0) || !(in.l > 0.0) || !(in.s > 0.0) ||
      (in.n && *in.n == 0) || (in.p && !(*in.p > 0.0))) {
    throw Error(ErrorCode::kInvalidConfig, "theory constants need positive inputs");
  }
  const double d = static_cast<double>(in.d);
  const double K = static_cast<double>(in.K);
  const double gap2 = in.gap * in.gap;
  const double delta2 = in.delta * in.delta;
  const double log_floor = 12.0 * in.l * in.l * in.s * in.s / (2.0 + d);

  TheoryConstants out;
  out.delta = in.delta;
  if (in.n) {
    const double t1 = std::max(384.0 * (2.0 + d) * static_cast<double>(*in.n) * (delta2 + K) / gap2, 10.0);
    out.log_t1 = std::log(t1);
    out.log_t2 = std::max(*out.log_t1 + std::log(*out.log_t1), log_floor);
  }
  if (in.p) {
    const double t3 = std::max(1728.0 * (2.0 + d) * (delta2 + 2.0 * K * d) / (gap2 * *in.p), 10.0);
    out.log_t3 = std::log(t3);
    out.log_t4 = std::max(*out.log_t3 + 2.0 * std::log(*out.log_t3), log_floor);
  }
  PolicyConfig config{in.l, in.s, in.d, AlphaMode::kSchedule};
  for (std::size_t t = 1; t <= 10'000'000; t *= 10) out.alpha_table.emplace_back(t, alpha(t, config));
  return out;
}

nlohmann::json constants_to_json(const TheoryConstants& c) {
  nlohmann::json out;
  const auto put = [&](const char* name, const std::optional<double>& log_value) {
    const std::string key(name);
    if (!log_value) {
      out[key] = nullptr;
      out["log10_" + key] = nullptr;
      return;
    }
    const double v = std::exp(*log_value);
    out[key] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    out["log10_" + key] = *log_value / std::log(10.0);
  };
  put("t1", c.log_t1);
  put("t2", c.log_t2);
  put("t3", c.log_t3);
  put("t4", c.log_t4);
  out["delta"] = c.delta;
  auto table = nlohmann::json::array();
  for (const auto& [t, a] : c.alpha_table) table.push_back({{"t", t}, {"alpha", a}});
  out["alpha"] = std::move(table);
  return out;
}

nlohmann::json events_to_json(const EventLedger& ledger, const std::optional<LemmaNuReport>& nu,
                              const EllipticalReport& elliptical) {
  nlohmann::json out = {{"A", ledger.A},
                        {"B", ledger.B},
                        {"C", ledger.C},
                        {"D", ledger.D},
                        {"B_by_frame", ledger.b_by_frame},
                        {"elliptical_violations", elliptical.violations},
                        {"ac_available", ledger.ac_available}};
  out["lemma_nu_violations"] = nu ? nlohmann::json(nu->violations) : nlohmann::json(nullptr);
  return out;
}

}  // namespace linucbd

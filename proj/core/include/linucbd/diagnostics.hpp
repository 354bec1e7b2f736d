#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "linucbd/diversity.hpp"
#include "linucbd/model.hpp"
#include "linucbd/simulate.hpp"

namespace linucbd {

/// Rounds [2^{k-1}, min(2^k - 1, T)].
struct Frame {
  std::size_t k = 1;
  std::size_t first = 1;
  std::size_t last = 1;
};

/// Index k of the frame containing round t >= 1.
std::size_t frame_of(std::size_t t);
std::vector<Frame> frames(std::size_t T);

/// What the classifier needs from the instance beyond the trace.
struct DiagnosticContext {
  bool finite = true;
  std::size_t arms = 0;
  std::size_t contexts = 0;                       // n (finite)
  double gap = 0.0;                               // Delta
  std::vector<std::vector<std::size_t>> basis;    // finite: per arm, the contexts of its best basis
  std::vector<std::vector<bool>> optimal_under;   // finite: [a][c] = a optimal under c
  std::optional<MetaContextPartition> partition;  // general: meta-contexts, when supplied
};

/// Finite instances: basis contexts from lambda0_finite. General instances:
/// `partition` is carried through; without one, A and C are not classified.
DiagnosticContext make_diagnostic_context(const Instance& instance,
                                          std::optional<MetaContextPartition> partition = std::nullopt);

enum EventFlag : std::uint8_t { kEventA = 1, kEventB = 2, kEventC = 4, kEventD = 8 };

struct EventLedger {
  std::vector<std::uint8_t> flags;                    // per round, bits of EventFlag
  std::vector<std::size_t> b_by_frame;                // B_k
  std::vector<std::vector<std::size_t>> arrivals;     // [k-1][tracked item], N_{F_k}
  bool ac_available = true;
  std::size_t A = 0, B = 0, C = 0, D = 0;

  bool in(std::size_t t, EventFlag f) const { return (flags[t - 1] & f) != 0; }
};

/// Exact event flags for a trace. Throws kMissingEstimates when the trace has
/// no per-arm (r_hat, sigma_hat).
EventLedger classify_trace(const Trace& trace, const DiagnosticContext& ctx);

struct LemmaNuViolation {
  std::size_t t = 0;
  std::size_t arm = 0;
  std::size_t context = 0;
  std::size_t count = 0;
  double bound = 0.0;
};

struct LemmaNuReport {
  std::size_t violations = 0;
  std::vector<LemmaNuViolation> first;  // up to kKeptViolations
  std::size_t max_count = 0;            // largest N-bar seen over all (a, c not in C_a)
};

inline constexpr std::size_t kKeptViolations = 32;

/// For every round t and every (a, c) with a sub-optimal under c, checks that
/// the pulls of a under c at rounds tau < t outside B satisfy
/// N-bar <= 4 alpha_t^2 / Delta^2. Finite instances only.
LemmaNuReport lemma_nu_check(const EventLedger& ledger, const Trace& trace, const DiagnosticContext& ctx);

struct EllipticalReport {
  std::size_t violations = 0;
  double min_margin = 0.0;  // min over arms and prefixes of bound - sum
  std::vector<double> sums; // per arm, final sum min(1, sigma^2)
};

/// Per arm and every prefix of m pulls: sum min(1, sigma_hat^2) over those
/// pulls <= 2 d ln((d l^2 + m l^2) / (d l^2)).
EllipticalReport elliptical_potential_check(const Trace& trace, std::size_t d, double l);

/// Same check on one arm's sigma_hat sequence.
EllipticalReport elliptical_potential_check(const std::vector<double>& sigma, std::size_t d, double l);

struct TheoryInputs {
  std::size_t d = 1;
  std::size_t K = 1;
  std::optional<std::size_t> n;  // finite instances
  std::optional<double> p;       // meta-context mass (1/n for finite instances)
  double gap = 1.0;              // Delta
  double delta = 1.0;            // l sqrt(d / lambda0)
  double l = 1.0;
  double s = 1.0;
};

/// Finite instances: delta from lambda0_finite, n contexts and p = 1/n.
/// General instances: delta and p from the meta-context partition (n unset).
TheoryInputs theory_inputs_for(const Instance& instance,
                               const MetaContextPartition* partition = nullptr);

/// Constants kept as natural logs; the plain value is exp(log) and may be inf.
struct TheoryConstants {
  std::optional<double> log_t1, log_t2, log_t3, log_t4;
  double delta = 0.0;
  std::vector<std::pair<std::size_t, double>> alpha_table;  // (t, alpha_t)

  static double value(const std::optional<double>& log_value);
};

/// t1 = max{384 (2+d) n (delta^2 + K) / Delta^2, 10},   t2 = max{t1 ln t1, exp(12 l^2 s^2 / (2+d))}
/// t3 = max{1728 (2+d) (delta^2 + 2Kd) / (Delta^2 p), 10}, t4 = max{t3 ln^2 t3, exp(12 l^2 s^2 / (2+d))}
/// t1, t2 need n; t3, t4 need p. Throws kInvalidConfig on non-positive inputs.
TheoryConstants theory_constants(const TheoryInputs& in);

/// {"t1","t2","t3","t4","log10_t1",...,"delta","alpha":[{"t","alpha"}]}; values
/// that overflow a double are null with their log10 still reported.
nlohmann::json constants_to_json(const TheoryConstants& c);

/// {"A","B","C","D","B_by_frame","lemma_nu_violations","elliptical_violations","ac_available"}
nlohmann::json events_to_json(const EventLedger& ledger, const std::optional<LemmaNuReport>& nu,
                              const EllipticalReport& elliptical);

}  // namespace linucbd

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmq/dephasing.hpp"
#include "nmq/intervals.hpp"
#include "nmq/jc.hpp"
#include "nmq/states.hpp"

namespace nmq {

enum class ModelKind { jc, dephasing };

enum class BlpMode { direct, formula };

// Reference maximally entangled state for the Choi construction.
enum class ChoiReference { phi_plus, psi_plus };

// Positivity threshold separating a genuinely zero measure from integrator
// noise.
inline constexpr double kMeasureZeroTol = 1e-10;

struct MeasureValue {
  double value = 0.0;
  bool divergent = false;
  IntervalSet intervals;

  bool positive() const { return divergent || value > kMeasureZeroTol; }
};

// BLP measure N for a given initial-state pair difference (a, b).
//
// direct mode (canonical): the trace distance D(t) is known in closed form
// from the element evolution -- sqrt(|G|^4 a^2 + |G|^2 |b|^2) for the JC
// model, sqrt(a^2 + |b|^2 e^{2 Gamma_p}) for dephasing. Its increase
// intervals come from the sign of the sampled dD/dt and the value is the
// telescoped sum of D over those intervals (the integrand is an exact
// derivative).
//
// formula mode: integrates the printed rate-form integrands (-gamma F(t) for
// JC and the analogous dephasing expression) over the same interval set.
// The two modes agree on intervals by construction; their values differ for
// the JC model (the rate-form numerator carries a different coefficient on
// the |b|^2 term than the derivative of D), and both are reported.
MeasureValue blp_measure(const GTrace& trace, const PairParams& pair,
                         BlpMode mode = BlpMode::direct);
MeasureValue blp_measure(const DephasingTrace& trace, const PairParams& pair,
                         BlpMode mode = BlpMode::direct);

// RHP entanglement measure: twice the accumulated increase of the
// system-ancilla concurrence C(t) (= |G| or e^{Gamma_p}).
MeasureValue rhp_entanglement_measure(const GTrace& trace);
MeasureValue rhp_entanglement_measure(const DephasingTrace& trace);

// RHP divisibility measure: -integral of the rate over its negative
// intervals, telescoped through the accumulated Gamma. For the JC model a
// flagged (unresolvable) window inside an interval marks the result
// divergent; the reported number is then a lower bound with Gamma capped at
// the flag.
MeasureValue rhp_divisibility_measure(const GTrace& trace);
MeasureValue rhp_divisibility_measure(const DephasingTrace& trace);

// g(t) of the divisibility witness: builds [I + eps (L_t x I)] |Phi><Phi|
// explicitly, takes (trace norm - 1)/eps for every entry of the schedule and
// Richardson-extrapolates the last two values to eps -> 0. For the JC model
// rate/shift are gamma(t), S(t); for dephasing rate is gamma_p(t) and shift
// is ignored.
double choi_g(ModelKind kind, double rate, double shift,
              std::span<const double> eps_schedule,
              ChoiReference reference = ChoiReference::phi_plus);

// Rescales a schedule by 1/max(1, |rate| + |shift|) so the finite-eps
// truncation error of the witness stays proportionate when rates are large.
std::vector<double> scaled_epsilon_schedule(std::span<const double> base,
                                            double rate, double shift);

// g(t_k) over the whole grid with the per-point scaled schedule; flagged
// indices yield NaN (the witness is undefined there).
std::vector<double> choi_curve(const GTrace& trace,
                               std::span<const double> eps_schedule);
std::vector<double> choi_curve(const DephasingTrace& trace,
                               std::span<const double> eps_schedule);

// The three independent interval routes used by the equivalence check:
// sign of dD/dt, sign of dC/dt, and positivity of the Choi witness.
IntervalSet distance_increase_intervals(const GTrace& trace,
                                        const PairParams& pair);
IntervalSet distance_increase_intervals(const DephasingTrace& trace,
                                        const PairParams& pair);
IntervalSet concurrence_increase_intervals(const GTrace& trace);
IntervalSet concurrence_increase_intervals(const DephasingTrace& trace);
IntervalSet choi_positive_intervals(const GTrace& trace,
                                    std::span<const double> eps_schedule);
IntervalSet choi_positive_intervals(const DephasingTrace& trace,
                                    std::span<const double> eps_schedule);

struct EquivalenceResult {
  bool verdict = false;
  double interval_set_distance = 0.0;
  bool sets_match = false;
  bool positivity_agrees = false;
};

// Verdict is true iff the three sets pairwise agree within 2*dt per endpoint
// (equal counts) and the three positivity predicates coincide (a divergent
// flag counts as positive).
EquivalenceResult equivalence_report(const IntervalSet& distance_route,
                                     const IntervalSet& concurrence_route,
                                     const IntervalSet& choi_route,
                                     const MeasureValue& blp,
                                     const MeasureValue& entanglement,
                                     const MeasureValue& divisibility,
                                     double dt);

struct SweepSummary {
  std::size_t n_pairs = 0;
  std::uint64_t seed = 0;
  std::size_t n_nonzero = 0;
  bool intervals_invariant = false;
  double max_endpoint_discrepancy = 0.0;
  PairParams argmax_pair;
  double max_value = 0.0;
  PairParams refined_argmax;
  double refined_max = 0.0;
  double canonical_value = 0.0;  // pair a = 0, |b| = 1
  bool canonical_attains_max = false;  // within 1 percent of refined_max
};

// Draws n_pairs Bloch-vector pairs uniformly from the ball (deterministic in
// the seed), evaluates the direct BLP measure for each, checks that every
// nonzero pair produces the canonical interval set, and refines the argmax
// along the feasibility boundary a^2 + |b|^2 = 1.
SweepSummary pair_sweep(const GTrace& trace, std::size_t n_pairs,
                        std::uint64_t seed, std::size_t jobs = 0);
SweepSummary pair_sweep(const DephasingTrace& trace, std::size_t n_pairs,
                        std::uint64_t seed, std::size_t jobs = 0);

struct MeasureReport {
  std::string model_descriptor;
  ModelKind kind = ModelKind::jc;
  PairParams pair;
  MeasureValue blp;
  double blp_formula_value = 0.0;
  MeasureValue rhp_entanglement;
  MeasureValue rhp_divisibility;
  IntervalSet choi_route;
  EquivalenceResult equivalence;
  std::optional<SweepSummary> sweep;
};

// Full measure pipeline for one trace: three measures, three interval
// routes, equivalence verdict.
MeasureReport build_measure_report(const GTrace& trace, const PairParams& pair,
                                   std::span<const double> eps_schedule);
MeasureReport build_measure_report(const DephasingTrace& trace,
                                   const PairParams& pair,
                                   std::span<const double> eps_schedule);

}  // namespace nmq

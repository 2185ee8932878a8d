#include "nmq/measures.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "nmq/errors.hpp"
#include "parallel_for.hpp"

namespace nmq {
namespace {

// Uniform view over the two trace types; conc is |G| resp. e^{Gamma_p}, and
// both trace distances are functions of it alone.
struct MeasureInput {
  ModelKind kind = ModelKind::jc;
  const TimeGrid* grid = nullptr;
  std::span<const double> rate;
  std::span<const std::uint8_t> flags;
  std::span<const double> shift;  // JC Lamb shift; empty for dephasing
  std::vector<double> conc;
  std::function<double(double)> conc_at;
  std::function<double(double)> big_gamma_at;
};

MeasureInput make_input(const GTrace& trace) {
  if (!trace.has_rates) {
    throw DomainError("measure evaluation needs a trace with derived rates");
  }
  MeasureInput in;
  in.kind = ModelKind::jc;
  in.grid = &trace.grid;
  in.rate = trace.gamma;
  in.flags = trace.divergent;
  in.shift = trace.lamb_shift;
  in.conc.resize(trace.grid.count);
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    in.conc[k] = std::abs(trace.g[k]);
  }
  in.conc_at = [&trace](double t) { return trace.abs_g_at(t); };
  in.big_gamma_at = [&trace](double t) { return trace.big_gamma_at(t); };
  return in;
}

MeasureInput make_input(const DephasingTrace& trace) {
  MeasureInput in;
  in.kind = ModelKind::dephasing;
  in.grid = &trace.grid;
  in.rate = trace.gamma_p;
  in.conc.resize(trace.grid.count);
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    in.conc[k] = std::exp(trace.big_gamma_p[k]);
  }
  in.conc_at = [&trace](double t) { return std::exp(trace.big_gamma_p_at(t)); };
  in.big_gamma_at = [&trace](double t) { return trace.big_gamma_p_at(t); };
  return in;
}

double distance_from_conc(ModelKind kind, const PairParams& pair, double c) {
  const double b2 = std::norm(pair.b);
  if (kind == ModelKind::jc) {
    return c * std::sqrt(c * c * pair.a * pair.a + b2);
  }
  return std::sqrt(pair.a * pair.a + b2 * c * c);
}

std::vector<double> sampled_derivative(std::span<const double> v, double dt) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n >= 3) {
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      d[k] = (v[k + 1] - v[k - 1]) / (2.0 * dt);
    }
  } else if (n == 2) {
    d[0] = d[1] = (v[1] - v[0]) / dt;
  }
  return d;
}

// Intervals where the sampled curve increases (its derivative is positive).
IntervalSet increase_intervals(std::span<const double> curve,
                               const TimeGrid& grid) {
  std::vector<double> neg = sampled_derivative(curve, grid.dt);
  for (double& x : neg) x = -x;
  return negative_intervals(neg, grid);
}

double telescoped_sum(const IntervalSet& set,
                      const std::function<double(double)>& f) {
  double total = 0.0;
  for (const Interval& iv : set.intervals()) {
    total += f(iv.t_end) - f(iv.t_start);
  }
  return total;
}

// Trapezoid of sampled integrand h over the interval set, with linear
// interpolation on the partial end panels. Panels touching a flagged sample
// contribute nothing, mirroring the frozen Gamma convention.
double integrate_over_intervals(const IntervalSet& set,
                                std::span<const double> h,
                                std::span<const std::uint8_t> flags,
                                const TimeGrid& grid) {
  const auto flagged = [&](std::size_t k) {
    return !flags.empty() && flags[k] != 0;
  };
  const auto h_at = [&](double t) {
    const double x = t / grid.dt;
    const auto k = std::min(static_cast<std::size_t>(x), grid.count - 2);
    const double w = x - static_cast<double>(k);
    return h[k] + w * (h[k + 1] - h[k]);
  };

  double total = 0.0;
  for (const Interval& iv : set.intervals()) {
    const auto k_lo = static_cast<std::size_t>(std::ceil(iv.t_start / grid.dt));
    const auto k_hi =
        static_cast<std::size_t>(std::floor(iv.t_end / grid.dt));
    if (k_lo > k_hi) {  // interval inside one panel
      if (!flagged(std::min(k_hi, grid.count - 1)) && !flagged(k_lo)) {
        total += 0.5 * (h_at(iv.t_start) + h_at(iv.t_end)) * iv.length();
      }
      continue;
    }
    if (k_lo > 0 && grid.time(k_lo) > iv.t_start) {
      if (!flagged(k_lo - 1) && !flagged(k_lo)) {
        total += 0.5 * (h_at(iv.t_start) + h[k_lo]) *
                 (grid.time(k_lo) - iv.t_start);
      }
    }
    for (std::size_t k = k_lo; k + 1 <= k_hi; ++k) {
      if (!flagged(k) && !flagged(k + 1)) {
        total += 0.5 * (h[k] + h[k + 1]) * grid.dt;
      }
    }
    if (k_hi + 1 < grid.count && iv.t_end > grid.time(k_hi)) {
      if (!flagged(k_hi) && !flagged(k_hi + 1)) {
        total += 0.5 * (h[k_hi] + h_at(iv.t_end)) *
                 (iv.t_end - grid.time(k_hi));
      }
    }
  }
  return total;
}

MeasureValue blp_impl(const MeasureInput& in, const PairParams& pair,
                      BlpMode mode) {
  if (pair.is_degenerate()) {
    throw DegeneratePairError("BLP measure needs a pair with a != 0 or b != 0");
  }
  const std::size_t n = in.grid->count;
  std::vector<double> dist(n);
  for (std::size_t k = 0; k < n; ++k) {
    dist[k] = distance_from_conc(in.kind, pair, in.conc[k]);
  }
  MeasureValue out;
  out.intervals = increase_intervals(dist, *in.grid);

  if (mode == BlpMode::direct) {
    out.value = telescoped_sum(out.intervals, [&](double t) {
      return distance_from_conc(in.kind, pair, in.conc_at(t));
    });
    return out;
  }

  // formula mode: the printed rate-form integrand evaluated on the samples.
  const double a2 = pair.a * pair.a;
  const double b2 = std::norm(pair.b);
  std::vector<double> h(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!in.flags.empty() && in.flags[k]) continue;
    const double c = in.conc[k];
    if (in.kind == ModelKind::jc) {
      const double denom = std::sqrt(a2 * c * c + b2);
      if (denom > 0.0) {
        h[k] = -in.rate[k] * (a2 * c * c * c + b2 * c) / denom;
      }
    } else {
      const double denom = std::sqrt(a2 + b2 * c * c);
      if (denom > 0.0) {
        h[k] = -2.0 * in.rate[k] * b2 * c * c / denom;
      }
    }
  }
  out.value = integrate_over_intervals(out.intervals, h, in.flags, *in.grid);
  return out;
}

MeasureValue rhp_entanglement_impl(const MeasureInput& in) {
  MeasureValue out;
  out.intervals = increase_intervals(in.conc, *in.grid);
  out.value = 2.0 * telescoped_sum(out.intervals, in.conc_at);
  return out;
}

MeasureValue rhp_divisibility_impl(const MeasureInput& in) {
  MeasureValue out;
  out.intervals = negative_intervals(in.rate, *in.grid, in.flags);

  double total = 0.0;
  bool divergent = false;
  for (const Interval& iv : out.intervals.intervals()) {
    if (in.kind == ModelKind::jc) {
      total += in.big_gamma_at(iv.t_start) - in.big_gamma_at(iv.t_end);
    } else {
      total += in.big_gamma_at(iv.t_end) - in.big_gamma_at(iv.t_start);
    }
    if (!in.flags.empty()) {
      const auto k_lo = static_cast<std::size_t>(std::ceil(iv.t_start / in.grid->dt));
      const auto k_hi = std::min<std::size_t>(
          static_cast<std::size_t>(std::floor(iv.t_end / in.grid->dt)),
          in.grid->count - 1);
      for (std::size_t k = k_lo; k <= k_hi; ++k) {
        if (in.flags[k]) {
          divergent = true;
          break;
        }
      }
    }
  }
  out.value = total;
  out.divergent = divergent;
  return out;
}

Eigen::Matrix4cd apply_generator(ModelKind kind, double rate, double shift,
                                 const Eigen::Matrix4cd& m) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  const complexd half_up{0.0, 0.5 * shift};
  for (int ar = 0; ar < 2; ++ar) {
    for (int ac = 0; ac < 2; ++ac) {
      const complexd b_ee = m(ar, ac);
      const complexd b_eg = m(ar, 2 + ac);
      const complexd b_ge = m(2 + ar, ac);
      if (kind == ModelKind::jc) {
        out(ar, ac) += -rate * b_ee;
        out(2 + ar, 2 + ac) += rate * b_ee;
        out(ar, 2 + ac) += -(half_up + 0.5 * rate) * b_eg;
        out(2 + ar, ac) += (half_up - 0.5 * rate) * b_ge;
      } else {
        out(ar, 2 + ac) += -2.0 * rate * b_eg;
        out(2 + ar, ac) += -2.0 * rate * b_ge;
      }
    }
  }
  return out;
}

double trace_norm(const Eigen::Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver;
  solver.compute(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

std::vector<double> choi_curve_impl(const MeasureInput& in,
                                    std::span<const double> eps) {
  const std::size_t n = in.grid->count;
  std::vector<double> g(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n; ++k) {
    if (!in.flags.empty() && in.flags[k]) continue;
    const double shift = in.shift.empty() ? 0.0 : in.shift[k];
    const auto scaled = scaled_epsilon_schedule(eps, in.rate[k], shift);
    g[k] = choi_g(in.kind, in.rate[k], shift, scaled);
  }
  return g;
}

IntervalSet choi_positive_intervals_impl(const MeasureInput& in,
                                         std::span<const double> eps) {
  const std::vector<double> g = choi_curve_impl(in, eps);
  double rate_scale = 1.0;
  for (std::size_t k = 0; k < in.rate.size(); ++k) {
    if (in.flags.empty() || !in.flags[k]) {
      rate_scale = std::max(rate_scale, std::abs(in.rate[k]));
    }
  }
  const double g_tol = 1e-9 * rate_scale;
  std::vector<double> neg(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    neg[k] = std::isnan(g[k]) ? 0.0 : g_tol - g[k];
  }
  return negative_intervals(neg, *in.grid, in.flags);
}

SweepSummary sweep_impl(const MeasureInput& in, std::size_t n_pairs,
                        std::uint64_t seed, std::size_t jobs) {
  if (n_pairs < 2) {
    throw DomainError("pair_sweep needs n_pairs >= 2");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto draw_ball = [&]() {
    while (true) {
      const double x = u(rng), y = u(rng), z = u(rng);
      if (x * x + y * y + z * z <= 1.0) return BlochVector{x, y, z};
    }
  };

  std::vector<PairParams> pairs(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const BlochVector r1 = draw_ball();
    const BlochVector r2 = draw_ball();
    pairs[i] = pair_to_ab(bloch_to_density(r1), bloch_to_density(r2));
  }

  SweepSummary summary;
  summary.n_pairs = n_pairs;
  summary.seed = seed;

  const PairParams canonical{0.0, complexd{1.0, 0.0}};
  const MeasureValue canonical_mv = blp_impl(in, canonical, BlpMode::direct);
  summary.canonical_value = canonical_mv.value;

  std::vector<double> values(n_pairs, 0.0);
  std::vector<double> discrepancies(n_pairs, 0.0);
  std::vector<std::uint8_t> nonzero(n_pairs, 0);
  std::vector<std::uint8_t> matches(n_pairs, 1);
  detail::parallel_for(n_pairs, jobs, [&](std::size_t i) {
    if (pairs[i].is_degenerate()) return;
    nonzero[i] = 1;
    const MeasureValue mv = blp_impl(in, pairs[i], BlpMode::direct);
    values[i] = mv.value;
    discrepancies[i] = interval_set_distance(mv.intervals, canonical_mv.intervals);
    matches[i] = mv.intervals.size() == canonical_mv.intervals.size() &&
                 discrepancies[i] <= 2.0 * in.grid->dt;
  });

  summary.intervals_invariant = true;
  std::size_t best = n_pairs;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    if (!nonzero[i]) continue;
    ++summary.n_nonzero;
    summary.max_endpoint_discrepancy =
        std::max(summary.max_endpoint_discrepancy, discrepancies[i]);
    if (!matches[i]) summary.intervals_invariant = false;
    if (best == n_pairs || values[i] > values[best]) best = i;
  }
  if (best < n_pairs) {
    summary.argmax_pair = pairs[best];
    summary.max_value = values[best];
  }

  // The measure is exactly linear in the pair radius, so the maximum lies on
  // the boundary a^2 + |b|^2 = 1; refine by a theta scan plus golden-section.
  const auto boundary_value = [&](double theta) {
    const PairParams p{std::cos(theta), complexd{std::sin(theta), 0.0}};
    if (p.is_degenerate()) return 0.0;
    return blp_impl(in, p, BlpMode::direct).value;
  };
  double best_theta = 0.0;
  double best_value = -1.0;
  constexpr int kScan = 360;
  for (int i = 0; i <= kScan; ++i) {
    const double theta = 0.5 * M_PI * static_cast<double>(i) / kScan;
    const double v = boundary_value(theta);
    if (v > best_value) {
      best_value = v;
      best_theta = theta;
    }
  }
  double lo = std::max(0.0, best_theta - 0.5 * M_PI / kScan);
  double hi = std::min(0.5 * M_PI, best_theta + 0.5 * M_PI / kScan);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = boundary_value(x1);
  double f2 = boundary_value(x2);
  for (int iter = 0; iter < 40; ++iter) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = boundary_value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = boundary_value(x1);
    }
  }
  const double refined_theta = 0.5 * (lo + hi);
  const double refined_value = boundary_value(refined_theta);
  summary.refined_max = std::max({best_value, refined_value, summary.max_value});
  if (refined_value >= best_value && refined_value >= summary.max_value) {
    summary.refined_argmax =
        PairParams{std::cos(refined_theta), complexd{std::sin(refined_theta), 0.0}};
  } else if (best_value >= summary.max_value) {
    summary.refined_argmax =
        PairParams{std::cos(best_theta), complexd{std::sin(best_theta), 0.0}};
  } else {
    summary.refined_argmax = summary.argmax_pair;
  }
  summary.canonical_attains_max =
      summary.refined_max <= 0.0
          ? true
          : std::abs(summary.canonical_value - summary.refined_max) <=
                0.01 * summary.refined_max;
  return summary;
}

MeasureReport build_report_impl(const MeasureInput& in, const PairParams& pair,
                                std::span<const double> eps) {
  MeasureReport report;
  report.kind = in.kind;
  report.pair = pair;
  report.blp = blp_impl(in, pair, BlpMode::direct);
  report.blp_formula_value = blp_impl(in, pair, BlpMode::formula).value;
  report.rhp_entanglement = rhp_entanglement_impl(in);
  report.rhp_divisibility = rhp_divisibility_impl(in);
  report.choi_route = choi_positive_intervals_impl(in, eps);
  report.equivalence = equivalence_report(
      report.blp.intervals, report.rhp_entanglement.intervals,
      report.choi_route, report.blp, report.rhp_entanglement,
      report.rhp_divisibility, in.grid->dt);
  return report;
}

}  // namespace

MeasureValue blp_measure(const GTrace& trace, const PairParams& pair,
                         BlpMode mode) {
  return blp_impl(make_input(trace), pair, mode);
}

MeasureValue blp_measure(const DephasingTrace& trace, const PairParams& pair,
                         BlpMode mode) {
  return blp_impl(make_input(trace), pair, mode);
}

MeasureValue rhp_entanglement_measure(const GTrace& trace) {
  return rhp_entanglement_impl(make_input(trace));
}

MeasureValue rhp_entanglement_measure(const DephasingTrace& trace) {
  return rhp_entanglement_impl(make_input(trace));
}

MeasureValue rhp_divisibility_measure(const GTrace& trace) {
  return rhp_divisibility_impl(make_input(trace));
}

MeasureValue rhp_divisibility_measure(const DephasingTrace& trace) {
  return rhp_divisibility_impl(make_input(trace));
}

double choi_g(ModelKind kind, double rate, double shift,
              std::span<const double> eps_schedule, ChoiReference reference) {
  if (eps_schedule.empty()) {
    throw DomainError("choi_g needs a non-empty epsilon schedule");
  }
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0) ||
        (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))) {
      throw DomainError("choi_g epsilon schedule must be positive and strictly decreasing");
    }
  }
  if (!std::isfinite(rate) || !std::isfinite(shift) ||
      std::abs(rate) >= kDivergentRateCap) {
    throw DivergentPointError("choi_g called with a divergent rate sample");
  }

  const int i0 = reference == ChoiReference::phi_plus ? 0 : 1;
  const int i1 = reference == ChoiReference::phi_plus ? 3 : 2;
  Eigen::Matrix4cd phi = Eigen::Matrix4cd::Zero();
  phi(i0, i0) = phi(i0, i1) = phi(i1, i0) = phi(i1, i1) = 0.5;
  const Eigen::Matrix4cd generated = apply_generator(kind, rate, shift, phi);

  double r_prev = 0.0, r_last = 0.0;
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    const double eps = eps_schedule[i];
    const Eigen::Matrix4cd m = phi + eps * generated;
    const double r = (trace_norm(m) - 1.0) / eps;
    r_prev = i == 0 ? r : r_last;
    r_last = r;
  }
  if (eps_schedule.size() == 1) return std::max(0.0, r_last);
  const double e_last = eps_schedule[eps_schedule.size() - 1];
  const double e_prev = eps_schedule[eps_schedule.size() - 2];
  const double extrapolated =
      r_last + (r_last - r_prev) * e_last / (e_prev - e_last);
  return std::max(0.0, extrapolated);
}

std::vector<double> scaled_epsilon_schedule(std::span<const double> base,
                                            double rate, double shift) {
  const double scale = std::max(1.0, std::abs(rate) + std::abs(shift));
  std::vector<double> out(base.begin(), base.end());
  for (double& e : out) e /= scale;
  return out;
}

std::vector<double> choi_curve(const GTrace& trace,
                               std::span<const double> eps_schedule) {
  return choi_curve_impl(make_input(trace), eps_schedule);
}

std::vector<double> choi_curve(const DephasingTrace& trace,
                               std::span<const double> eps_schedule) {
  return choi_curve_impl(make_input(trace), eps_schedule);
}

IntervalSet distance_increase_intervals(const GTrace& trace,
                                        const PairParams& pair) {
  return blp_measure(trace, pair, BlpMode::direct).intervals;
}

IntervalSet distance_increase_intervals(const DephasingTrace& trace,
                                        const PairParams& pair) {
  return blp_measure(trace, pair, BlpMode::direct).intervals;
}

IntervalSet concurrence_increase_intervals(const GTrace& trace) {
  const MeasureInput in = make_input(trace);
  return increase_intervals(in.conc, *in.grid);
}

IntervalSet concurrence_increase_intervals(const DephasingTrace& trace) {
  const MeasureInput in = make_input(trace);
  return increase_intervals(in.conc, *in.grid);
}

IntervalSet choi_positive_intervals(const GTrace& trace,
                                    std::span<const double> eps_schedule) {
  return choi_positive_intervals_impl(make_input(trace), eps_schedule);
}

IntervalSet choi_positive_intervals(const DephasingTrace& trace,
                                    std::span<const double> eps_schedule) {
  return choi_positive_intervals_impl(make_input(trace), eps_schedule);
}

EquivalenceResult equivalence_report(const IntervalSet& distance_route,
                                     const IntervalSet& concurrence_route,
                                     const IntervalSet& choi_route,
                                     const MeasureValue& blp,
                                     const MeasureValue& entanglement,
                                     const MeasureValue& divisibility,
                                     double dt) {
  EquivalenceResult result;
  const double d1 = interval_set_distance(distance_route, concurrence_route);
  const double d2 = interval_set_distance(distance_route, choi_route);
  const double d3 = interval_set_distance(concurrence_route, choi_route);
  result.interval_set_distance = std::max({d1, d2, d3});
  const bool counts_equal =
      distance_route.size() == concurrence_route.size() &&
      distance_route.size() == choi_route.size();
  result.sets_match =
      counts_equal && result.interval_set_distance <= 2.0 * dt;
  const bool p1 = blp.positive();
  const bool p2 = entanglement.positive();
  const bool p3 = divisibility.positive();
  result.positivity_agrees = (p1 == p2) && (p2 == p3);
  result.verdict = result.sets_match && result.positivity_agrees;
  return result;
}

SweepSummary pair_sweep(const GTrace& trace, std::size_t n_pairs,
                        std::uint64_t seed, std::size_t jobs) {
  return sweep_impl(make_input(trace), n_pairs, seed, jobs);
}

SweepSummary pair_sweep(const DephasingTrace& trace, std::size_t n_pairs,
                        std::uint64_t seed, std::size_t jobs) {
  return sweep_impl(make_input(trace), n_pairs, seed, jobs);
}

MeasureReport build_measure_report(const GTrace& trace, const PairParams& pair,
                                   std::span<const double> eps_schedule) {
  return build_report_impl(make_input(trace), pair, eps_schedule);
}

MeasureReport build_measure_report(const DephasingTrace& trace,
                                   const PairParams& pair,
                                   std::span<const double> eps_schedule) {
  return build_report_impl(make_input(trace), pair, eps_schedule);
}

}  // namespace nmq

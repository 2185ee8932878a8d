#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nmq/errors.hpp"
#include "nmq/jc.hpp"
#include "support/oracles.hpp"

using nmq::complexd;
using nmq::CorrelationKernel;
using nmq::DensityMatrix2;
using nmq::GTrace;
using nmq::SpectralDensityModel;
using nmq::TimeGrid;

namespace {

SpectralDensityModel lorentzian(double gamma0, double lambda = 1.0,
                                double delta = 0.0) {
  return SpectralDensityModel{nmq::LorentzianDensity{gamma0, lambda, delta}, 0.0};
}

GTrace solve_lorentzian(double gamma0, double t_max, double dt,
                        double delta = 0.0) {
  return nmq::solve_g(CorrelationKernel(lorentzian(gamma0, 1.0, delta)),
                      TimeGrid::from_step(t_max, dt));
}

double max_error_vs_closed(const GTrace& trace, double gamma0) {
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    worst = std::max(worst, std::abs(trace.g[k] - oracles::g_closed(
                                                      trace.grid.time(k), gamma0)));
  }
  return worst;
}

GTrace exponential_trace(double t_max, double dt) {
  GTrace trace;
  trace.grid = TimeGrid::from_step(t_max, dt);
  trace.g.resize(trace.grid.count);
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    trace.g[k] = std::exp(-0.5 * trace.grid.time(k));
  }
  return trace;
}

}  // namespace

TEST_CASE("closed-form oracle matches an independent RK4 integration") {
  // Validates the oracle itself before anything else relies on it.
  for (double gamma0 : {0.1, 10.0}) {
    const auto ref = oracles::g_reference_rk4(gamma0, 1.0, 0.0, 20.0, 1e-4);
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); k += 50) {
      worst = std::max(worst,
                       std::abs(ref[k] - oracles::g_closed(1e-4 * k, gamma0)));
    }
    CHECK(worst < 1e-8);
  }
  // Detuned variant as well, used by the cross-propagator checks.
  const auto ref = oracles::g_reference_rk4(10.0, 1.0, 3.0, 10.0, 1e-4);
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); k += 50) {
    worst = std::max(worst,
                     std::abs(ref[k] - oracles::g_closed(1e-4 * k, 10.0, 1.0, 3.0)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("zero kernel keeps G = 1") {
  const SpectralDensityModel silent{
      nmq::TabulatedDensity{{0.0, 1.0}, {0.0, 0.0}}, 0.0};
  const GTrace trace = nmq::solve_g(CorrelationKernel(silent),
                                    TimeGrid::from_step(2.0, 1e-3));
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    CHECK(std::abs(trace.g[k] - complexd{1.0, 0.0}) < 1e-14);
  }
}

TEST_CASE("Volterra solution matches the closed form") {
  CHECK(max_error_vs_closed(solve_lorentzian(0.1, 20.0, 1e-3), 0.1) < 1e-6);
  CHECK(max_error_vs_closed(solve_lorentzian(10.0, 20.0, 1e-3), 10.0) < 1e-6);
}

TEST_CASE("halving the step improves the error by the second-order factor") {
  const double coarse = max_error_vs_closed(solve_lorentzian(10.0, 5.0, 2e-3), 10.0);
  const double fine = max_error_vs_closed(solve_lorentzian(10.0, 5.0, 1e-3), 10.0);
  CHECK(coarse / fine >= 3.5);
}

TEST_CASE("strong coupling: |G| reaches its first zero where the oracle says") {
  const GTrace trace = solve_lorentzian(10.0, 2.0, 1e-3);
  std::size_t k_min = 0;
  for (std::size_t k = 1; k < trace.grid.count; ++k) {
    if (trace.abs_g(k) < trace.abs_g(k_min)) k_min = k;
  }
  CHECK(std::abs(trace.grid.time(k_min) - oracles::first_g_zero(10.0)) < 2e-3);
}

TEST_CASE("derive_rates on a pure exponential") {
  GTrace trace = nmq::derive_rates(exponential_trace(10.0, 1e-3));
  CHECK(trace.big_gamma[0] == 0.0);
  CHECK(trace.g[0] == complexd{1.0, 0.0});
  for (std::size_t k = 0; k < trace.grid.count; k += 37) {
    CHECK(std::abs(trace.gamma[k] - 1.0) < 2e-6);
    CHECK(std::abs(trace.lamb_shift[k]) < 2e-6);
    CHECK(std::abs(trace.big_gamma[k] - trace.grid.time(k)) < 2e-6);
  }
  CHECK(!trace.any_divergent());
}

TEST_CASE("gamma starts at zero for a smooth kernel") {
  const GTrace trace = nmq::derive_rates(solve_lorentzian(0.1, 1.0, 1e-3));
  CHECK(std::abs(trace.gamma[0]) < 1e-4);
}

TEST_CASE("rate consistency invariants") {
  for (double gamma0 : {0.1, 10.0}) {
    const GTrace trace =
        nmq::derive_rates(solve_lorentzian(gamma0, 8.0, 1e-3));
    const std::size_t n = trace.grid.count;

    // Gamma equals the cumulative trapezoid of gamma with the same frozen
    // panels across flagged samples.
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (!trace.divergent[k] && !trace.divergent[k + 1]) {
        acc += 0.5 * trace.grid.dt * (trace.gamma[k] + trace.gamma[k + 1]);
      }
      CHECK(std::abs(trace.big_gamma[k + 1] - acc) <=
            1e-8 * std::max(1.0, std::abs(acc)));
    }

    // |G| = e^{-Gamma/2} wherever the grid resolves the rate integral: after
    // the first flagged window Gamma is by construction a frozen lower
    // envelope, and a trapezoid cannot integrate the 1/|t - t*| spike
    // arbitrarily close to a zero of G, so the check covers the prefix up to
    // ten window radii before the first flag (all indices when nothing is
    // flagged).
    const std::size_t guard =
        static_cast<std::size_t>(10.0 * nmq::kRateResolutionFactor);
    const std::size_t first = trace.first_divergent();
    const std::size_t stop = first == n ? n : (first > guard ? first - guard : 0);
    for (std::size_t k = 0; k < stop; k += 3) {
      CHECK(std::abs(trace.abs_g(k) - std::exp(-0.5 * trace.big_gamma[k])) <
            1e-6);
    }
    CHECK(stop > n / 16);  // the scoped check still covers real data
  }
}

TEST_CASE("strong coupling flags the unresolvable window around the G zero") {
  const GTrace trace = nmq::derive_rates(solve_lorentzian(10.0, 2.0, 1e-3));
  CHECK(trace.any_divergent());
  const double t_flag = trace.grid.time(trace.first_divergent());
  const double t_zero = oracles::first_g_zero(10.0);
  CHECK(t_flag < t_zero);
  CHECK(t_zero - t_flag < (nmq::kRateResolutionFactor + 2.0) * trace.grid.dt);
  for (std::size_t k = 0; k < trace.grid.count; ++k) {
    if (trace.divergent[k]) {
      CHECK(std::abs(trace.gamma[k]) == nmq::kDivergentRateCap);
    }
  }
}

TEST_CASE("weak coupling and detuned strong coupling have no flags") {
  CHECK(!nmq::derive_rates(solve_lorentzian(0.1, 20.0, 1e-3)).any_divergent());
  CHECK(!nmq::derive_rates(solve_lorentzian(10.0, 10.0, 1e-3, 3.0)).any_divergent());
}

TEST_CASE("joint system-ancilla state") {
  GTrace trace = exponential_trace(2.0, 1e-3);
  const nmq::XState4 start = nmq::jc_joint_state(trace, 0);
  CHECK(nmq::concurrence_x(start) == doctest::Approx(1.0));
  CHECK(start.p10 == doctest::Approx(0.5));
  CHECK(start.p01 == doctest::Approx(0.5));

  trace.g[5] = complexd{0.0, 0.0};
  const nmq::XState4 dead = nmq::jc_joint_state(trace, 5);
  CHECK(nmq::concurrence_x(dead) == doctest::Approx(0.0));
  CHECK(dead.p00 == doctest::Approx(0.5));

  trace.g[7] = std::exp(-0.5);
  CHECK(nmq::concurrence_x(nmq::jc_joint_state(trace, 7)) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(nmq::jc_joint_state(trace, trace.grid.count), nmq::DomainError);
}

TEST_CASE("master equation: ground state is stationary") {
  const GTrace trace = nmq::derive_rates(solve_lorentzian(0.4, 5.0, 1e-3));
  const auto out = nmq::jc_propagate_master(trace, DensityMatrix2{0.0, 1.0, {}});
  CHECK(!out.truncated);
  for (const DensityMatrix2& rho : out.states) {
    CHECK(std::abs(rho.rho_gg - 1.0) < 1e-12);
    CHECK(std::abs(rho.rho_ee) < 1e-12);
  }
}

TEST_CASE("master equation: constant rate gives exponential decay") {
  const GTrace trace = nmq::derive_rates(exponential_trace(8.0, 1e-3));
  const auto out = nmq::jc_propagate_master(trace, DensityMatrix2{1.0, 0.0, {}});
  for (std::size_t k = 0; k < out.states.size(); k += 101) {
    CHECK(std::abs(out.states[k].rho_ee - std::exp(-trace.grid.time(k))) < 1e-5);
  }
}

TEST_CASE("master equation reproduces the element evolution") {
  const GTrace trace = nmq::derive_rates(solve_lorentzian(0.1, 20.0, 1e-3));
  const DensityMatrix2 plus{0.5, 0.5, complexd{0.5, 0.0}};
  const auto out = nmq::jc_propagate_master(trace, plus);
  REQUIRE(out.states.size() == trace.grid.count);
  for (std::size_t k = 0; k < trace.grid.count; k += 97) {
    CHECK(std::abs(out.states[k].rho_eg - 0.5 * trace.g[k]) < 1e-5);
    CHECK(std::abs(out.states[k].rho_ee - 0.5 * std::norm(trace.g[k])) < 1e-5);
    CHECK(std::abs(out.states[k].trace() - 1.0) < 1e-9);
    CHECK(out.states[k].det() > -1e-7);
    CHECK(out.states[k].rho_ee > -1e-7);
  }
}

TEST_CASE("propagation truncates at the first divergence flag") {
  const GTrace trace = nmq::derive_rates(solve_lorentzian(10.0, 2.0, 1e-3));
  const auto out = nmq::jc_propagate_master(trace, DensityMatrix2{1.0, 0.0, {}});
  CHECK(out.truncated);
  CHECK(out.truncated_at == trace.first_divergent());
  CHECK(out.states.size() == trace.first_divergent());
}

#pragma once

#include <cstddef>
#include <functional>

namespace nmq {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  // The interval is pre-split into this many equal panels before adaptive
  // refinement; callers dealing with oscillatory integrands size this so a
  // panel spans at most half an oscillation period.
  std::size_t initial_panels = 1;
  std::size_t max_panels = 200000;
};

// Globally adaptive Gauss-Kronrod (7,15) integration of f over [a, b].
// The panel with the largest error estimate is bisected until the summed
// error estimate drops below max(rel_tol * |integral|, abs_tol). Fully
// deterministic for a given integrand and options.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opts = {});

}  // namespace nmq

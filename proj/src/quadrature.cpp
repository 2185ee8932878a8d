#include "nmq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nmq/errors.hpp"

namespace nmq {
namespace {

// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights on the odd-index nodes. Values from QUADPACK dqk15.
constexpr double kNodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWeights[8] = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552592, 0.1690047266392679,  0.19035057806478542,
    0.20443294007529889, 0.20948214108472782};
constexpr double kGaussWeights[4] = {0.12948496616886969, 0.27970539148927664,
                                     0.3818300505051189, 0.41795918367346935};

struct Panel {
  double a, b;
  double value;
  double error;
};

Panel evaluate_panel(const std::function<double(double)>& f, double a,
                     double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = kWeights[7] * f(center);
  double gauss = kGaussWeights[3] * f(center);
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return Panel{a, b, kronrod, std::abs(kronrod - gauss)};
}

bool worse(const Panel& lhs, const Panel& rhs) {
  if (lhs.error != rhs.error) return lhs.error < rhs.error;
  return lhs.a > rhs.a;  // deterministic tie break
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opts) {
  if (!(b > a)) return 0.0;
  const std::size_t n0 = std::max<std::size_t>(1, opts.initial_panels);

  std::vector<Panel> heap;
  heap.reserve(n0 + 64);
  const double width = (b - a) / static_cast<double>(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    const double pa = a + width * static_cast<double>(i);
    const double pb = (i + 1 == n0) ? b : a + width * static_cast<double>(i + 1);
    heap.push_back(evaluate_panel(f, pa, pb));
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  double total = 0.0;
  double total_err = 0.0;
  for (const Panel& p : heap) {
    total += p.value;
    total_err += p.error;
  }

  while (heap.size() < opts.max_panels) {
    const double goal = std::max(opts.rel_tol * std::abs(total), opts.abs_tol);
    if (total_err <= goal) break;

    std::pop_heap(heap.begin(), heap.end(), worse);
    Panel worst = heap.back();
    heap.pop_back();
    if (!(worst.b - worst.a > 0.0) || worst.a + 0.5 * (worst.b - worst.a) <= worst.a) {
      heap.push_back(worst);  // interval at roundoff resolution
      std::push_heap(heap.begin(), heap.end(), worse);
      break;
    }

    const double mid = worst.a + 0.5 * (worst.b - worst.a);
    Panel left = evaluate_panel(f, worst.a, mid);
    Panel right = evaluate_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // Recompute the sum once at the end; the incremental total accumulates
  // cancellation noise over many refinements.
  total = 0.0;
  for (const Panel& p : heap) total += p.value;
  return total;
}

}  // namespace nmq

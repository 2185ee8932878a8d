#pragma once

#include <array>
#include <complex>

namespace nmq {

using complexd = std::complex<double>;

// Numerical tolerances for state validation.
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-12;
inline constexpr double kHermTol = 1e-9;
inline constexpr double kBlochTol = 1e-12;
// Loose trace tolerance accepted from numerically propagated states.
inline constexpr double kPropagatedTol = 1e-9;

// Qubit state in the basis {|1> (excited), |0> (ground)}.
// Hermiticity is structural: only the upper coherence <1|rho|0> is stored.
struct DensityMatrix2 {
  double rho_ee = 0.0;        // <1|rho|1>
  double rho_gg = 1.0;        // <0|rho|0>
  complexd rho_eg{0.0, 0.0};  // <1|rho|0>

  // Builds from a row-major 2x2 matrix {m00, m01, m10, m11}; throws
  // InvalidStateError if the matrix is not Hermitian within herm_tol.
  static DensityMatrix2 from_matrix(const std::array<complexd, 4>& m,
                                    double herm_tol = kHermTol);

  double trace() const { return rho_ee + rho_gg; }
  double det() const { return rho_ee * rho_gg - std::norm(rho_eg); }

  bool is_valid(double tol = kTraceTol) const;
  void require_valid(double tol = kTraceTol) const;  // throws InvalidStateError
};

// Two-qubit state of X form with a single inner coherence, in the basis
// {|11>, |10>, |01>, |00>} (system qubit first). This is the only shape the
// one-excitation and dephasing dynamics ever produce.
struct XState4 {
  double p11 = 0.0;           // <11|rho|11>
  double p10 = 0.0;           // <10|rho|10>
  double p01 = 0.0;           // <01|rho|01>
  double p00 = 1.0;           // <00|rho|00>
  complexd kappa{0.0, 0.0};   // <10|rho|01>

  bool is_valid(double tol = kTraceTol) const;
  void require_valid(double tol = kTraceTol) const;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Population difference a and coherence difference b of a state pair.
struct PairParams {
  double a = 0.0;
  complexd b{0.0, 0.0};

  bool is_degenerate(double tol = 1e-14) const;
};

// Trace distance between two qubit states, D = ||rho1 - rho2||_1 / 2.
// The difference is traceless Hermitian, so the closed form
// sqrt(delta^2 + |beta|^2) is exact (delta, beta = diagonal/off-diagonal
// elements of the difference).
double trace_distance(const DensityMatrix2& rho1, const DensityMatrix2& rho2);

// Concurrence of an X state with inner coherence only:
// C = max(0, 2(|kappa| - sqrt(p00 * p11))).
double concurrence_x(const XState4& rho);

// rho = (I + r . sigma) / 2; throws InvalidBlochError outside the unit ball.
DensityMatrix2 bloch_to_density(const BlochVector& r);

// a = <1|rho1|1> - <1|rho2|1>, b = <1|rho1|0> - <1|rho2|0>.
PairParams pair_to_ab(const DensityMatrix2& rho1, const DensityMatrix2& rho2);

}  // namespace nmq

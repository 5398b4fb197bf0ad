#ifndef HEUN2S_NUMERICS_HPP_
#define HEUN2S_NUMERICS_HPP_

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "heun2s/errors.hpp"

namespace heun2s {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// ---------------------------------------------------------------------------
// Lambert W, real branches 0 and -1.
//
// Halley iteration from a branch-appropriate initial guess.  Branch 0 is
// defined for x >= -1/e and returns w >= -1; branch -1 is defined for
// -1/e <= x < 0 and returns w <= -1.  Out-of-range arguments raise
// DomainError.
double lambert_w(int branch, double x);

// ---------------------------------------------------------------------------
// Polynomials with complex coefficients, ascending degree order.

struct ComplexPoly {
  CVector coeffs;  // coeffs[j] multiplies z^j

  ComplexPoly() = default;
  explicit ComplexPoly(CVector c) : coeffs(std::move(c)) {}

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  Complex eval(Complex z) const;
  ComplexPoly derivative() const;
  double max_abs_coeff() const;

  // Drops leading coefficients that are negligible relative to the largest
  // one, so degree() matches the effective degree.
  void normalize(double rel_tol = 1e-14);
};

// All roots with multiplicity, via the companion-matrix eigenvalues followed
// by Newton polishing.  Degree 0 raises std::invalid_argument.  Each returned
// root r satisfies |p(r)| <= 1e-10 * max|coeff| * max(1,|r|)^degree for the
// small degrees (<= ~12) this project needs.
std::vector<Complex> poly_roots(const ComplexPoly& p);

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) integration over complex state vectors.

struct OdeTrajectory {
  std::vector<double> times;    // strictly monotone
  std::vector<CVector> states;  // same length as times
  double est_error = 0.0;       // accumulated local error estimate
};

using OdeRhs = std::function<void(double t, const CVector& y, CVector& dydt)>;

// Integrates y' = rhs(t, y) from t0 to t1 (either direction).  If
// `dense_times` is non-empty the trajectory holds the states at exactly those
// times (they must lie between t0 and t1 and be sorted in the direction of
// integration); otherwise it holds every accepted step.  Step-size underflow
// raises SingularityError naming the time at which it happened.
OdeTrajectory integrate_ode(const OdeRhs& rhs, double t0, double t1,
                            const CVector& y0, double rtol, double atol,
                            std::span<const double> dense_times = {});

// ---------------------------------------------------------------------------
// Kummer confluent hypergeometric function 1F1(a; b; z).
//
// Taylor series with a term-ratio tail bound; the Kummer transformation
// 1F1(a;b;z) = e^z 1F1(b-a;b;-z) is applied for Re z < 0 to avoid
// cancellation.  Relative accuracy ~1e-12 for |z| <= 50.  b equal to a
// non-positive integer raises PoleError.
Complex kummer_1f1(Complex a, Complex b, Complex z);

}  // namespace heun2s

#endif  // HEUN2S_NUMERICS_HPP_

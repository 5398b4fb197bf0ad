#ifndef HEUN2S_HEUN_HPP_
#define HEUN2S_HEUN_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heun2s/numerics.hpp"

namespace heun2s {

// The three confluent reductions share the form
//   P(z) u'' + (gamma + delta z + epsilon z^2) u' + (alpha z - q) u = 0
// with P(z) = z^2 (double-confluent), z (bi-confluent) and 1 (tri-confluent).
enum class HeunFamily { DoubleConfluent, BiConfluent, TriConfluent };

const char* family_name(HeunFamily f);
Complex family_pz(HeunFamily f, Complex z);

struct HeunParams {
  HeunFamily family = HeunFamily::BiConfluent;
  Complex gamma{0.0}, delta{0.0}, epsilon{0.0}, alpha{0.0}, q{0.0};
};

struct HeunState {
  Complex u{0.0}, uz{0.0};
};

// Second derivative from the equation itself:
//   u'' = -[(gamma + delta z + epsilon z^2) u' + (alpha z - q) u] / P(z).
// Evaluation at a zero of P raises SingularityError.
Complex heun_uzz(const HeunParams& p, Complex z, Complex u, Complex uz);

// (u', u'') pair, the right-hand side of the first-order system for (u, u').
std::pair<Complex, Complex> heun_rhs(const HeunParams& p, Complex z,
                                     const HeunState& s);

// Third derivative obtained by differentiating the equation once.
Complex heun_uzzz(const HeunParams& p, Complex z, Complex u, Complex uz,
                  Complex uzz);

// ---------------------------------------------------------------------------
// Power-series solutions u = z^mu sum c_n z^n, c_0 = 1.
//
//   double:  gamma(n+mu) c_n + Q_{n-1} c_{n-1} + P_{n-2} c_{n-2} = 0,
//            Q_m = (m+mu)(m+mu+delta-1) - q,  P_m = alpha + epsilon(m+mu),
//            valid with mu = 0 (and gamma != 0); asymptotic, radius zero.
//   bi:      (n+mu)(n+mu-1+gamma) c_n + Q_{n-1} c_{n-1} + P_{n-2} c_{n-2} = 0,
//            Q_m = delta(m+mu) - q,  P_m = alpha + epsilon(m+mu),
//            mu in {0, 1-gamma}; convergent everywhere.
//   tri:     (n+mu)(n+mu-1) c_n + gamma(n-1+mu) c_{n-1}
//              + Q_{n-2} c_{n-2} + P_{n-3} c_{n-3} = 0,
//            Q_m = delta(m+mu) - q,  P_m = alpha + epsilon(m+mu),
//            mu = 1; convergent everywhere.

enum class SeriesKind { Convergent, Asymptotic, Terminated };

struct SeriesSolution {
  Complex mu{0.0};
  Complex nu0{0.0}, nu1{0.0};  // pre-exponents of the double-confluent ansatz
  std::vector<Complex> coeffs;
  SeriesKind classification = SeriesKind::Convergent;
  std::optional<int> termination_n;
};

// Coefficients c_0..c_nmax.  A vanishing leading recurrence coefficient at
// n >= 1 raises ResonanceError; an indicial exponent the family does not
// admit raises std::invalid_argument.
SeriesSolution series_coeffs(const HeunParams& p, Complex mu, int nmax);

// Values of q for which the series terminates at index N, given that the
// family's alpha-condition alpha + epsilon (N + mu) = 0 already holds
// (checked; ConstraintError otherwise).  For the tri-confluent family both
// c_{N+1} = 0 and c_{N+2} = 0 are imposed and the list may be empty.
std::vector<Complex> termination_conditions(const HeunParams& p_without_q,
                                            int N, Complex mu);

// Direct summation of a stored series at z (principal branch for z^mu).
// Summing a non-terminated asymptotic series raises ClassificationError.
HeunState eval_series(const SeriesSolution& s, Complex z);

// ---------------------------------------------------------------------------
// Canonical evaluation.
//
//   bi:     the Frobenius solution with mu = 0, c_0 = 1, summed from the
//           origin, continued by integration of heun_rhs for large |z|.
//   tri:    the mu = 1 series (u(0) = 0, u'(0) = 1), same continuation.
//   double: the solution normalized to u = 1, u' = 0 at the anchor z = 1,
//           carried to z_target by integration along [1, waypoints...,
//           z_target]; the path must keep clear of z = 0.
HeunState eval_heun(const HeunParams& p, Complex z_target,
                    std::span<const Complex> waypoints = {},
                    double tol = 1e-12);

// Continuation of arbitrary initial data along a straight-segment path.
HeunState eval_heun_from(const HeunParams& p, Complex z_from,
                         const HeunState& y_from, Complex z_target,
                         std::span<const Complex> waypoints = {},
                         double tol = 1e-12);

// ---------------------------------------------------------------------------
// Derivative-function equations.
//
// For suitable parameter constraints, weighted first derivatives of Heun
// solutions obey second-order equations with rational coefficients:
//   tri:    v = e^{gamma z} u',  requires q = 0 and alpha + epsilon =
//           gamma*delta;
//   bi:     v = z^sigma u',      requires sigma = gamma + delta z0 +
//           epsilon z0^2 and (alpha+epsilon) z0 = (delta + 2 epsilon z0)
//           sigma, z0 = q/alpha;
//   double: v = e^{-sigma/z} u', requires alpha = -epsilon, q = delta/2,
//           sigma = gamma - delta^2/(4 epsilon), z0 = q/alpha.
// Returns the absolute residual of the corresponding equation at z, with
// (u, u', u'') taken from eval_heun + heun_rhs.  Constraint violations
// beyond 1e-10 raise ConstraintError.
double derivative_equation_check(HeunFamily family, const HeunParams& p,
                                 Complex z0, Complex sigma, Complex z);

}  // namespace heun2s

#endif  // HEUN2S_HEUN_HPP_

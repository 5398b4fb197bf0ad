#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "heun2s/heun.hpp"

using namespace heun2s;
using namespace std::complex_literals;

namespace {

// Residual of P(z) u'' + (gamma + delta z + eps z^2) u' + (alpha z - q) u
// with u, u', u'' summed directly from stored series coefficients (mu = 0).
double equation_residual_poly(const HeunParams& p, const SeriesSolution& s,
                              Complex z) {
  Complex u = 0.0, uz = 0.0, uzz = 0.0;
  Complex zp = 1.0;
  for (size_t n = 0; n < s.coeffs.size(); ++n) {
    const double nd = static_cast<double>(n);
    u += s.coeffs[n] * zp;
    if (n >= 1) uz += s.coeffs[n] * nd * zp / z;
    if (n >= 2) uzz += s.coeffs[n] * nd * (nd - 1.0) * zp / (z * z);
    zp *= z;
  }
  const Complex res = family_pz(p.family, z) * uzz +
                      (p.gamma + p.delta * z + p.epsilon * z * z) * uz +
                      (p.alpha * z - p.q) * u;
  return std::abs(res);
}

}  // namespace

TEST_CASE("heun_rhs: trivial and hand-substituted cases") {
  // tri, all params zero: u'' = 0
  HeunParams tri{HeunFamily::TriConfluent, 0.0, 0.0, 0.0, 0.0, 0.0};
  auto [uz, uzz] = heun_rhs(tri, 0.3 + 0.1i, {1.0, 0.0});
  CHECK(uz == Complex(0.0));
  CHECK(uzz == Complex(0.0));

  // bi with gamma = 1 at z = 1, state (1,1): u'' = -(1*1)/1 = -1
  HeunParams bi{HeunFamily::BiConfluent, 1.0, 0.0, 0.0, 0.0, 0.0};
  auto r2 = heun_rhs(bi, 1.0, {1.0, 1.0});
  CHECK(r2.first == Complex(1.0));
  CHECK(std::abs(r2.second - Complex(-1.0)) < 1e-15);

  // double with the constant-amplitude exp-family parameters
  // (gamma, delta, eps, alpha, q) = (-i d2, 1 - i d1, -i d0, 0, -U0^2):
  // at z = 1 with state (1, 0), u'' = q u = -U0^2.
  const double U0 = 3.0;
  HeunParams dbl{HeunFamily::DoubleConfluent, -1.0i, 1.0 - 1.0i, -1.0i, 0.0,
                 -U0 * U0};
  auto r3 = heun_rhs(dbl, 1.0, {1.0, 0.0});
  CHECK(std::abs(r3.second - Complex(-U0 * U0)) < 1e-13);

  CHECK_THROWS_AS(heun_rhs(dbl, 0.0, {1.0, 0.0}), SingularityError);
  CHECK_THROWS_AS(heun_rhs(bi, 0.0, {1.0, 0.0}), SingularityError);
}

TEST_CASE("series_coeffs: first coefficients match hand expansion") {
  // bi with q = delta = 0: c1 = (delta mu - q)/R1 = 0
  HeunParams bi{HeunFamily::BiConfluent, 0.7, 0.0, 0.3, -0.3, 0.0};
  auto s = series_coeffs(bi, 0.0, 6);
  CHECK(std::abs(s.coeffs[1]) < 1e-15);

  // double with the Eq.-(31)-style parameters at U0 = 1, d0 = d1 = d2 = 1:
  // c1 = q/gamma = (-1)/(-i) = -i  (hand expansion of the recurrence at n=1)
  HeunParams dbl{HeunFamily::DoubleConfluent, -1.0i, 1.0 - 1.0i, -1.0i, 0.0,
                 -1.0};
  auto sd = series_coeffs(dbl, 0.0, 6);
  CHECK(std::abs(sd.coeffs[1] - Complex(0.0, -1.0)) < 1e-15);
  CHECK(sd.classification == SeriesKind::Asymptotic);

  // tri with mu = 1: S1 = 2, c1 = -gamma*mu/S1 = -gamma/2
  HeunParams tri{HeunFamily::TriConfluent, 0.8 + 0.2i, 0.4, -0.6, 0.0, 0.9};
  auto st = series_coeffs(tri, 1.0, 6);
  CHECK(std::abs(st.coeffs[1] - (-tri.gamma / 2.0)) < 1e-15);
  CHECK(st.classification == SeriesKind::Convergent);
}

TEST_CASE("series_coeffs: recurrence exactness for all families") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  auto rc = [&] { return Complex(u(rng), u(rng)); };
  for (int rep = 0; rep < 8; ++rep) {
    HeunParams pd{HeunFamily::DoubleConfluent, rc() + 2.0, rc(), rc(), rc(), rc()};
    HeunParams pb{HeunFamily::BiConfluent, rc() + 2.5, rc(), rc(), rc(), rc()};
    HeunParams pt{HeunFamily::TriConfluent, rc(), rc(), rc(), rc(), rc()};
    for (const auto& [p, mu] :
         {std::pair{pd, Complex(0.0)}, {pb, Complex(0.0)}, {pt, Complex(1.0)}}) {
      auto s = series_coeffs(p, mu, 24);
      double maxc = 0.0;
      for (const auto& c : s.coeffs) maxc = std::max(maxc, std::abs(c));
      for (int n = 1; n <= 24; ++n) {
        const auto idx = [&](int m) { return mu + static_cast<double>(m); };
        Complex res;
        const auto c = [&](int m) {
          return (m >= 0) ? s.coeffs[m] : Complex(0.0);
        };
        if (p.family == HeunFamily::DoubleConfluent) {
          res = p.gamma * idx(n) * c(n) +
                (idx(n - 1) * (idx(n - 1) + p.delta - 1.0) - p.q) * c(n - 1) +
                (p.alpha + p.epsilon * idx(n - 2)) * c(n - 2);
        } else if (p.family == HeunFamily::BiConfluent) {
          res = idx(n) * (idx(n) - 1.0 + p.gamma) * c(n) +
                (p.delta * idx(n - 1) - p.q) * c(n - 1) +
                (p.alpha + p.epsilon * idx(n - 2)) * c(n - 2);
        } else {
          res = idx(n) * (idx(n) - 1.0) * c(n) + p.gamma * idx(n - 1) * c(n - 1) +
                (p.delta * idx(n - 2) - p.q) * c(n - 2) +
                (p.alpha + p.epsilon * idx(n - 3)) * c(n - 3);
        }
        CHECK(std::abs(res) <= 1e-12 * std::max(1.0, maxc));
      }
    }
  }
}

TEST_CASE("series_coeffs: resonance and invalid exponents") {
  // bi with gamma = 0 makes R_1 vanish on the mu = 0 branch
  HeunParams bi{HeunFamily::BiConfluent, 0.0, 0.4, 0.2, 0.1, 0.3};
  CHECK_THROWS_AS(series_coeffs(bi, 0.0, 10), ResonanceError);
  // bi with gamma = -2: mu = 0 hits R_3 = 3*(3-1-2) = 0
  HeunParams bi2{HeunFamily::BiConfluent, -2.0, 0.4, 0.2, 0.1, 0.3};
  CHECK_THROWS_AS(series_coeffs(bi2, 0.0, 10), ResonanceError);
  // ... while the larger exponent mu = 1 - gamma = 3 works
  CHECK_NOTHROW(series_coeffs(bi2, 3.0, 10));
  // invalid indicial exponents
  CHECK_THROWS_AS(series_coeffs(bi, 0.37, 10), std::invalid_argument);
  HeunParams tri{HeunFamily::TriConfluent, 0.2, 0.4, 0.2, 0.1, 0.3};
  CHECK_THROWS_AS(series_coeffs(tri, 0.0, 10), std::invalid_argument);
  HeunParams dbl{HeunFamily::DoubleConfluent, 1.0, 0.4, 0.2, 0.1, 0.3};
  CHECK_THROWS_AS(series_coeffs(dbl, 1.0, 10), std::invalid_argument);
}

TEST_CASE("termination_conditions: bi N=1 reduces to q^2 - delta q - alpha gamma") {
  // Hand expansion of the recurrence with mu = 0:
  //   c1 = q/gamma, and c2 = 0 <=> (delta - q) q / gamma + alpha = 0.
  const Complex gamma = 0.5, delta = -0.3i, eps = -0.7i;
  HeunParams p{HeunFamily::BiConfluent, gamma, delta, eps, -eps, 0.0};
  auto qs = termination_conditions(p, 1, 0.0);
  REQUIRE(qs.size() == 2);
  for (const auto& q : qs) {
    const Complex quad = q * q - delta * q - p.alpha * gamma;
    CHECK(std::abs(quad) < 1e-10);
    // recomputing the recurrence gives c2 = c3 = 0 and a valid terminated tag
    HeunParams pq = p;
    pq.q = q;
    auto s = series_coeffs(pq, 0.0, 8);
    CHECK(s.classification == SeriesKind::Terminated);
    CHECK(*s.termination_n <= 1);
    CHECK(std::abs(s.coeffs[2]) < 1e-12);
    CHECK(std::abs(s.coeffs[3]) < 1e-12);
  }
}

TEST_CASE("termination_conditions: double N=1 quadratic and quasi-polynomial residual") {
  const Complex gamma = 0.9 + 0.1i, delta = 0.4, eps = 0.6 - 0.2i;
  HeunParams p{HeunFamily::DoubleConfluent, gamma, delta, eps, -eps, 0.0};
  auto qs = termination_conditions(p, 1, 0.0);
  REQUIRE(qs.size() == 2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (const auto& q : qs) {
    // same quadratic as the bi case: hand expansion gives
    // (delta - q) q / gamma + alpha = 0 at mu = 0
    CHECK(std::abs(q * q - delta * q - p.alpha * gamma) < 1e-10);
    HeunParams pq = p;
    pq.q = q;
    auto s = series_coeffs(pq, 0.0, 8);
    CHECK(s.classification == SeriesKind::Terminated);
    for (int k = 0; k < 10; ++k) {
      Complex z{u(rng), u(rng)};
      if (std::abs(z) < 0.2) z += 0.5;
      CHECK(equation_residual_poly(pq, s, z) < 1e-10);
    }
  }
}

TEST_CASE("termination_conditions: tri joint conditions may leave no q") {
  // generic parameters: the two polynomial conditions c_{N+1} = c_{N+2} = 0
  // rarely share a root
  HeunParams p{HeunFamily::TriConfluent, 0.8, 0.5, -0.6, 0.0, 0.0};
  p.alpha = -p.epsilon * (1.0 + 1.0);  // N = 1, mu = 1
  auto qs = termination_conditions(p, 1, 1.0);
  CHECK(qs.empty());
}

TEST_CASE("termination_conditions: precondition on alpha is enforced") {
  HeunParams p{HeunFamily::BiConfluent, 0.5, 0.1, -0.7i, 0.3, 0.0};
  CHECK_THROWS_AS(termination_conditions(p, 1, 0.0), ConstraintError);
}

TEST_CASE("double-confluent series: generic parameters diverge") {
  // |c_{2n}/c_n| must exceed 10 for some n <= 60 -- the testable form of the
  // zero convergence radius
  HeunParams p{HeunFamily::DoubleConfluent, 1.0 + 0.3i, 0.7, 0.4 - 0.2i, 0.9,
               0.8};
  auto s = series_coeffs(p, 0.0, 120);
  bool grows = false;
  for (int n = 1; n <= 60; ++n) {
    const double cn = std::abs(s.coeffs[n]);
    if (cn > 0 && std::abs(s.coeffs[2 * n]) / cn > 10.0) {
      grows = true;
      break;
    }
  }
  CHECK(grows);
  // and direct summation of such a series is refused
  CHECK_THROWS_AS(eval_series(s, 0.5), ClassificationError);
}

TEST_CASE("eval_heun: bi at origin returns (1, c1)") {
  HeunParams p{HeunFamily::BiConfluent, 0.8 + 0.1i, 0.3, -0.4i, 0.25, 0.6};
  const auto s = eval_heun(p, 0.0);
  CHECK(std::abs(s.u - 1.0) < 1e-15);
  CHECK(std::abs(s.uz - p.q / p.gamma) < 1e-15);  // c1 = q/gamma at mu = 0
}

TEST_CASE("eval_heun: tri with zero parameters is linear") {
  HeunParams p{HeunFamily::TriConfluent, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (double x : {0.0, 0.5, 2.0, 5.5}) {
    const auto s = eval_heun(p, x);
    CHECK(std::abs(s.u - x) < 1e-12 * std::max(1.0, x));
    CHECK(std::abs(s.uz - 1.0) < 1e-12);
  }
}

TEST_CASE("eval_heun: series and ODE continuation agree (bi and tri)") {
  HeunParams pb{HeunFamily::BiConfluent, 0.9, 0.2 - 0.1i, -0.5i, 0.4, 0.3};
  HeunParams pt{HeunFamily::TriConfluent, 0.3, -0.2, 0.4i, 0.25, -0.6};
  for (const auto& p : {pb, pt}) {
    const Complex mu = (p.family == HeunFamily::TriConfluent) ? 1.0 : 0.0;
    for (Complex z : {Complex(1.7), Complex(0.4, 1.1), Complex(-1.3, 0.6)}) {
      const auto direct = eval_heun(p, z);
      // independent route: series data at a nearby small anchor, then the
      // integrator carries it to z
      const Complex za = 0.3 * z / std::abs(z);
      auto s = series_coeffs(p, mu, 80);
      const auto y0 = eval_series(s, za);
      const auto cont = eval_heun_from(p, za, y0, z, {}, 1e-13);
      CHECK(std::abs(cont.u - direct.u) <=
            1e-9 * std::max(1.0, std::abs(direct.u)));
      CHECK(std::abs(cont.uz - direct.uz) <=
            1e-9 * std::max(1.0, std::abs(direct.uz)));
    }
  }
}

TEST_CASE("eval_heun: double-confluent path evaluation is path independent") {
  HeunParams p{HeunFamily::DoubleConfluent, -1.0i, 1.0 - 1.0i, -1.0i, 0.0, -9.0};
  const Complex target = 2.5 + 1.5i;
  const auto direct = eval_heun(p, target, {}, 1e-12);
  const std::vector<Complex> detour{Complex(1.0, 2.0), Complex(2.0, 2.5)};
  const auto via = eval_heun(p, target, detour, 1e-12);
  CHECK(std::abs(direct.u - via.u) <= 1e-9 * std::max(1.0, std::abs(direct.u)));
  CHECK(std::abs(direct.uz - via.uz) <=
        1e-9 * std::max(1.0, std::abs(direct.uz)));
  // residual check against the equation itself
  const Complex uzz = heun_uzz(p, target, direct.u, direct.uz);
  const Complex res = target * target * uzz +
                      (p.gamma + p.delta * target + p.epsilon * target * target) *
                          direct.uz +
                      (p.alpha * target - p.q) * direct.u;
  CHECK(std::abs(res) < 1e-8 * std::max(1.0, std::abs(direct.u)));
}

TEST_CASE("eval_heun: double path through the origin is rejected") {
  HeunParams p{HeunFamily::DoubleConfluent, -1.0i, 1.0, -1.0i, 0.0, -1.0};
  CHECK_THROWS_AS(eval_heun(p, -2.0), SingularityError);  // segment 1 -> -2
}

TEST_CASE("hypergeometric reduction: double-confluent with gamma = q = 0") {
  // z u'' + (delta + eps z) u' + alpha u = 0 is Kummer's equation in
  // x = -eps z; the two-solution combination matched to the anchor data of
  // eval_heun must agree on a grid.
  const Complex delta = 0.6, eps = 0.8, alpha = -0.5;
  HeunParams p{HeunFamily::DoubleConfluent, 0.0, delta, eps, alpha, 0.0};
  const Complex a = alpha / eps;
  auto u1 = [&](Complex z) { return kummer_1f1(a, delta, -eps * z); };
  auto du1 = [&](Complex z) {
    return -alpha / delta * kummer_1f1(a + 1.0, delta + 1.0, -eps * z);
  };
  auto u2 = [&](Complex z) {
    return std::pow(z, 1.0 - delta) *
           kummer_1f1(a - delta + 1.0, 2.0 - delta, -eps * z);
  };
  auto du2 = [&](Complex z) {
    const Complex ah = a - delta + 1.0, bh = 2.0 - delta;
    return (1.0 - delta) * std::pow(z, -delta) * kummer_1f1(ah, bh, -eps * z) +
           std::pow(z, 1.0 - delta) * ah / bh * (-eps) *
               kummer_1f1(ah + 1.0, bh + 1.0, -eps * z);
  };
  // match A u1 + B u2 = 1, A u1' + B u2' = 0 at z = 1
  const Complex w = u1(1.0) * du2(1.0) - du1(1.0) * u2(1.0);
  const Complex A = du2(1.0) / w, B = -du1(1.0) / w;
  for (double x = 0.3; x <= 3.01; x += 0.3) {
    const auto got = eval_heun(p, x, {}, 1e-13);
    const Complex want = A * u1(x) + B * u2(x);
    CHECK(std::abs(got.u - want) <= 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("hypergeometric reduction: bi-confluent with eps = alpha = 0") {
  // the mu = 0 Frobenius solution equals 1F1(-q/delta; gamma; -delta z)
  const Complex gamma = 1.3, delta = 0.7 - 0.2i, q = 0.45;
  HeunParams p{HeunFamily::BiConfluent, gamma, delta, 0.0, 0.0, q};
  for (double x = 0.0; x <= 2.01; x += 0.25) {
    const auto got = eval_heun(p, x);
    const Complex want = kummer_1f1(-q / delta, gamma, -delta * x);
    CHECK(std::abs(got.u - want) <= 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("derivative_equation_check: tri class") {
  // gamma = i d0, delta = -i d1, eps = -i d2, alpha = d0 d1 + i d2, q = 0
  const double d0 = 1.1, d1 = -0.4, d2 = -0.8;
  HeunParams p{HeunFamily::TriConfluent, 1.0i * d0, -1.0i * d1, -1.0i * d2,
               d0 * d1 + 1.0i * d2, 0.0};
  for (double z = 0.3; z <= 2.0; z += 0.4)
    CHECK(derivative_equation_check(HeunFamily::TriConfluent, p, 0.0, 0.0, z) <
          1e-8);
  // gamma = 0 degeneracy: v = u' and the residual reduces to the
  // differentiated equation
  HeunParams p0{HeunFamily::TriConfluent, 0.0, -1.0i * d1, -1.0i * d2,
                -1.0i * d2, 0.0};
  // alpha + eps = gamma delta = 0 -> alpha = -eps
  p0.alpha = -p0.epsilon;
  CHECK(derivative_equation_check(HeunFamily::TriConfluent, p0, 0.0, 0.0, 0.7) <
        1e-8);
  // constraint violation
  HeunParams bad = p;
  bad.q = 0.3;
  CHECK_THROWS_AS(
      derivative_equation_check(HeunFamily::TriConfluent, bad, 0.0, 0.0, 0.7),
      ConstraintError);
}

TEST_CASE("derivative_equation_check: bi class (constant-amplitude family)") {
  // d1 = 0, d2 = -d0, z0 = -1: sigma = -2 i d0, and the Heun parameters
  // follow the derivative-class mapping
  const double d0 = 1.0;
  const Complex z0 = -1.0;
  const Complex sigma = 1.0i * (0.0 + d0 * z0 + (-d0) * z0 * z0);
  HeunParams p{HeunFamily::BiConfluent, -1.0i * 0.0 + 2.0 * sigma, -1.0i * d0,
               1.0i * d0, 0.0, 0.0};
  p.alpha = 1.0i * (-d0) * (1.0 - 2.0 * sigma) - 1.0i * d0 * sigma / z0;
  p.q = p.alpha * z0;
  for (double z = 0.4; z <= 2.0; z += 0.4)
    CHECK(derivative_equation_check(HeunFamily::BiConfluent, p, z0, sigma, z) <
          1e-8);
  CHECK_THROWS_AS(derivative_equation_check(HeunFamily::BiConfluent, p, z0,
                                            sigma + 0.1, 0.9),
                  ConstraintError);
}

TEST_CASE("derivative_equation_check: double class") {
  // d's real; alpha = i d0, q = -i d1 / 2, sigma = i(d2 - d1^2/(4 d0))
  const double d0 = 2.0, d1 = -4.0, d2 = -2.0;
  const Complex sigma = 1.0i * (d2 - d1 * d1 / (4.0 * d0));
  const Complex z0 = -d1 / (2.0 * d0);
  HeunParams p{HeunFamily::DoubleConfluent, -1.0i * d2 + 2.0 * sigma,
               -1.0i * d1, -1.0i * d0, 1.0i * d0, -1.0i * d1 / 2.0};
  for (double z = 0.5; z <= 2.4; z += 0.45) {
    if (std::abs(z - z0.real()) < 0.15) continue;  // keep clear of z = z0
    CHECK(derivative_equation_check(HeunFamily::DoubleConfluent, p, z0, sigma,
                                    z) < 1e-7);
  }
}

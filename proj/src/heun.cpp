#include "heun2s/heun.hpp"

#include <algorithm>
#include <cmath>

namespace heun2s {

const char* family_name(HeunFamily f) {
  switch (f) {
    case HeunFamily::DoubleConfluent: return "double";
    case HeunFamily::BiConfluent: return "bi";
    case HeunFamily::TriConfluent: return "tri";
  }
  return "?";
}

Complex family_pz(HeunFamily f, Complex z) {
  switch (f) {
    case HeunFamily::DoubleConfluent: return z * z;
    case HeunFamily::BiConfluent: return z;
    case HeunFamily::TriConfluent: return 1.0;
  }
  return 1.0;
}

Complex heun_uzz(const HeunParams& p, Complex z, Complex u, Complex uz) {
  const Complex pz = family_pz(p.family, z);
  if (std::abs(pz) == 0.0)
    throw SingularityError(std::string(family_name(p.family)) +
                               "-confluent equation evaluated at its singular "
                               "point z = 0",
                           0.0);
  const Complex a = p.gamma + p.delta * z + p.epsilon * z * z;
  const Complex b = p.alpha * z - p.q;
  return -(a * uz + b * u) / pz;
}

std::pair<Complex, Complex> heun_rhs(const HeunParams& p, Complex z,
                                     const HeunState& s) {
  return {s.uz, heun_uzz(p, z, s.u, s.uz)};
}

Complex heun_uzzz(const HeunParams& p, Complex z, Complex u, Complex uz,
                  Complex uzz) {
  const Complex pz = family_pz(p.family, z);
  if (std::abs(pz) == 0.0)
    throw SingularityError("third derivative requested at singular point", 0.0);
  Complex pprime = 0.0;
  if (p.family == HeunFamily::DoubleConfluent) pprime = 2.0 * z;
  if (p.family == HeunFamily::BiConfluent) pprime = 1.0;
  const Complex a = p.gamma + p.delta * z + p.epsilon * z * z;
  const Complex ap = p.delta + 2.0 * p.epsilon * z;
  const Complex b = p.alpha * z - p.q;
  return -((pprime + a) * uzz + (ap + b) * uz + p.alpha * u) / pz;
}

// ---------------------------------------------------------------------------
// Series machinery

namespace {

// Leading recurrence coefficient at index n for the given family.
Complex leading_coeff(const HeunParams& p, Complex mu, int n) {
  const Complex nm = mu + static_cast<double>(n);
  switch (p.family) {
    case HeunFamily::DoubleConfluent: return p.gamma * nm;
    case HeunFamily::BiConfluent: return nm * (nm - 1.0 + p.gamma);
    case HeunFamily::TriConfluent: return nm * (nm - 1.0);
  }
  return 0.0;
}

void check_leading(const HeunParams& p, Complex mu, int n, Complex rn) {
  const double scale =
      (std::abs(mu) + n + std::abs(p.gamma) + 1.0) * (std::abs(mu) + n + 1.0);
  if (std::abs(rn) <= 1e-12 * scale)
    throw ResonanceError(std::string(family_name(p.family)) +
                         "-confluent recurrence: leading coefficient vanishes "
                         "at n = " +
                         std::to_string(n) +
                         " (logarithmic case or invalid indicial exponent)");
}

void validate_mu(const HeunParams& p, Complex mu) {
  switch (p.family) {
    case HeunFamily::DoubleConfluent:
      if (std::abs(mu) > 1e-12)
        throw std::invalid_argument(
            "double-confluent series is left-terminated only for mu = 0");
      break;
    case HeunFamily::BiConfluent: {
      const Complex indicial = mu * (mu - 1.0 + p.gamma);
      const double scale = (1.0 + std::abs(mu)) * (1.0 + std::abs(mu) + std::abs(p.gamma));
      if (std::abs(indicial) > 1e-10 * scale)
        throw std::invalid_argument(
            "bi-confluent series requires mu = 0 or mu = 1 - gamma");
      break;
    }
    case HeunFamily::TriConfluent:
      if (std::abs(mu - 1.0) > 1e-12)
        throw std::invalid_argument("tri-confluent series requires mu = 1");
      break;
  }
}

// c_n as a function of c_{n-1}, c_{n-2}, c_{n-3}.  For double/bi only the
// first two enter; for tri all three do.
Complex next_coeff(const HeunParams& p, Complex mu, int n, Complex cm1,
                   Complex cm2, Complex cm3) {
  const auto idx = [&](int m) { return mu + static_cast<double>(m); };
  const Complex rn = leading_coeff(p, mu, n);
  check_leading(p, mu, n, rn);
  switch (p.family) {
    case HeunFamily::DoubleConfluent: {
      const Complex qn1 = idx(n - 1) * (idx(n - 1) + p.delta - 1.0) - p.q;
      const Complex pn2 = p.alpha + p.epsilon * idx(n - 2);
      return -(qn1 * cm1 + pn2 * cm2) / rn;
    }
    case HeunFamily::BiConfluent: {
      const Complex qn1 = p.delta * idx(n - 1) - p.q;
      const Complex pn2 = p.alpha + p.epsilon * idx(n - 2);
      return -(qn1 * cm1 + pn2 * cm2) / rn;
    }
    case HeunFamily::TriConfluent: {
      const Complex rn1 = p.gamma * idx(n - 1);
      const Complex qn2 = p.delta * idx(n - 2) - p.q;
      const Complex pn3 = p.alpha + p.epsilon * idx(n - 3);
      return -(rn1 * cm1 + qn2 * cm2 + pn3 * cm3) / rn;
    }
  }
  return 0.0;
}

}  // namespace

SeriesSolution series_coeffs(const HeunParams& p, Complex mu, int nmax) {
  if (nmax < 1) throw std::invalid_argument("series_coeffs: nmax must be >= 1");
  validate_mu(p, mu);

  SeriesSolution s;
  s.mu = mu;
  s.coeffs.resize(nmax + 1);
  s.coeffs[0] = 1.0;
  for (int n = 1; n <= nmax; ++n) {
    const Complex cm1 = s.coeffs[n - 1];
    const Complex cm2 = (n >= 2) ? s.coeffs[n - 2] : Complex(0.0);
    const Complex cm3 = (n >= 3) ? s.coeffs[n - 3] : Complex(0.0);
    s.coeffs[n] = next_coeff(p, mu, n, cm1, cm2, cm3);
  }

  s.classification = (p.family == HeunFamily::DoubleConfluent)
                         ? SeriesKind::Asymptotic
                         : SeriesKind::Convergent;

  double maxc = 0.0;
  for (const auto& c : s.coeffs) maxc = std::max(maxc, std::abs(c));
  int last = 0;
  for (int n = 0; n <= nmax; ++n)
    if (std::abs(s.coeffs[n]) > 1e-13 * maxc) last = n;
  if (last <= nmax - 4) {
    s.classification = SeriesKind::Terminated;
    s.termination_n = last;
    for (int n = last + 1; n <= nmax; ++n) s.coeffs[n] = 0.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Termination conditions: c_{N+1}(q) = 0 (and c_{N+2}(q) = 0 for tri) as
// polynomial equations in q, solved by poly_roots.

namespace {

using QPoly = CVector;  // polynomial in q, ascending

QPoly qpoly_scale_add(const QPoly& a, Complex fa, const QPoly& b, Complex fb) {
  QPoly out(std::max(a.size(), b.size()), Complex(0.0));
  for (size_t j = 0; j < a.size(); ++j) out[j] += fa * a[j];
  for (size_t j = 0; j < b.size(); ++j) out[j] += fb * b[j];
  return out;
}

// out = base - q * c  (the "- q c_{n-k}" contribution of Q_m = A_m - q)
void qpoly_sub_qtimes(QPoly& base, const QPoly& c) {
  if (base.size() < c.size() + 1) base.resize(c.size() + 1, Complex(0.0));
  for (size_t j = 0; j < c.size(); ++j) base[j + 1] -= c[j];
}

}  // namespace

std::vector<Complex> termination_conditions(const HeunParams& p_in, int N,
                                            Complex mu) {
  if (N < 0) throw std::invalid_argument("termination_conditions: N >= 0");
  HeunParams p = p_in;
  validate_mu(p, mu);

  const Complex acond = p.alpha + p.epsilon * (mu + static_cast<double>(N));
  const double ascale =
      1.0 + std::abs(p.epsilon) * (std::abs(mu) + N) + std::abs(p.alpha);
  if (std::abs(acond) > 1e-10 * ascale)
    throw ConstraintError(
        "termination_conditions: alpha + epsilon (N + mu) = 0 must hold "
        "before q can be solved for");

  const auto idx = [&](int m) { return mu + static_cast<double>(m); };
  const int top = N + 2;  // need c_{N+1}; tri additionally c_{N+2}
  std::vector<QPoly> c(top + 1);
  c[0] = {Complex(1.0)};
  for (int n = 1; n <= top; ++n) {
    const Complex rn = leading_coeff(p, mu, n);
    check_leading(p, mu, n, rn);
    QPoly acc;
    if (p.family == HeunFamily::TriConfluent) {
      const Complex rn1 = p.gamma * idx(n - 1);
      const Complex qa = p.delta * idx(n - 2);
      const QPoly& cm2 = (n >= 2) ? c[n - 2] : QPoly{};
      const QPoly& cm3 = (n >= 3) ? c[n - 3] : QPoly{};
      acc = qpoly_scale_add(c[n - 1], rn1, cm2, qa);
      if (n >= 2) qpoly_sub_qtimes(acc, c[n - 2]);
      if (n >= 3) {
        const Complex pn3 = p.alpha + p.epsilon * idx(n - 3);
        acc = qpoly_scale_add(acc, 1.0, cm3, pn3);
      }
    } else {
      const Complex qa = (p.family == HeunFamily::DoubleConfluent)
                             ? idx(n - 1) * (idx(n - 1) + p.delta - 1.0)
                             : p.delta * idx(n - 1);
      const QPoly& cm2 = (n >= 2) ? c[n - 2] : QPoly{};
      const Complex pn2 =
          (n >= 2) ? (p.alpha + p.epsilon * idx(n - 2)) : Complex(0.0);
      acc = qpoly_scale_add(c[n - 1], qa, cm2, pn2);
      qpoly_sub_qtimes(acc, c[n - 1]);
    }
    for (auto& v : acc) v = -v / rn;
    c[n] = std::move(acc);
  }

  ComplexPoly target{c[N + 1]};
  target.normalize();
  if (target.degree() < 1) return {};
  std::vector<Complex> candidates = poly_roots(target);

  if (p.family == HeunFamily::TriConfluent) {
    const ComplexPoly second{c[N + 2]};
    const double scale2 = second.max_abs_coeff();
    std::vector<Complex> joint;
    for (const auto& q : candidates) {
      const double bound =
          1e-7 * scale2 * std::pow(std::max(1.0, std::abs(q)), N + 2);
      if (std::abs(second.eval(q)) <= bound) joint.push_back(q);
    }
    candidates = std::move(joint);
  }

  // verify each candidate numerically and deduplicate
  std::vector<Complex> out;
  for (const auto& q : candidates) {
    HeunParams pq = p;
    pq.q = q;
    SeriesSolution s = series_coeffs(pq, mu, N + 6);
    double maxc = 0.0;
    for (const auto& cc : s.coeffs) maxc = std::max(maxc, std::abs(cc));
    bool ok = true;
    for (int n = N + 1; n <= N + 4; ++n)
      if (std::abs(s.coeffs[n]) > 1e-10 * maxc) ok = false;
    if (!ok) continue;
    bool dup = false;
    for (const auto& prev : out)
      if (std::abs(prev - q) <= 1e-9 * (1.0 + std::abs(q))) dup = true;
    if (!dup) out.push_back(q);
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

HeunState eval_series(const SeriesSolution& s, Complex z) {
  if (s.classification == SeriesKind::Asymptotic)
    throw ClassificationError(
        "double-confluent power series has zero convergence radius; evaluate "
        "through the ODE path route instead");
  const Complex zmu =
      (std::abs(s.mu) == 0.0) ? Complex(1.0) : std::pow(z, s.mu);
  Complex f = 0.0, fz = 0.0;  // sum c_n z^n and its derivative
  Complex zpow = 1.0, zpow_prev = 0.0;
  for (size_t n = 0; n < s.coeffs.size(); ++n) {
    f += s.coeffs[n] * zpow;
    if (n >= 1) fz += s.coeffs[n] * static_cast<double>(n) * zpow_prev;
    zpow_prev = zpow;
    zpow *= z;
  }
  if (std::abs(s.mu) == 0.0) return {f, fz};
  // u = z^mu f  ->  u' = z^mu (f' + mu f / z)
  if (std::abs(z) == 0.0) {
    // only sensible for integer mu >= 0; mu = 1 is the tri-confluent case
    if (std::abs(s.mu - 1.0) < 1e-14) return {0.0, s.coeffs[0]};
    throw SingularityError("series with non-trivial exponent evaluated at 0",
                           0.0);
  }
  return {zmu * f, zmu * (fz + s.mu * f / z)};
}

namespace {

constexpr double kSeriesRadius = 2.0;

// Incremental summation of the canonical series (mu = 0 for bi, mu = 1 for
// tri) at |z| <= kSeriesRadius.
HeunState sum_canonical_series(const HeunParams& p, Complex z) {
  const bool tri = (p.family == HeunFamily::TriConfluent);
  const Complex mu = tri ? Complex(1.0) : Complex(0.0);
  Complex c0 = 1.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;  // c_{n}, c_{n-1}, ...
  Complex u = 0.0, uz = 0.0;
  double peak = 0.0;
  int quiet = 0;
  const int nmax = 900;
  Complex zpow = tri ? z : Complex(1.0);       // z^{n+mu}
  Complex zpow_d = tri ? Complex(1.0) : 0.0;   // (n+mu) z^{n+mu-1} factor base
  for (int n = 0; n <= nmax; ++n) {
    if (n > 0) {
      c3 = c2;
      c2 = c1;
      c1 = c0;
      c0 = next_coeff(p, mu, n, c1, c2, c3);
    }
    const Complex term = c0 * zpow;
    u += term;
    const double nn = n + (tri ? 1.0 : 0.0);
    uz += c0 * nn * zpow_d;
    peak = std::max(peak, std::abs(u));
    const double tail = std::max(std::abs(term), std::abs(c0 * nn * zpow_d));
    if (tail <= 1e-17 * std::max(1.0, peak) && n > 8) {
      if (++quiet >= 6) return {u, uz};
    } else {
      quiet = 0;
    }
    zpow_d = zpow;
    zpow *= z;
  }
  throw std::runtime_error("heun series did not converge within 900 terms");
}

double segment_origin_distance(Complex a, Complex b) {
  const Complex d = b - a;
  const double dd = std::norm(d);
  if (dd == 0.0) return std::abs(a);
  double t = -(a.real() * d.real() + a.imag() * d.imag()) / dd;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(a + t * d);
}

HeunState continue_along(const HeunParams& p, Complex z_from, HeunState y,
                         std::span<const Complex> waypoints, Complex z_target,
                         double tol) {
  std::vector<Complex> pts;
  pts.push_back(z_from);
  for (const auto& w : waypoints) pts.push_back(w);
  pts.push_back(z_target);
  const bool singular_origin = (p.family != HeunFamily::TriConfluent);
  const double ode_tol = std::max(tol, 1e-14);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Complex a = pts[i], b = pts[i + 1];
    if (a == b) continue;
    if (singular_origin) {
      const double safe = 1e-8 * std::max({1.0, std::abs(a), std::abs(b)});
      if (segment_origin_distance(a, b) < safe)
        throw SingularityError(
            "evaluation path passes through the singular point z = 0", 0.0);
    }
    const Complex dz = b - a;
    OdeRhs rhs = [&](double s, const CVector& yv, CVector& dy) {
      const Complex z = a + s * dz;
      dy[0] = yv[1] * dz;
      dy[1] = heun_uzz(p, z, yv[0], yv[1]) * dz;
    };
    auto traj =
        integrate_ode(rhs, 0.0, 1.0, {y.u, y.uz}, ode_tol, ode_tol * 1e-2);
    y.u = traj.states.back()[0];
    y.uz = traj.states.back()[1];
  }
  return y;
}

}  // namespace

HeunState eval_heun_from(const HeunParams& p, Complex z_from,
                         const HeunState& y_from, Complex z_target,
                         std::span<const Complex> waypoints, double tol) {
  return continue_along(p, z_from, y_from, waypoints, z_target, tol);
}

HeunState eval_heun(const HeunParams& p, Complex z_target,
                    std::span<const Complex> waypoints, double tol) {
  if (p.family == HeunFamily::DoubleConfluent) {
    const HeunState anchor{1.0, 0.0};
    if (waypoints.empty() && z_target == Complex(1.0)) return anchor;
    return continue_along(p, 1.0, anchor, waypoints, z_target, tol);
  }
  // bi / tri: convergent series from the origin
  if (std::abs(z_target) <= kSeriesRadius && waypoints.empty())
    return sum_canonical_series(p, z_target);
  Complex z_start = z_target;
  if (std::abs(z_start) > kSeriesRadius)
    z_start = kSeriesRadius * z_target / std::abs(z_target);
  if (!waypoints.empty() && std::abs(waypoints.front()) <= kSeriesRadius)
    z_start = waypoints.front();
  const HeunState y0 = sum_canonical_series(p, z_start);
  return continue_along(p, z_start, y0, waypoints, z_target, tol);
}

// ---------------------------------------------------------------------------
// Derivative-function equations

double derivative_equation_check(HeunFamily family, const HeunParams& p,
                                 Complex z0, Complex sigma, Complex z) {
  if (p.family != family)
    throw std::invalid_argument("derivative_equation_check: family mismatch");
  const double ctol = 1e-10;
  const auto scale1 = [&](Complex a, Complex b) {
    return 1.0 + std::abs(a) + std::abs(b);
  };

  const HeunState s = eval_heun(p, z);
  const Complex uzz = heun_uzz(p, z, s.u, s.uz);
  const Complex uzzz = heun_uzzz(p, z, s.u, s.uz, uzz);

  switch (family) {
    case HeunFamily::TriConfluent: {
      if (std::abs(p.q) > ctol * (1.0 + std::abs(p.alpha)))
        throw ConstraintError("tri derivative equation requires q = 0");
      const Complex lhs = p.alpha + p.epsilon, rhs = p.gamma * p.delta;
      if (std::abs(lhs - rhs) > ctol * scale1(lhs, rhs))
        throw ConstraintError(
            "tri derivative equation requires alpha + epsilon = gamma delta");
      const Complex g = p.gamma;
      const Complex v = std::exp(g * z) * s.uz;
      const Complex vp = std::exp(g * z) * (g * s.uz + uzz);
      const Complex vpp = std::exp(g * z) * (g * g * s.uz + 2.0 * g * uzz + uzzz);
      const Complex coef1 = -g + p.delta * z + p.epsilon * z * z - 1.0 / z;
      const Complex res = vpp + coef1 * vp - g * p.epsilon * z * z * v;
      return std::abs(res);
    }
    case HeunFamily::BiConfluent: {
      const Complex sig_def = p.gamma + p.delta * z0 + p.epsilon * z0 * z0;
      if (std::abs(sigma - sig_def) > ctol * scale1(sigma, sig_def))
        throw ConstraintError(
            "bi derivative equation: sigma != gamma + delta z0 + epsilon z0^2");
      const Complex side_l = (p.alpha + p.epsilon) * z0;
      const Complex side_r = (p.delta + 2.0 * p.epsilon * z0) * sigma;
      if (std::abs(side_l - side_r) > ctol * scale1(side_l, side_r))
        throw ConstraintError(
            "bi derivative equation: (alpha+epsilon) z0 != (delta + 2 epsilon "
            "z0) sigma");
      const Complex zs = std::pow(z, sigma);
      const Complex v = zs * s.uz;
      const Complex vp = zs * (sigma / z * s.uz + uzz);
      const Complex vpp =
          zs * (sigma * (sigma - 1.0) / (z * z) * s.uz + 2.0 * sigma / z * uzz +
                uzzz);
      const Complex coef1 = (p.gamma + 1.0 - 2.0 * sigma) / z + p.delta +
                            p.epsilon * z - 1.0 / (z - z0);
      const Complex coef0 = (p.alpha + p.epsilon - p.epsilon * sigma) *
                            (z - z0) * (z - z0) / (z * z);
      const Complex res = vpp + coef1 * vp + coef0 * v;
      return std::abs(res);
    }
    case HeunFamily::DoubleConfluent: {
      if (std::abs(p.alpha + p.epsilon) >
          ctol * scale1(p.alpha, p.epsilon))
        throw ConstraintError(
            "double derivative equation requires alpha = -epsilon");
      if (std::abs(p.q - p.delta / 2.0) > ctol * scale1(p.q, p.delta))
        throw ConstraintError(
            "double derivative equation requires q = delta/2");
      const Complex sig_def = p.gamma - p.delta * p.delta / (4.0 * p.epsilon);
      if (std::abs(sigma - sig_def) > ctol * scale1(sigma, sig_def))
        throw ConstraintError(
            "double derivative equation: sigma != gamma - delta^2/(4 epsilon)");
      const Complex gp = sigma / (z * z);             // (e^{-sigma/z})'/e^...
      const Complex gpp = -2.0 * sigma / (z * z * z);
      const Complex eg = std::exp(-sigma / z);
      const Complex v = eg * s.uz;
      const Complex vp = eg * (gp * s.uz + uzz);
      const Complex vpp = eg * ((gp * gp + gpp) * s.uz + 2.0 * gp * uzz + uzzz);
      const Complex coef1 = (p.gamma - 2.0 * sigma) / (z * z) +
                            (p.delta + 2.0) / z + p.epsilon - 1.0 / (z - z0);
      const Complex coef0 = -p.epsilon * sigma * (z - z0) * (z - z0) /
                            (z * z * z * z);
      const Complex res = vpp + coef1 * vp + coef0 * v;
      return std::abs(res);
    }
  }
  return 0.0;
}

}  // namespace heun2s

#include "heun2s/numerics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace heun2s {

namespace {
constexpr double kInvE = 0.36787944117144233;  // 1/e
}

// ---------------------------------------------------------------------------
// Lambert W

static double lambert_initial_guess(int branch, double x) {
  if (branch == 0) {
    if (x < -0.25) {
      // Series about the branch point x = -1/e.
      const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + M_E * x)));
      return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    if (x < M_E) return std::log1p(x);
    const double l1 = std::log(x), l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
  }
  // branch -1, x in [-1/e, 0)
  if (x < -0.25) {
    const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + M_E * x)));
    return -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
  }
  const double l1 = std::log(-x);
  return l1 - std::log(-l1);
}

double lambert_w(int branch, double x) {
  if (branch != 0 && branch != -1)
    throw DomainError("lambert_w: only real branches 0 and -1 are supported");
  const double slack = 8.0 * std::numeric_limits<double>::epsilon();
  if (x < -kInvE - slack)
    throw DomainError("lambert_w: argument " + std::to_string(x) +
                      " below the branch point -1/e");
  if (branch == -1 && x >= 0.0)
    throw DomainError("lambert_w: branch -1 requires a negative argument");
  if (x == 0.0) return 0.0;
  if (std::abs(x + kInvE) <= slack) return -1.0;

  double w = lambert_initial_guess(branch, std::max(x, -kInvE));
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

// ---------------------------------------------------------------------------
// ComplexPoly

Complex ComplexPoly::eval(Complex z) const {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

ComplexPoly ComplexPoly::derivative() const {
  ComplexPoly d;
  if (coeffs.size() <= 1) {
    d.coeffs = {Complex(0.0)};
    return d;
  }
  d.coeffs.resize(coeffs.size() - 1);
  for (size_t j = 1; j < coeffs.size(); ++j)
    d.coeffs[j - 1] = coeffs[j] * static_cast<double>(j);
  return d;
}

double ComplexPoly::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& c : coeffs) m = std::max(m, std::abs(c));
  return m;
}

void ComplexPoly::normalize(double rel_tol) {
  const double scale = max_abs_coeff();
  while (coeffs.size() > 1 && std::abs(coeffs.back()) <= rel_tol * scale)
    coeffs.pop_back();
}

std::vector<Complex> poly_roots(const ComplexPoly& input) {
  ComplexPoly p = input;
  p.normalize();
  const int n = p.degree();
  if (n < 1)
    throw std::invalid_argument("poly_roots: degree must be at least 1");

  std::vector<Complex> roots;
  if (n == 1) {
    roots.push_back(-p.coeffs[0] / p.coeffs[1]);
  } else if (n == 2) {
    const Complex a = p.coeffs[2], b = p.coeffs[1], c = p.coeffs[0];
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    // pick the sign that avoids cancellation in -b -/+ disc
    const Complex s = (std::real(std::conj(b) * disc) >= 0.0) ? disc : -disc;
    const Complex q = -0.5 * (b + s);
    roots.push_back(q / a);
    roots.push_back(std::abs(q) > 0.0 ? c / q : Complex(0.0));
  } else {
    // Companion matrix of the monic polynomial.
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    const Complex lead = p.coeffs[n];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeffs[i] / lead;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    for (int i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()(i));
  }

  // Newton polish (skips when the local derivative is tiny, e.g. at a
  // multiple root where the eigenvalue is already the best available value).
  const ComplexPoly dp = p.derivative();
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const Complex f = p.eval(r);
      const Complex df = dp.eval(r);
      if (std::abs(df) <= 1e-12 * p.max_abs_coeff()) break;
      const Complex step = f / df;
      if (!std::isfinite(std::abs(step))) break;
      r -= step;
    }
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with dense output (coefficients from the classic
// RKDP tableau and Hairer's dopri5 continuous extension).

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct DenseCoeffs {
  CVector r1, r2, r3, r4, r5;

  Complex eval(size_t i, double theta) const {
    const double th1 = 1.0 - theta;
    return r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
  }
};

}  // namespace

OdeTrajectory integrate_ode(const OdeRhs& rhs, double t0, double t1,
                            const CVector& y0, double rtol, double atol,
                            std::span<const double> dense_times) {
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("integrate_ode: tolerances must be positive");
  const size_t n = y0.size();
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  OdeTrajectory traj;
  traj.est_error = 0.0;

  size_t next_dense = 0;
  auto record = [&](double t, const CVector& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
  };
  auto emit_dense_upto = [&](double t_lo, double t_hi, double h,
                             const DenseCoeffs& dc) {
    while (next_dense < dense_times.size()) {
      const double td = dense_times[next_dense];
      if (dir * (td - t_hi) > 1e-14 * std::max(1.0, std::abs(t_hi))) break;
      const double theta = (h != 0.0) ? (td - t_lo) / h : 0.0;
      CVector yd(n);
      for (size_t i = 0; i < n; ++i) yd[i] = dc.eval(i, theta);
      record(td, yd);
      ++next_dense;
    }
  };

  CVector y = y0, ynew(n), ytmp(n), yerr(n);
  CVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  rhs(t0, y, k1);

  if (dense_times.empty()) record(t0, y);

  if (span == 0.0) {
    if (!dense_times.empty())
      for (double td : dense_times) record(td, y);
    return traj;
  }

  // initial step from the scale of y and y'
  double h;
  {
    double dy = atol, dydt = atol;
    for (size_t i = 0; i < n; ++i) {
      dy = std::max(dy, std::abs(y[i]));
      dydt = std::max(dydt, std::abs(k1[i]));
    }
    h = dir * std::min(span / 10.0, std::max(1e-8, 0.01 * dy / dydt));
  }

  double t = t0;
  const int max_steps = 2000000;
  for (int step = 0; step < max_steps; ++step) {
    if (dir * (t - t1) >= 0.0) break;
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    if (std::abs(h) < 64.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, std::abs(t)))
      throw SingularityError(
          "integrate_ode: step size underflow near t = " + std::to_string(t), t);

    for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                            a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (size_t i = 0; i < n; ++i) {
      yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                     e6 * k6[i] + e7 * k7[i]);
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = std::abs(yerr[i]) / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      // accepted
      if (!dense_times.empty() && next_dense < dense_times.size()) {
        DenseCoeffs dc;
        dc.r1.resize(n), dc.r2.resize(n), dc.r3.resize(n);
        dc.r4.resize(n), dc.r5.resize(n);
        for (size_t i = 0; i < n; ++i) {
          const Complex ydiff = ynew[i] - y[i];
          const Complex bspl = h * k1[i] - ydiff;
          dc.r1[i] = y[i];
          dc.r2[i] = ydiff;
          dc.r3[i] = bspl;
          dc.r4[i] = ydiff - h * k7[i] - bspl;
          dc.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                          d6 * k6[i] + d7 * k7[i]);
        }
        emit_dense_upto(t, t + h, h, dc);
      }
      double scale_abs = atol;
      for (size_t i = 0; i < n; ++i)
        scale_abs = std::max(scale_abs, rtol * std::abs(ynew[i]));
      traj.est_error += err * scale_abs;
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      if (dense_times.empty()) record(t, y);
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }

  // Dense times that coincide with the final endpoint.
  while (next_dense < dense_times.size() &&
         std::abs(dense_times[next_dense] - t1) <=
             1e-12 * std::max(1.0, std::abs(t1))) {
    record(dense_times[next_dense], y);
    ++next_dense;
  }
  if (next_dense < dense_times.size())
    throw std::invalid_argument(
        "integrate_ode: dense output time outside the integration range");
  return traj;
}

// ---------------------------------------------------------------------------
// Kummer 1F1

static bool is_nonpositive_integer(Complex b) {
  if (std::abs(b.imag()) > 1e-13) return false;
  const double br = b.real();
  return br <= 1e-13 && std::abs(br - std::round(br)) <= 1e-13;
}

static Complex kummer_series(Complex a, Complex b, Complex z) {
  Complex term = 1.0, sum = 1.0;
  const int nmax = 2000;
  for (int k = 0; k < nmax; ++k) {
    const double kd = static_cast<double>(k);
    term *= (a + kd) / (b + kd) * z / (kd + 1.0);
    sum += term;
    if (std::abs(term) <= 1e-16 * std::abs(sum) && k > 4) {
      // term-ratio tail bound: once |z|/(k+2) < 1/2 the tail is dominated
      // by a geometric series
      const double ratio = std::abs(z) / (kd + 2.0);
      if (ratio < 0.5 &&
          std::abs(term) * ratio / (1.0 - ratio) <= 1e-15 * std::abs(sum))
        return sum;
    }
  }
  return sum;
}

Complex kummer_1f1(Complex a, Complex b, Complex z) {
  if (is_nonpositive_integer(b))
    throw PoleError("kummer_1f1: b is a non-positive integer (pole)");
  if (z == 0.0) return 1.0;
  if (std::abs(a - b) <= 1e-15 * (std::abs(a) + std::abs(b))) return std::exp(z);
  if (std::abs(a) == 0.0) return 1.0;
  if (z.real() < 0.0) return std::exp(z) * kummer_series(b - a, b, -z);
  return kummer_series(a, b, z);
}

}  // namespace heun2s

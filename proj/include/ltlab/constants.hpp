#pragma once

// Reference constants for the periodic Lieb-Thirring quotient:
//
//   semiclassical:   L_sc(gamma, d) = Gamma(gamma+1) / (2^d pi^{d/2} Gamma(gamma+d/2+1))
//   one bound state: L_1bs(gamma, d) = sup_V |lambda_1(V)|^gamma / Int V_-^{gamma+d/2}
//
// The one-bound-state constant is evaluated at its stationary point. With
// theta = 2/(gamma + d/2 - 1), the optimal potential can be scaled so that
// V = -u^theta and lambda_1 = -1, where u > 0 is the radial ground state of
//
//   -u'' - (d-1)/r u' + u = u^{1+theta},   u'(0) = 0,  u(inf) = 0
//
// (then u itself is the ground-state eigenfunction: -u'' + V u = -u). The
// quotient at this potential is
//
//   L_1bs = |{-1}|^gamma / Int u^{theta (gamma + d/2)} = 1 / Int u^{2(gamma+d/2)/(gamma+d/2-1)}.
//
// This chain is validated by the d = 1, gamma = 3/2 closed form
// u = sqrt(2) sech x, Int u^4 = 16/3, L = 3/16, and by an independent
// linear eigensolve of -u'' + V u (see tests).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ltlab/lattice.hpp"  // pi

namespace ltlab {

// Exponent pair (gamma, d) with the validity constraints of the inequality:
// gamma >= 1/2 in d = 1, gamma > 0 in d = 2.
struct GammaExponent {
  double gamma = 1.0;
  int d = 1;

  void validate() const {
    if (d == 1) {
      if (!(gamma >= 0.5)) throw std::domain_error("gamma >= 1/2 required in d = 1");
    } else if (d == 2) {
      if (!(gamma > 0.0)) throw std::domain_error("gamma > 0 required in d = 2");
    } else {
      throw std::domain_error("dimension must be 1 or 2");
    }
  }
};

// Semiclassical constant, Gamma-function closed form.
inline double semiclassical_constant(double gamma, int d) {
  if (!(gamma >= 0.0) || d < 1)
    throw std::domain_error("semiclassical_constant: gamma >= 0 and d >= 1 required");
  return std::tgamma(gamma + 1.0) /
         (std::pow(2.0, d) * std::pow(pi, 0.5 * d) * std::tgamma(gamma + 0.5 * d + 1.0));
}

// Radial NLS ground state found by shooting on u(0).
struct NlsGroundState {
  double gamma = 0.0;
  int d = 1;
  double theta = 0.0;     // nonlinearity exponent 2/(gamma + d/2 - 1)
  double alpha = 0.0;     // u(0)
  double h = 0.0;         // radial step
  std::vector<double> r;  // grid (truncated where u stops decreasing)
  std::vector<double> u;  // profile, positive and strictly decreasing
  double integral_theta = 0.0;  // Int_{R^d} u^{theta (gamma + d/2)} dx
  double one_bound_state = 0.0;  // 1 / integral_theta
};

namespace detail {

struct ShootOutcome {
  int sign = 0;  // +1: crossed zero (alpha too large), -1: turned up (too small)
  std::vector<double> r, u, v;
};

// Fourth-order RK integration of u'' = u - |u|^theta u sign... the profile
// stays positive on the kept range; the nonlinear term is u^{1+theta} for
// u > 0 and is continued oddly to keep the vector field smooth at u = 0.
inline ShootOutcome shoot(double alpha, double theta, int d, double h, double rmax) {
  ShootOutcome out;
  const double r0 = 1e-8;
  const double curv = (alpha - std::pow(alpha, 1.0 + theta)) / (2.0 * d);
  double r = r0;
  double u = alpha + curv * r0 * r0;
  double v = 2.0 * curv * r0;
  auto rhs = [theta, d](double rr, double uu, double vv, double& du, double& dv) {
    du = vv;
    const double nl = uu > 0.0 ? std::pow(uu, 1.0 + theta) : -std::pow(-uu, 1.0 + theta);
    dv = uu - nl - (d - 1) / rr * vv;
  };
  const std::size_t steps = std::size_t(rmax / h);
  out.r.reserve(steps + 1);
  out.u.reserve(steps + 1);
  out.v.reserve(steps + 1);
  out.r.push_back(r);
  out.u.push_back(u);
  out.v.push_back(v);
  double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
  for (std::size_t i = 0; i < steps; ++i) {
    rhs(r, u, v, k1u, k1v);
    rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
    rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
    rhs(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    r += h;
    out.r.push_back(r);
    out.u.push_back(u);
    out.v.push_back(v);
    if (u <= 0.0) {
      out.sign = +1;
      return out;
    }
    if (v > 0.0) {
      out.sign = -1;
      return out;
    }
  }
  out.sign = -1;  // no crossing by rmax: treat as undershoot
  return out;
}

}  // namespace detail

// Ground state of the radial NLS by bisection on u(0); fourth-order
// integration with step h out to rmax.
inline NlsGroundState nls_ground_state(double gamma, int d, double h = 1e-3,
                                       double rmax = 30.0) {
  if (d != 1 && d != 2) throw std::domain_error("nls_ground_state: d must be 1 or 2");
  if (!(gamma + 0.5 * d > 1.0))
    throw std::domain_error("nls_ground_state: gamma + d/2 > 1 required");
  GammaExponent{gamma, d}.validate();
  const double theta = 2.0 / (gamma + 0.5 * d - 1.0);

  double lo = 1.0 + 1e-12, hi = 2.0;
  int guard = 0;
  while (detail::shoot(hi, theta, d, h, rmax).sign < 0) {
    hi *= 1.5;
    if (++guard > 60) throw std::runtime_error("nls_ground_state: no overshoot bracket");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::shoot(mid, theta, d, h, rmax).sign > 0 ? hi : lo) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  auto traj = detail::shoot(alpha, theta, d, h, rmax);

  // Keep the clean part of the profile: strictly decreasing and above the
  // noise floor set by the bisection resolution.
  std::size_t stop = traj.u.size();
  for (std::size_t i = 1; i < traj.u.size(); ++i) {
    if (traj.u[i] <= 1e-9 * alpha || traj.u[i] >= traj.u[i - 1]) {
      stop = i;
      break;
    }
  }
  NlsGroundState st;
  st.gamma = gamma;
  st.d = d;
  st.theta = theta;
  st.alpha = alpha;
  st.h = h;
  st.r.assign(traj.r.begin(), traj.r.begin() + stop);
  st.u.assign(traj.u.begin(), traj.u.begin() + stop);

  // Int u^{theta (gamma + d/2)} over R^d: surface measure 2 (d=1, even
  // extension) or 2 pi r dr (d=2), composite Simpson on the uniform grid.
  const double s = theta * (gamma + 0.5 * d);
  std::vector<double> w(st.u.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::pow(st.u[i], s) * (d == 2 ? st.r[i] : 1.0);
  std::size_t m = w.size() - 1;
  if (m % 2 == 1) --m;
  double simpson = w[0] + w[m];
  for (std::size_t i = 1; i < m; i += 2) simpson += 4.0 * w[i];
  for (std::size_t i = 2; i < m; i += 2) simpson += 2.0 * w[i];
  simpson *= h / 3.0;
  st.integral_theta = (d == 1 ? 2.0 : 2.0 * pi) * simpson;
  st.one_bound_state = 1.0 / st.integral_theta;
  return st;
}

// One-bound-state constant L_1bs(gamma, d); see the derivation at the top.
inline double one_bound_state_constant(double gamma, int d) {
  return nls_ground_state(gamma, d).one_bound_state;
}

// Root of L_1bs(gamma, d) - L_sc(gamma, d) by bracketing bisection
// (tolerance 1e-6 in gamma). L_1bs is larger below the crossing.
inline double crossing_exponent(int d) {
  if (d != 1 && d != 2) throw std::domain_error("crossing_exponent: d must be 1 or 2");
  double lo = d == 1 ? 1.2 : 1.05;
  double hi = d == 1 ? 1.8 : 1.35;
  auto f = [d](double g) { return one_bound_state_constant(g, d) - semiclassical_constant(g, d); };
  double flo = f(lo);
  if (!(flo > 0.0) || !(f(hi) < 0.0))
    throw std::runtime_error("crossing_exponent: bracket not found");
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Sup-norm ODE residual of the stored profile, estimated with fourth-order
// central differences on the interior of the grid (oracle for tests).
inline double nls_residual_sup(const NlsGroundState& st) {
  double worst = 0.0;
  const double h = st.h;
  for (std::size_t i = 2; i + 2 < st.u.size(); ++i) {
    const double d1 =
        (-st.u[i + 2] + 8.0 * st.u[i + 1] - 8.0 * st.u[i - 1] + st.u[i - 2]) / (12.0 * h);
    const double d2 = (-st.u[i + 2] + 16.0 * st.u[i + 1] - 30.0 * st.u[i] +
                       16.0 * st.u[i - 1] - st.u[i - 2]) /
                      (12.0 * h * h);
    const double res = -d2 - (st.d - 1) / st.r[i] * d1 + st.u[i] - std::pow(st.u[i], 1.0 + st.theta);
    worst = std::max(worst, std::fabs(res));
  }
  return worst;
}

// Lowest eigenvalue of the radial operator -u'' - (d-1)/r u' + V(r) on
// (0, rmax), found by shooting + bisection (the trajectory with u(0) = 1,
// u'(0) = 0 first crosses zero iff lambda exceeds the ground level).
// Independent oracle for the NLS self-consistency and scaling tests.
inline double radial_lowest_eigenvalue(const std::function<double(double)>& V, int d,
                                       double lambda_lo, double lambda_hi, double rmax = 25.0,
                                       double h = 2e-3) {
  auto crosses = [&](double lambda) {
    const double r0 = 1e-8;
    double r = r0, u = 1.0, v = 0.0;
    auto rhs = [&](double rr, double uu, double vv, double& du, double& dv) {
      du = vv;
      dv = (V(rr) - lambda) * uu - (d - 1) / rr * vv;
    };
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    const std::size_t steps = std::size_t(rmax / h);
    for (std::size_t i = 0; i < steps; ++i) {
      rhs(r, u, v, k1u, k1v);
      rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
      rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
      rhs(r + h, u + h * k3u, v + h * k3v, k4u, k4v);
      u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      r += h;
      if (u <= 0.0) return true;
    }
    return false;
  };
  if (crosses(lambda_lo) || !crosses(lambda_hi))
    throw std::runtime_error("radial_lowest_eigenvalue: bracket does not isolate the ground state");
  for (int it = 0; it < 200 && (lambda_hi - lambda_lo) > 1e-11 * (1.0 + std::fabs(lambda_hi));
       ++it) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    (crosses(mid) ? lambda_hi : lambda_lo) = mid;
  }
  return 0.5 * (lambda_lo + lambda_hi);
}

}  // namespace ltlab

#pragma once

// Exact 1D oracle built on Jacobi elliptic functions: the one-gap periodic
// potential V_k(x) = 2k^2 sn(x|k)^2 - 1 - k^2 of period 2K(k), its density
// of states, closed-form Riesz mean and potential mean, and the equivalent
// Weierstrass-side quantities obtained from real integral representations.
//
// K(k) is computed with the arithmetic-geometric mean; sn with the
// descending Landen transformation seeded by the AGM sequence
// (Abramowitz & Stegun 16.4 / 17.6). Moduli are restricted to
// k <= 1 - 1e-10 since K(k) diverges logarithmically at k = 1.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ltlab/lattice.hpp"  // pi
#include "ltlab/quadrature.hpp"

namespace ltlab {

namespace detail {

inline constexpr double modulus_max = 1.0 - 1e-10;

inline void check_modulus(double k, bool strict_positive = false) {
  if (!(k >= 0.0) || k > modulus_max)
    throw std::domain_error("elliptic: modulus k must lie in [0, 1 - 1e-10]");
  if (strict_positive && k == 0.0)
    throw std::domain_error("elliptic: modulus k must be positive here");
}

// AGM scales a_n, c_n with a_0 = 1, b_0 = k', c_0 = k. Returns the number of
// iterations performed; a[n] converges to agm(1, k').
struct AgmScales {
  std::array<double, 32> a{}, c{};
  int n = 0;
};

inline AgmScales agm_scales(double k) {
  AgmScales s;
  double a = 1.0, b = std::sqrt((1.0 - k) * (1.0 + k));
  s.a[0] = a;
  s.c[0] = k;
  int n = 0;
  while (std::fabs(s.c[n]) > 1e-17 * a && n + 1 < int(s.a.size())) {
    const double an = 0.5 * (a + b);
    const double cn = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    ++n;
    s.a[n] = a;
    s.c[n] = cn;
  }
  s.n = n;
  return s;
}

}  // namespace detail

// Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k')).
inline double complete_elliptic_k(double k) {
  detail::check_modulus(k);
  const auto s = detail::agm_scales(k);
  return pi / (2.0 * s.a[s.n]);
}

// Complete elliptic integral of the second kind,
// E(k) = K(k) (1 - sum_{n>=0} 2^{n-1} c_n^2). Used as a test oracle for the
// quadrature-defined mean coefficient c(k).
inline double complete_elliptic_e(double k) {
  detail::check_modulus(k);
  const auto s = detail::agm_scales(k);
  double sum = 0.0;
  for (int n = 0; n <= s.n; ++n) sum += std::ldexp(s.c[n] * s.c[n], n - 1);
  return pi / (2.0 * s.a[s.n]) * (1.0 - sum);
}

// Jacobi elliptic sine sn(x|k), modulus convention.
inline double jacobi_sn(double x, double k) {
  detail::check_modulus(k);
  if (k < 1e-15) return std::sin(x);
  const auto s = detail::agm_scales(k);
  const double quarter = pi / (2.0 * s.a[s.n]);  // K(k)
  // Reduce modulo the full period 4K to keep the backward phase recursion
  // well conditioned for large arguments.
  const double period = 4.0 * quarter;
  x -= period * std::nearbyint(x / period);
  double phi = std::ldexp(s.a[s.n] * x, s.n);
  for (int n = s.n; n >= 1; --n) {
    double t = s.c[n] / s.a[n] * std::sin(phi);
    t = std::min(1.0, std::max(-1.0, t));
    phi = 0.5 * (phi + std::asin(t));
  }
  return std::sin(phi);
}

// The one-gap Lame potential of period 2K(k); values in [-1-k^2, k^2-1].
inline double lame_potential(double x, double k) {
  const double s = jacobi_sn(x, k);
  return 2.0 * k * k * s * s - 1.0 - k * k;
}

// Mean coefficient c = k^2/(2K) Int_{-K}^{K} sn(x|k)^2 dx, by adaptive
// quadrature (absolute accuracy 1e-12); satisfies 0 < c < k^2.
inline double lame_c(double k) {
  detail::check_modulus(k, /*strict_positive=*/true);
  const double quarter = complete_elliptic_k(k);
  const double mean =
      integrate([k](double x) { const double s = jacobi_sn(x, k); return s * s; }, 0.0,
                quarter, 1e-13) /
      quarter;
  return k * k * mean;
}

inline std::array<double, 3> lame_band_edges(double k) { return {-1.0, -k * k, 0.0}; }

namespace detail {

// Density-of-states formula with the mean coefficient supplied by the caller
// (lame_c is a quadrature; cache it outside integration loops).
inline double lame_dos_impl(double E, double k, double c) {
  const double k2 = k * k;
  if (E == -1.0 || E == -k2 || E == 0.0)
    throw std::domain_error("lame_dos: band-edge singularity");
  if (E > -1.0 && E < -k2)
    return -(E + c) / (2.0 * pi * std::sqrt((E + 1.0) * (-(E + k2)) * (-E)));
  if (E > 0.0) return (E + c) / (2.0 * pi * std::sqrt((E + 1.0) * (E + k2) * E));
  return 0.0;
}

}  // namespace detail

// Density of states of -d^2/dx^2 + V_k:
//   n(E) = (E + c) / (2 pi sqrt((E+1)(E+k^2)E)) (-1 on (-1,-k^2), +1 on (0,inf)).
// Band-edge inputs are signaled as domain errors (inverse-square-root
// singularities); the gap (-k^2, 0) and E < -1 give 0.
inline double lame_dos(double E, double k) {
  detail::check_modulus(k, true);
  return detail::lame_dos_impl(E, k, lame_c(k));
}

// Closed form of the Riesz mean at gamma = 3/2 per unit length:
//   (1/16)(3 + 2k^2 + 3k^4) - (c/4)(1 + k^2).
inline double lame_riesz_mean(double k) {
  detail::check_modulus(k, true);
  const double c = lame_c(k);
  const double k2 = k * k;
  return (3.0 + 2.0 * k2 + 3.0 * k2 * k2) / 16.0 - 0.25 * c * (1.0 + k2);
}

// Closed form of (1/l) Int_0^l V_k(x)^2 dx:
//   (4k^2/3)(2(1+k^2)c/k^2 - 1) - 4(1+k^2)c + (1+k^2)^2.
inline double lame_potential_mean(double k) {
  detail::check_modulus(k, true);
  const double c = lame_c(k);
  const double k2 = k * k;
  const double s = 1.0 + k2;
  return (4.0 * k2 / 3.0) * (2.0 * s * c / k2 - 1.0) - 4.0 * s * c + s * s;
}

// Direct quadrature of (1/l) Int_0^l V_k(x)^2 dx (cross-check of the closed
// form; the integrand is smooth and periodic).
inline double lame_potential_mean_quadrature(double k) {
  detail::check_modulus(k, true);
  const double bigk = complete_elliptic_k(k);
  const double integral = integrate(
      [k](double x) {
        const double v = lame_potential(x, k);
        return v * v;
      },
      0.0, 2.0 * bigk, 1e-12);
  return integral / (2.0 * bigk);
}

// Riesz mean recomputed through the density of states,
// Int_{-1}^{-k^2} n(E) |E|^{3/2} dE, with the inverse-square-root band-edge
// singularities removed exactly by E = -1 + (1-k^2) sin^2(theta).
inline double lame_riesz_mean_quadrature(double k) {
  detail::check_modulus(k, true);
  const double c = lame_c(k);
  const double width = 1.0 - k * k;
  auto f = [k, c, width](double th) {
    const double s = std::sin(th), cth = std::cos(th);
    const double E = -1.0 + width * s * s;
    // dE = 2 width s c dtheta and sqrt((E+1)(-E-k^2)) = width s c.
    const double jac = 2.0 * width * s * cth;
    return detail::lame_dos_impl(E, k, c) * std::pow(-E, 1.5) * jac;
  };
  return integrate(f, 0.0, 0.5 * pi, 1e-12);
}

// Band filling Int_{-1}^{-k^2} n(E) dE (one state per unit cell per unit
// length, i.e. 1/(2K)), same substitution as above.
inline double lame_band_filling(double k) {
  detail::check_modulus(k, true);
  const double c = lame_c(k);
  const double width = 1.0 - k * k;
  auto f = [k, c, width](double th) {
    const double s = std::sin(th), cth = std::cos(th);
    const double E = -1.0 + width * s * s;
    return detail::lame_dos_impl(E, k, c) * 2.0 * width * s * cth;
  };
  return integrate(f, 0.0, 0.5 * pi, 1e-12);
}

// The two moment integrals over (k^2, 1) against 1/sqrt((1-t)(t-k^2)):
//   Int t dt = pi/2 (1 + k^2),  Int t^2 dt = pi/8 (3 + 2k^2 + 3k^4).
inline std::pair<double, double> beta_integrals(double k) {
  detail::check_modulus(k, true);
  const double k2 = k * k;
  return {0.5 * pi * (1.0 + k2), 0.125 * pi * (3.0 + 2.0 * k2 + 3.0 * k2 * k2)};
}

// Quadrature cross-check of beta_integrals with t = k^2 + (1-k^2) sin^2.
inline std::pair<double, double> beta_integrals_quadrature(double k) {
  detail::check_modulus(k, true);
  const double k2 = k * k;
  const double width = 1.0 - k2;
  auto t_of = [k2, width](double th) {
    const double s = std::sin(th);
    return k2 + width * s * s;
  };
  // dt / sqrt((1-t)(t-k^2)) = 2 dtheta.
  const double first = integrate([&](double th) { return 2.0 * t_of(th); }, 0.0, 0.5 * pi, 1e-12);
  const double second = integrate(
      [&](double th) {
        const double t = t_of(th);
        return 2.0 * t * t;
      },
      0.0, 0.5 * pi, 1e-12);
  return {first, second};
}

// Weierstrass data for the same one-gap operator: the three real roots and
// eta_1/omega_1, with omega_1 = 2K(k) the real half-period.
struct WeierstrassTriple {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  double eta1_over_omega1 = 0.0;
  double omega1 = 0.0;
};

// Roots e1 = 1 - (1+k^2)/3, e2 = k^2 - (1+k^2)/3, e3 = -(1+k^2)/3.
// eta_1/omega_1 solves the band-filling condition that the integrated
// density of states equals 1/omega_1 on the spectral gap:
//   (2 pi)^{-1} Int_{e2}^{e1} (w + eta_1/omega_1) dw / sqrt((e1-w)(w-e2)(w-e3)) = 1/omega_1,
// evaluated with w = e2 + (e1-e2) sin^2(theta) (both endpoint singularities
// removed exactly).
inline WeierstrassTriple weierstrass_triple(double k) {
  detail::check_modulus(k, true);
  WeierstrassTriple t;
  const double m = (1.0 + k * k) / 3.0;
  t.e1 = 1.0 - m;
  t.e2 = k * k - m;
  t.e3 = -m;
  t.omega1 = 2.0 * complete_elliptic_k(k);
  const double span = t.e1 - t.e2;
  auto w_of = [&t, span](double th) {
    const double s = std::sin(th);
    return t.e2 + span * s * s;
  };
  // dw / sqrt((e1-w)(w-e2)) = 2 dtheta.
  auto moment = integrate(
      [&](double th) {
        const double w = w_of(th);
        return 2.0 * w / std::sqrt(w - t.e3);
      },
      0.0, 0.5 * pi, 1e-13);
  auto mass = integrate(
      [&](double th) { return 2.0 / std::sqrt(w_of(th) - t.e3); }, 0.0, 0.5 * pi, 1e-13);
  t.eta1_over_omega1 = (2.0 * pi / t.omega1 - moment) / mass;
  return t;
}

// Density of states on the Weierstrass side (bands (-e1,-e2) and (-e3,inf)):
//   n_W(E) = (2 pi)^{-1} |E - eta_1/omega_1| / sqrt(|(e1+E)(e2+E)(e3+E)|),
// with sign arranged so that n_W >= 0 on both bands, 0 elsewhere. Equals
// lame_dos(E - (1+k^2)/3, k) by the shift W = V_k + (1+k^2)/3.
inline double weierstrass_dos(double E, double k) {
  const WeierstrassTriple t = weierstrass_triple(k);
  if (E == -t.e1 || E == -t.e2 || E == -t.e3)
    throw std::domain_error("weierstrass_dos: band-edge singularity");
  const double eta = t.eta1_over_omega1;
  if (E > -t.e1 && E < -t.e2)
    return (eta - E) / (2.0 * pi * std::sqrt((t.e1 + E) * (-(t.e2 + E)) * (-(t.e3 + E))));
  if (E > -t.e3)
    return (E - eta) / (2.0 * pi * std::sqrt((t.e1 + E) * (t.e2 + E) * (t.e3 + E)));
  return 0.0;
}

// Integrated density of states N_W(E): 0 below -e1, 1/omega_1 on the gap
// [-e2, -e3], nondecreasing, with N_W' = n_W on the bands. Continuous, so
// band-edge arguments are accepted here. Partial band integrals use the
// substitutions w = -e1 + (E+e1) sin^2 (lower band; the full-band case
// switches to w = -e1 + (e1-e2) sin^2 to keep both endpoints regular) and
// w = -e3 + (E+e3) sin^2 (upper band).
inline double weierstrass_integrated_dos(double E, double k) {
  const WeierstrassTriple t = weierstrass_triple(k);
  const double eta = t.eta1_over_omega1;
  if (E <= -t.e1) return 0.0;
  if (E >= -t.e2 && E <= -t.e3) return 1.0 / t.omega1;
  if (E < -t.e2) {
    // Lower band: N_W(E) = (1/pi) Int_0^theta_E (eta - w)/sqrt(-e3 - w) dtheta
    // with w = -e1 + (e1 - e2) sin^2(theta) and theta_E = asin(sqrt((E+e1)/(e1-e2))).
    const double span = t.e1 - t.e2;
    const double thE = std::asin(std::min(1.0, std::sqrt((E + t.e1) / span)));
    auto f = [&](double th) {
      const double s = std::sin(th);
      const double w = -t.e1 + span * s * s;
      return (eta - w) / std::sqrt(-t.e3 - w);
    };
    return integrate(f, 0.0, thE, 1e-13) / pi;
  }
  // Upper band: N_W(E) = 1/omega_1 + (1/pi) Int_0^{pi/2} (w - eta)
  //   sqrt(E + e3) cos(theta) / sqrt((e1+w)(e2+w)) dtheta,
  // with w = -e3 + (E + e3) sin^2(theta).
  const double span = E + t.e3;
  auto f = [&](double th) {
    const double s = std::sin(th), cth = std::cos(th);
    const double w = -t.e3 + span * s * s;
    return (w - eta) * std::sqrt(span) * cth / std::sqrt((t.e1 + w) * (t.e2 + w));
  };
  return 1.0 / t.omega1 + integrate(f, 0.0, 0.5 * pi, 1e-13) / pi;
}

// Bundle of derived quantities for one modulus.
struct LameModel {
  double k = 0.0;
  double K = 0.0;       // complete elliptic integral K(k)
  double period = 0.0;  // l = 2K(k)
  double c = 0.0;       // mean coefficient from quadrature
  std::array<double, 3> band_edges{{-1.0, 0.0, 0.0}};
};

inline LameModel make_lame_model(double k) {
  detail::check_modulus(k, true);
  LameModel m;
  m.k = k;
  m.K = complete_elliptic_k(k);
  m.period = 2.0 * m.K;
  m.c = lame_c(k);
  m.band_edges = lame_band_edges(k);
  return m;
}

}  // namespace ltlab

#pragma once

// Adaptive Gauss-Legendre quadrature: 15-point rule with recursive interval
// halving, the error on each subinterval estimated by comparing the whole
// against the sum of its two halves.

#include <cmath>
#include <stdexcept>

namespace ltlab {

namespace detail {

// 15-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr double gl15_nodes[15] = {
    -0.987992518020485428490, -0.937273392400705904308, -0.848206583410427216201,
    -0.724417731360170047416, -0.570972172608538847537, -0.394151347077563369897,
    -0.201194093997434522301, 0.0,                      0.201194093997434522301,
    0.394151347077563369897,  0.570972172608538847537,  0.724417731360170047416,
    0.848206583410427216201,  0.937273392400705904308,  0.987992518020485428490};

inline constexpr double gl15_weights[15] = {
    0.030753241996117268355, 0.070366047488108124709, 0.107159220467171935012,
    0.139570677926154314448, 0.166269205816993933553, 0.186161000015562211026,
    0.198431485327111576456, 0.202578241925561272881, 0.198431485327111576456,
    0.186161000015562211026, 0.166269205816993933553, 0.139570677926154314448,
    0.107159220467171935012, 0.070366047488108124709, 0.030753241996117268355};

template <class F>
double gl15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 15; ++i) sum += gl15_weights[i] * f(mid + half * gl15_nodes[i]);
  return half * sum;
}

template <class F>
double adapt(const F& f, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= tol || depth >= 48) return left + right;
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1) +
         adapt(f, mid, b, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

// Integrate f over [a, b] to absolute tolerance abs_tol (or relative
// tolerance rel_tol on the first whole-interval estimate, whichever is
// larger). Intended for smooth integrands; endpoint singularities should be
// removed by substitution before calling.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-13,
                 double rel_tol = 1e-13) {
  if (!(b >= a)) throw std::invalid_argument("integrate: b >= a required");
  if (a == b) return 0.0;
  const double whole = detail::gl15(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::fabs(whole));
  return detail::adapt(f, a, b, whole, tol, 0);
}

}  // namespace ltlab

#pragma once

// Fixed-point optimization of the constrained band objective
//
//   maximize   J(V) = (1/#xi) sum_xi sum_{j<=K} (-eps_j(xi))_+^gamma
//   subject to Int_C V_-^p = I^p,   p = gamma + d/2,
//
// by the self-consistent iteration
//
//   rho_n(x)  = (1/#xi) sum_xi sum_{j<=K} (-eps_j(xi))_+^{gamma-1} |u_{j,xi}(x)|^2
//   V_{n+1}   = -a_n rho_n^{1/(p-1)},   a_n > 0 normalizing the constraint.
//
// For gamma >= 1 the discrete objective is convex in the grid potential
// (each H_xi is affine in V and eps -> (-eps)_+^gamma sums of low eigenvalues
// are concave, taken with the minus sign), and the update maximizes the
// linearization of J over the constraint set (Hoelder equality), so the
// objective trace is nondecreasing in exact arithmetic. This holds at any
// resolution provided rho is assembled from the same grid values of u that
// define dH/dV(x_i), i.e. with aliased frequencies wrapped onto the cell
// grid (eigenvector_grid_values).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltlab/bloch.hpp"
#include "ltlab/constants.hpp"
#include "ltlab/lattice.hpp"

namespace ltlab {

struct ScfConfig {
  double gamma = 1.5;
  int dim = 1;
  LatticeKind lattice = LatticeKind::line;
  int bands = 1;    // K, number of retained Bloch bands
  double norm = 5;  // I: constraint Int_C V_-^p = I^p
  int n_cell = 0;   // cell grid per axis; 0 -> dimension default
  int n_bz = 0;     // BZ grid per axis; 0 -> dimension default
  double ecut = 0;  // plane-wave cutoff; 0 -> default_ecut of the cell grid
  double tol = 1e-8;  // stop when ||V_{n+1} - V_n||_{L^p(C)} < tol
  int max_iter = 500;
  double init_width = 0.15;   // width of the initial Gaussian wells
  double init_perturb = 0.0;  // relative seeded jitter of the well depths
  unsigned long long seed = 0;
  double mixing = 0.0;  // fraction of V_n blended into V_{n+1} (0 = pure update)
  unsigned jobs = 1;    // workers for the per-xi eigensolves
  bool want_ratio_1bs = true;
  bool use_time_reversal = true;  // fold the BZ grid through xi -> -xi (V is real)

  double p() const { return gamma + 0.5 * dim; }
  int n_cell_value() const { return n_cell > 0 ? n_cell : (dim == 1 ? 64 : 24); }
  int n_bz_value() const { return n_bz > 0 ? n_bz : (dim == 1 ? 128 : 12); }
  double ecut_value(const Lattice& lat) const {
    return ecut > 0.0 ? ecut : default_ecut(lat, n_cell_value());
  }

  void validate() const {
    if (!(gamma > 1.0))
      throw std::domain_error("scf: gamma > 1 required (the update exponent gamma - 1)");
    if (!(norm > 0.0)) throw std::domain_error("scf: constraint level I must be > 0");
    if (bands < 1) throw std::domain_error("scf: band count K must be >= 1");
    if (!(tol > 0.0) || max_iter < 1) throw std::domain_error("scf: bad stopping parameters");
    if (!(mixing >= 0.0) || mixing >= 1.0) throw std::domain_error("scf: mixing must be in [0,1)");
    if (!(init_width > 0.0)) throw std::domain_error("scf: init_width must be > 0");
    make_lattice(lattice, dim);  // validates the kind/dimension pairing
  }
};

// ||a - b||_{L^p(C)} on a common grid.
inline double lp_distance(const PotentialField& a, const PotentialField& b, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += std::pow(std::fabs(a.values[i] - b.values[i]), p);
  return std::pow(a.grid.weight * s, 1.0 / p);
}

// Scale V so that Int_C V_-^p = I^p (scaling acts linearly on the negative part).
inline void normalize_to_constraint(PotentialField& V, double p, double I) {
  const double ip = potential_lp_integral(V, p);
  if (!(ip > 0.0))
    throw std::runtime_error("normalize_to_constraint: potential has no negative part");
  const double s = I / std::pow(ip, 1.0 / p);
  for (double& v : V.values) v *= s;
}

// Initial guess: minus one periodized Gaussian per motif site, normalized to
// the constraint. Deterministic given the seed; init_perturb > 0 jitters the
// relative well depths (useful to break symmetry between motif sites).
inline PotentialField init_potential(const ScfConfig& cfg) {
  cfg.validate();
  const Lattice lat = make_lattice(cfg.lattice, cfg.dim);
  std::vector<double> depth(lat.motif.size(), 1.0);
  if (cfg.init_perturb > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& a : depth) a *= 1.0 + cfg.init_perturb * u(rng);
  }
  std::vector<Vec2> centers;
  for (const Vec2& f : lat.motif) centers.push_back(lat.cartesian(f));
  const double two_w2 = 2.0 * cfg.init_width * cfg.init_width;
  // Periodization: the basis vectors have O(1) length, so +-max(3, 6 width)
  // images make the tail truncation negligible at any width.
  const int n_img = std::max(3, int(std::ceil(6.0 * cfg.init_width)));
  const int jmax = lat.dim == 2 ? n_img : 0;
  PotentialField V = make_potential(lat, cfg.n_cell_value(), [&](const Vec2& x) {
    double s = 0.0;
    for (std::size_t site = 0; site < centers.size(); ++site) {
      for (int i1 = -n_img; i1 <= n_img; ++i1) {
        for (int i2 = -jmax; i2 <= jmax; ++i2) {
          const double dx =
              x[0] - centers[site][0] - i1 * lat.basis[0][0] - i2 * lat.basis[1][0];
          const double dy =
              x[1] - centers[site][1] - i1 * lat.basis[0][1] - i2 * lat.basis[1][1];
          s += depth[site] * std::exp(-(dx * dx + dy * dy) / two_w2);
        }
      }
    }
    return -s;
  });
  normalize_to_constraint(V, cfg.p(), cfg.norm);
  return V;
}

namespace detail {

// BZ grid folded through xi -> -xi. Eigenvalues and |u|^2 of H_xi and H_{-xi}
// coincide for a real potential, so each representative counts with its
// orbit size. Index partner of j is (N - j) mod N per axis.
struct FoldedBz {
  std::vector<Vec2> xi;
  std::vector<double> mult;
  double weight = 1.0;  // 1 / N_B^d; sum_i mult_i * weight = 1
};

inline FoldedBz folded_bz_grid(const Lattice& lat, int n_b, bool fold) {
  const BZGrid full = bz_grid(lat, n_b);
  FoldedBz out;
  out.weight = full.weight;
  if (!fold) {
    out.xi = full.xi;
    out.mult.assign(full.xi.size(), 1.0);
    return out;
  }
  auto partner = [n_b](int j) { return (n_b - j) % n_b; };
  if (lat.dim == 1) {
    for (int j = 0; j < n_b; ++j) {
      const int q = partner(j);
      if (j > q) continue;
      out.xi.push_back(full.xi[std::size_t(j)]);
      out.mult.push_back(j == q ? 1.0 : 2.0);
    }
  } else {
    for (int j0 = 0; j0 < n_b; ++j0) {
      for (int j1 = 0; j1 < n_b; ++j1) {
        const int q0 = partner(j0), q1 = partner(j1);
        if (std::make_pair(j0, j1) > std::make_pair(q0, q1)) continue;
        out.xi.push_back(full.xi[std::size_t(j0) * n_b + j1]);
        out.mult.push_back((j0 == q0 && j1 == q1) ? 1.0 : 2.0);
      }
    }
  }
  return out;
}

struct BlochEval {
  BandStructure bs;
  std::vector<double> mult;
  double weight = 1.0;
};

inline BlochEval evaluate_bands(const PotentialField& V, const ScfConfig& cfg, int k_bands,
                                bool want_vectors) {
  const FoldedBz fold = folded_bz_grid(V.lattice, cfg.n_bz_value(), cfg.use_time_reversal);
  BlochEval ev;
  ev.bs = band_structure_at(V, k_bands, cfg.ecut_value(V.lattice), fold.xi, want_vectors,
                            cfg.jobs);
  ev.mult = fold.mult;
  ev.weight = fold.weight;
  return ev;
}

// Riesz mean over the lowest k_use bands of a (possibly folded) evaluation.
inline double riesz_from(const BlochEval& ev, double gamma, int k_use) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ev.bs.grid.xi.size(); ++i) {
    double part = 0.0;
    for (int j = 0; j < k_use; ++j) {
      const double e = ev.bs.value(i, j);
      if (e < 0.0) part += std::pow(-e, gamma);
    }
    sum += ev.mult[i] * part;
  }
  return ev.weight * sum;
}

}  // namespace detail

struct ScfStepResult {
  PotentialField next;
  double objective = 0.0;  // J at the input potential
  double delta_lp = 0.0;   // ||V_next - V||_{L^p(C)}
  double scale = 0.0;      // a_n
};

// One fixed-point update. Requires gamma > 1; V should satisfy the
// constraint (the output always does). The xi reduction runs in a fixed
// order, so the result is independent of cfg.jobs.
inline ScfStepResult scf_step(const PotentialField& V, const ScfConfig& cfg) {
  const double p = cfg.p();
  const int n = V.grid.n;
  const std::size_t npts = V.values.size();
  detail::BlochEval ev = detail::evaluate_bands(V, cfg, cfg.bands, true);

  ScfStepResult out;
  out.objective = detail::riesz_from(ev, cfg.gamma, cfg.bands);

  std::vector<double> rho(npts, 0.0);
  for (std::size_t i = 0; i < ev.bs.grid.xi.size(); ++i) {
    for (int j = 0; j < cfg.bands; ++j) {
      const double e = ev.bs.value(i, j);
      if (!(e < 0.0)) continue;
      const double w = ev.mult[i] * std::pow(-e, cfg.gamma - 1.0);
      const std::vector<complexd> u =
          eigenvector_grid_values(ev.bs.basis, ev.bs.vectors[i].col(j), n, V.lattice.dim);
      for (std::size_t q = 0; q < npts; ++q) rho[q] += w * std::norm(u[q]);
    }
  }
  if (!(*std::max_element(rho.begin(), rho.end()) > 0.0))
    throw std::runtime_error("scf_step: no negative spectrum (rho vanishes)");

  const double inv = 1.0 / (p - 1.0);
  PotentialField next = V;
  for (std::size_t q = 0; q < npts; ++q)
    next.values[q] = -std::pow(ev.weight * rho[q], inv);
  // a_n from the constraint; the potential is -a_n rho^{1/(p-1)} afterwards.
  const double raw = std::pow(potential_lp_integral(next, p), 1.0 / p);
  out.scale = cfg.norm / raw;
  for (double& v : next.values) v *= out.scale;
  if (cfg.mixing > 0.0) {
    // Damped variant; breaks the exact ascent property, off by default.
    for (std::size_t q = 0; q < npts; ++q)
      next.values[q] = (1.0 - cfg.mixing) * next.values[q] + cfg.mixing * V.values[q];
    normalize_to_constraint(next, p, cfg.norm);
  }
  out.delta_lp = lp_distance(next, V, p);
  out.next = std::move(next);
  return out;
}

struct OptimizationResult {
  ScfConfig config;
  PotentialField potential;
  double objective = 0.0;
  double ratio_sc = 0.0;   // J / (I^p L_sc)
  double ratio_1bs = 0.0;  // J / (I^p L_1bs); NaN when not requested
  int iterations = 0;
  std::vector<double> trace;  // J at V_0, V_1, ..., V_final
  bool converged = false;
  double residual = 0.0;  // last ||V_{n+1} - V_n||_{L^p(C)}
  double constraint_rel_error = 0.0;
  int negative_bands = 0;       // bands fully below zero among the K+1 computed
  double gap_above_bands = 0.0;  // min of band K+1 minus max of band K
  double seconds = 0.0;
  bool failed = false;  // set by sweep_I when a point throws
  std::string error;
};

// Iterate scf_step from the Gaussian guess (or a warm-start potential,
// renormalized) until the L^p change drops below tol. Returns the best
// iterate seen together with the monotone objective trace and band
// diagnostics from a K+1-band evaluation.
inline OptimizationResult optimize_point(const ScfConfig& cfg,
                                         const PotentialField* warm_start = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  OptimizationResult res;
  res.config = cfg;

  PotentialField V;
  if (warm_start != nullptr) {
    const int n = cfg.n_cell_value();
    if (warm_start->lattice.kind != cfg.lattice || warm_start->lattice.dim != cfg.dim ||
        warm_start->grid.n != n)
      throw std::invalid_argument("optimize_point: warm-start grid does not match config");
    V = *warm_start;
    normalize_to_constraint(V, cfg.p(), cfg.norm);
  } else {
    V = init_potential(cfg);
  }

  double best = -1.0;
  PotentialField best_v = V;
  for (int it = 0; it < cfg.max_iter; ++it) {
    ScfStepResult step = scf_step(V, cfg);
    res.trace.push_back(step.objective);
    if (step.objective > best) {
      best = step.objective;
      best_v = V;
    }
    res.iterations = it + 1;
    res.residual = step.delta_lp;
    V = std::move(step.next);
    if (step.delta_lp < cfg.tol) {
      res.converged = true;
      break;
    }
  }

  // Objective and band diagnostics at the final iterate (K+1 bands so the
  // gap above the retained bands is visible).
  const int k_diag = cfg.bands + 1;
  detail::BlochEval ev = detail::evaluate_bands(V, cfg, k_diag, false);
  const double j_final = detail::riesz_from(ev, cfg.gamma, cfg.bands);
  res.trace.push_back(j_final);
  if (j_final >= best) {
    res.objective = j_final;
    res.potential = std::move(V);
  } else {
    // Numerically the trace can dip by rounding; hand back the best iterate.
    res.objective = best;
    res.potential = std::move(best_v);
  }
  for (int j = 0; j < k_diag; ++j)
    if (band_max(ev.bs, j) < 0.0) ++res.negative_bands;
  res.gap_above_bands = band_min(ev.bs, k_diag - 1) - band_max(ev.bs, k_diag - 2);

  const double ipow = std::pow(cfg.norm, cfg.p());
  res.constraint_rel_error =
      std::fabs(potential_lp_integral(res.potential, cfg.p()) - ipow) / ipow;
  res.ratio_sc = res.objective / (ipow * semiclassical_constant(cfg.gamma, cfg.dim));
  res.ratio_1bs = cfg.want_ratio_1bs
                      ? res.objective / (ipow * one_bound_state_constant(cfg.gamma, cfg.dim))
                      : std::numeric_limits<double>::quiet_NaN();
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Optimize along a list of constraint levels. With warm_start each point
// starts from the previous converged potential (renormalized); otherwise the
// points are independent. Per-point failures are recorded and the sweep
// continues.
inline std::vector<OptimizationResult> sweep_I(const ScfConfig& base,
                                               const std::vector<double>& i_list,
                                               bool warm_start = false) {
  std::vector<OptimizationResult> out;
  std::optional<PotentialField> prev;
  for (double I : i_list) {
    ScfConfig cfg = base;
    cfg.norm = I;
    try {
      OptimizationResult r =
          optimize_point(cfg, warm_start && prev ? &*prev : nullptr);
      if (warm_start) prev = r.potential;
      out.push_back(std::move(r));
    } catch (const std::exception& ex) {
      OptimizationResult r;
      r.config = cfg;
      r.failed = true;
      r.error = ex.what();
      out.push_back(std::move(r));
    }
  }
  return out;
}

struct CriticalGammaResult {
  double gamma_star = 0.0;
  double i_star = 0.0;
  double max_ratio = 0.0;  // max_I ratio_sc at gamma_star
  int evaluations = 0;
  std::vector<std::array<double, 3>> trace;  // (gamma, I, ratio_sc) per evaluation
};

namespace detail {

// Bisection on g(gamma) = max_{I in window} ratio(gamma, I) - 1, inner
// maximization by golden section. Factored over the evaluation callback so
// the search logic is testable without running optimizations.
template <class Eval>
CriticalGammaResult critical_gamma_search(Eval&& ratio_at, double gamma_lo, double gamma_hi,
                                          double i_lo, double i_hi, double gamma_tol,
                                          double i_tol) {
  if (!(gamma_lo < gamma_hi) || !(i_lo < i_hi) || !(gamma_tol > 0.0) || !(i_tol > 0.0))
    throw std::invalid_argument("critical_gamma: bad brackets or tolerances");
  CriticalGammaResult res;
  auto eval = [&](double g, double I) {
    const double r = ratio_at(g, I);
    ++res.evaluations;
    res.trace.push_back({g, I, r});
    return r;
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  auto max_over_i = [&](double g, double& i_best) {
    double a = i_lo, b = i_hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = eval(g, c), fd = eval(g, d);
    while (b - a > i_tol) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = eval(g, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = eval(g, d);
      }
    }
    i_best = fc >= fd ? c : d;
    return std::max(fc, fd);
  };
  double i_at_lo = 0.0, i_at_hi = 0.0;
  const double f_lo = max_over_i(gamma_lo, i_at_lo) - 1.0;
  const double f_hi = max_over_i(gamma_hi, i_at_hi) - 1.0;
  if (!(f_lo > 0.0) || !(f_hi < 0.0))
    throw std::runtime_error("critical_gamma: bracket does not straddle max ratio = 1");
  double lo = gamma_lo, hi = gamma_hi;
  double i_star = i_at_lo, ratio_star = 1.0 + f_lo;
  while (hi - lo > gamma_tol) {
    const double mid = 0.5 * (lo + hi);
    double i_mid = 0.0;
    const double fm = max_over_i(mid, i_mid) - 1.0;
    if (fm > 0.0) {
      lo = mid;
      i_star = i_mid;
      ratio_star = 1.0 + fm;
    } else {
      hi = mid;
    }
  }
  res.gamma_star = 0.5 * (lo + hi);
  res.i_star = i_star;
  res.max_ratio = ratio_star;
  return res;
}

}  // namespace detail

// Critical exponent where sup_I over the window of ratio_sc crosses 1, for a
// 2D lattice with K retained bands. Evaluations warm-start from the previous
// converged potential; the whole search is sequential and deterministic.
inline CriticalGammaResult critical_gamma(LatticeKind lattice, int k_bands, double i_lo,
                                          double i_hi, ScfConfig base, double gamma_lo,
                                          double gamma_hi, double gamma_tol = 2e-4,
                                          double i_tol = 0.25) {
  base.dim = 2;
  base.lattice = lattice;
  base.bands = k_bands;
  base.want_ratio_1bs = false;
  std::optional<PotentialField> warm;
  auto ratio_at = [&](double g, double I) {
    ScfConfig cfg = base;
    cfg.gamma = g;
    cfg.norm = I;
    OptimizationResult r = optimize_point(cfg, warm ? &*warm : nullptr);
    warm = r.potential;
    return r.ratio_sc;
  };
  return detail::critical_gamma_search(ratio_at, gamma_lo, gamma_hi, i_lo, i_hi, gamma_tol,
                                       i_tol);
}

}  // namespace ltlab

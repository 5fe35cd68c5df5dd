#pragma once

// Plane-wave discretization of H_xi = |-i grad + xi|^2 + V on the unit
// cell: discrete Fourier representation of the potential, assembly of the
// Hermitian Bloch matrices, band structures over a BZ grid, Riesz means and
// potential L^p integrals (the two sides of the periodic Lieb-Thirring
// quotient).
//
// The discretization is spectral: the potential lives on the N_C^d cell
// grid and enters the matrix through its discrete Fourier coefficients with
// aliased differences wrapped modulo the grid. Eigenvector values on the
// cell grid are synthesized through the same wrapping, which keeps the
// quadratic form <u, V u> exactly consistent with the grid Riemann sum.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ltlab/lattice.hpp"
#include "ltlab/parallel.hpp"

namespace ltlab {

using complexd = std::complex<double>;

// Real periodic potential sampled on the regular cell grid (row-major).
struct PotentialField {
  Lattice lattice;
  CellGrid grid;
  std::vector<double> values;

  void validate() const {
    const std::size_t expected = grid.size();
    if (values.size() != expected)
      throw std::invalid_argument("PotentialField: value count does not match grid");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("PotentialField: non-finite value");
  }
};

template <class F>
PotentialField make_potential(const Lattice& lat, int n_c, F&& f) {
  PotentialField V;
  V.lattice = lat;
  V.grid = cell_grid(lat, n_c);
  V.values.reserve(V.grid.size());
  for (const Vec2& x : V.grid.points) V.values.push_back(f(x));
  return V;
}

inline PotentialField constant_potential(const Lattice& lat, int n_c, double value) {
  return make_potential(lat, n_c, [value](const Vec2&) { return value; });
}

// Discrete Fourier data on the N^d frequency grid (same row-major layout).
struct FourierField {
  int n = 1;
  int dim = 1;
  std::vector<complexd> c;
};

namespace detail {

// Twiddle table w[t] = exp(-2 pi i t / N) with exact conjugate symmetry
// w[N-t] = conj(w[t]) so that real input yields exactly Hermitian matrices.
inline std::vector<complexd> twiddles(int n) {
  std::vector<complexd> w(n);
  w[0] = {1.0, 0.0};
  for (int t = 1; t <= n / 2; ++t) {
    const double ang = -2.0 * pi * double(t) / double(n);
    w[t] = {std::cos(ang), std::sin(ang)};
  }
  for (int t = n / 2 + 1; t < n; ++t) w[t] = std::conj(w[n - t]);
  return w;
}

// One-axis DFT: out[m] = sum_j in[j] w[(m j) mod N], applied separably.
template <class In>
void dft_axis(const In* in, complexd* out, int n, int stride, const std::vector<complexd>& w) {
  for (int m = 0; m < n; ++m) {
    complexd acc{0.0, 0.0};
    for (int j = 0; j < n; ++j) acc += complexd(in[j * stride]) * w[std::size_t(m) * j % n];
    out[m] = acc;
  }
}

}  // namespace detail

// Forward transform: c[m] = (1/N^d) sum_j V[j] exp(-2 pi i m.j / N).
// Real input gives c[-m] = conj(c[m]).
inline FourierField potential_fourier(const PotentialField& V) {
  V.validate();
  const int n = V.grid.n;
  const auto w = detail::twiddles(n);
  FourierField F;
  F.n = n;
  F.dim = V.grid.dim;
  if (F.dim == 1) {
    F.c.resize(n);
    detail::dft_axis(V.values.data(), F.c.data(), n, 1, w);
    for (auto& z : F.c) z /= double(n);
    return F;
  }
  // 2D: transform the inner axis, then the outer one.
  std::vector<complexd> tmp(std::size_t(n) * n);
  for (int j0 = 0; j0 < n; ++j0)
    detail::dft_axis(V.values.data() + std::size_t(j0) * n, tmp.data() + std::size_t(j0) * n, n,
                     1, w);
  F.c.resize(std::size_t(n) * n);
  std::vector<complexd> col(n), out(n);
  for (int m1 = 0; m1 < n; ++m1) {
    for (int j0 = 0; j0 < n; ++j0) col[j0] = tmp[std::size_t(j0) * n + m1];
    detail::dft_axis(col.data(), out.data(), n, 1, w);
    for (int m0 = 0; m0 < n; ++m0) F.c[std::size_t(m0) * n + m1] = out[m0] / double(n * n);
  }
  return F;
}

// Synthesis on the grid: values[j] = sum_m c[m] exp(+2 pi i m.j / N).
inline std::vector<complexd> fourier_synthesis(const FourierField& F) {
  const int n = F.n;
  auto w = detail::twiddles(n);
  for (auto& z : w) z = std::conj(z);  // +i convention
  if (F.dim == 1) {
    std::vector<complexd> out(n);
    detail::dft_axis(F.c.data(), out.data(), n, 1, w);
    return out;
  }
  std::vector<complexd> tmp(std::size_t(n) * n), out(std::size_t(n) * n);
  for (int m0 = 0; m0 < n; ++m0)
    detail::dft_axis(F.c.data() + std::size_t(m0) * n, tmp.data() + std::size_t(m0) * n, n, 1, w);
  std::vector<complexd> col(n), res(n);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int m0 = 0; m0 < n; ++m0) col[m0] = tmp[std::size_t(m0) * n + j1];
    detail::dft_axis(col.data(), res.data(), n, 1, w);
    for (int j0 = 0; j0 < n; ++j0) out[std::size_t(j0) * n + j1] = res[j0];
  }
  return out;
}

struct EigensolverError : std::runtime_error {
  Vec2 xi;
  explicit EigensolverError(const Vec2& xi_in)
      : std::runtime_error("eigensolver failed at xi = (" + std::to_string(xi_in[0]) + ", " +
                           std::to_string(xi_in[1]) + ")"),
        xi(xi_in) {}
};

// Bloch matrix A[a,b] = |G_a + xi|^2 delta_ab + Vhat(G_a - G_b), with the
// Fourier difference wrapped modulo the cell grid.
inline Eigen::MatrixXcd build_h_xi(const FourierField& Vhat, const PlaneWaveBasis& basis,
                                   const Vec2& xi) {
  const int n = Vhat.n;
  const int m = int(basis.size());
  const std::size_t expected = Vhat.dim == 1 ? std::size_t(n) : std::size_t(n) * n;
  if (Vhat.c.size() != expected)
    throw std::invalid_argument("build_h_xi: potential grid mismatch");
  auto wrap = [n](int z) {
    int r = z % n;
    return r < 0 ? r + n : r;
  };
  Eigen::MatrixXcd H(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const int d0 = wrap(basis.z[a][0] - basis.z[b][0]);
      const std::size_t idx = Vhat.dim == 1
                                  ? std::size_t(d0)
                                  : std::size_t(d0) * n + wrap(basis.z[a][1] - basis.z[b][1]);
      H(a, b) = Vhat.c[idx];
    }
    const double gx = basis.g[a][0] + xi[0];
    const double gy = basis.g[a][1] + xi[1];
    H(a, a) += gx * gx + gy * gy;
  }
  return H;
}

inline double max_asymmetry(const Eigen::MatrixXcd& H) {
  return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

// K lowest Bloch eigenvalues (ascending) per quasimomentum, optionally with
// the plane-wave eigenvector columns.
struct BandStructure {
  BZGrid grid;
  PlaneWaveBasis basis;
  int bands = 0;
  bool has_vectors = false;
  std::vector<double> eps;                // [i_xi * bands + j]
  std::vector<Eigen::MatrixXcd> vectors;  // per xi: basis.size() x bands

  double value(std::size_t i_xi, int j) const { return eps[i_xi * bands + j]; }
};

// Diagonalize H_xi on an explicit list of quasimomenta. xi solves are
// distributed over `jobs` workers; each solve writes only its own slot, so
// the result is independent of worker count.
inline BandStructure band_structure_at(const PotentialField& V, int k_bands, double e_cut,
                                       const std::vector<Vec2>& xis, bool want_vectors,
                                       unsigned jobs = 1) {
  const PlaneWaveBasis basis = dual_vectors(V.lattice, e_cut);
  const int m = int(basis.size());
  if (k_bands < 1 || k_bands > m)
    throw std::invalid_argument("band_structure_at: need 1 <= K <= basis size " +
                                std::to_string(m));
  const FourierField Vhat = potential_fourier(V);
  BandStructure out;
  out.grid.n = 0;
  out.grid.dim = V.lattice.dim;
  out.grid.xi = xis;
  out.grid.weight = xis.empty() ? 0.0 : 1.0 / double(xis.size());
  out.basis = basis;
  out.bands = k_bands;
  out.has_vectors = want_vectors;
  out.eps.assign(xis.size() * std::size_t(k_bands), 0.0);
  if (want_vectors) out.vectors.assign(xis.size(), Eigen::MatrixXcd());
  parallel_for(xis.size(), jobs, [&](std::size_t i) {
    const Eigen::MatrixXcd H = build_h_xi(Vhat, basis, xis[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        H, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw EigensolverError(xis[i]);
    for (int j = 0; j < k_bands; ++j) out.eps[i * std::size_t(k_bands) + j] = solver.eigenvalues()[j];
    if (want_vectors) out.vectors[i] = solver.eigenvectors().leftCols(k_bands);
  });
  return out;
}

// K lowest bands over the Gamma-centered N_B^d grid.
inline BandStructure lowest_bands(const PotentialField& V, int k_bands, int n_b, double e_cut,
                                  bool want_vectors, unsigned jobs = 1) {
  const BZGrid grid = bz_grid(V.lattice, n_b);
  BandStructure out = band_structure_at(V, k_bands, e_cut, grid.xi, want_vectors, jobs);
  out.grid = grid;
  return out;
}

// Trace per unit volume: (1/#xi) sum_xi sum_{j<=K} max(0, -eps_j(xi))^gamma.
inline double riesz_mean(const BandStructure& bands, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("riesz_mean: gamma > 0 required");
  double sum = 0.0;
  for (double e : bands.eps)
    if (e < 0.0) sum += std::pow(-e, gamma);
  return sum / double(bands.grid.size());
}

// Grid Riemann sum of Int_C V_-(x)^p dx (unit cell volume 1).
inline double potential_lp_integral(const PotentialField& V, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("potential_lp_integral: p > 0 required");
  double sum = 0.0;
  for (double v : V.values)
    if (v < 0.0) sum += std::pow(-v, p);
  return sum * V.grid.weight;
}

inline double band_min(const BandStructure& b, int j) {
  double lo = b.eps[j];
  for (std::size_t i = 0; i < b.grid.size(); ++i) lo = std::min(lo, b.value(i, j));
  return lo;
}

inline double band_max(const BandStructure& b, int j) {
  double hi = b.eps[j];
  for (std::size_t i = 0; i < b.grid.size(); ++i) hi = std::max(hi, b.value(i, j));
  return hi;
}

// Grid values of the Bloch eigenvector u(x_j) = sum_G c_G exp(i G . x_j),
// synthesized with aliased frequencies wrapped onto the cell grid.
inline std::vector<complexd> eigenvector_grid_values(const PlaneWaveBasis& basis,
                                                     const Eigen::VectorXcd& coeffs, int n_c,
                                                     int dim) {
  FourierField F;
  F.n = n_c;
  F.dim = dim;
  F.c.assign(dim == 1 ? std::size_t(n_c) : std::size_t(n_c) * n_c, {0.0, 0.0});
  auto wrap = [n_c](int z) {
    int r = z % n_c;
    return r < 0 ? r + n_c : r;
  };
  for (std::size_t a = 0; a < basis.size(); ++a) {
    const std::size_t idx = dim == 1 ? std::size_t(wrap(basis.z[a][0]))
                                     : std::size_t(wrap(basis.z[a][0])) * n_c +
                                           wrap(basis.z[a][1]);
    F.c[idx] += coeffs[Eigen::Index(a)];
  }
  return fourier_synthesis(F);
}

}  // namespace ltlab

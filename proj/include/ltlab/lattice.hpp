#pragma once

// Bravais lattices normalized to unit-cell volume 1, their dual lattices,
// and the regular sampling grids (unit cell and Brillouin zone) plus the
// truncated plane-wave index set used by the Bloch solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltlab {

inline constexpr double pi = std::numbers::pi;

// 2-component vector; d = 1 objects keep the second component at zero.
using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Vec2& a) { return dot(a, a); }

enum class LatticeKind { line, square, triangular, honeycomb };

inline std::string to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::line: return "line";
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "triangular";
    case LatticeKind::honeycomb: return "honeycomb";
  }
  return "?";
}

inline LatticeKind lattice_kind_from_string(const std::string& s) {
  if (s == "line") return LatticeKind::line;
  if (s == "square") return LatticeKind::square;
  if (s == "triangular") return LatticeKind::triangular;
  if (s == "honeycomb") return LatticeKind::honeycomb;
  throw std::invalid_argument("unknown lattice kind: " + s);
}

// Bravais lattice with |det(basis)| = 1 and dual basis b_i . v_j = 2 pi d_ij.
// The motif lists the fractional coordinates of the Gaussian sites used by
// the optimizer's initial potential (one site, except two for honeycomb).
struct Lattice {
  int dim = 1;
  LatticeKind kind = LatticeKind::line;
  std::array<Vec2, 2> basis{{{1.0, 0.0}, {0.0, 1.0}}};
  std::array<Vec2, 2> dual{{{2.0 * pi, 0.0}, {0.0, 2.0 * pi}}};
  std::vector<Vec2> motif{{0.0, 0.0}};

  // Cartesian point of fractional coordinates f.
  Vec2 cartesian(const Vec2& f) const {
    return {f[0] * basis[0][0] + f[1] * basis[1][0],
            f[0] * basis[0][1] + f[1] * basis[1][1]};
  }
};

inline double cell_volume(const Lattice& lat) {
  if (lat.dim == 1) return std::fabs(lat.basis[0][0]);
  return std::fabs(lat.basis[0][0] * lat.basis[1][1] - lat.basis[0][1] * lat.basis[1][0]);
}

// Build one of the supported lattices, normalized to unit-cell volume 1.
inline Lattice make_lattice(LatticeKind kind, int d) {
  const bool ok = (kind == LatticeKind::line && d == 1) ||
                  (kind != LatticeKind::line && d == 2);
  if (!ok) throw std::invalid_argument("unsupported lattice kind/dimension pair");
  Lattice lat;
  lat.kind = kind;
  lat.dim = d;
  if (kind == LatticeKind::line) {
    lat.basis = {{{1.0, 0.0}, {0.0, 0.0}}};
    lat.dual = {{{2.0 * pi, 0.0}, {0.0, 0.0}}};
    lat.motif = {{0.0, 0.0}};
    return lat;
  }
  if (kind == LatticeKind::square) {
    lat.basis = {{{1.0, 0.0}, {0.0, 1.0}}};
  } else {
    // Triangular Bravais lattice: vectors at 60 degrees, |v|^2 sin(60) = 1.
    const double a = std::sqrt(2.0 / std::sqrt(3.0));
    lat.basis = {{{a, 0.0}, {0.5 * a, 0.5 * std::sqrt(3.0) * a}}};
  }
  // Dual basis B = 2 pi A^{-T} (det A = 1 by construction).
  const double det = lat.basis[0][0] * lat.basis[1][1] - lat.basis[0][1] * lat.basis[1][0];
  lat.dual[0] = {2.0 * pi * lat.basis[1][1] / det, -2.0 * pi * lat.basis[1][0] / det};
  lat.dual[1] = {-2.0 * pi * lat.basis[0][1] / det, 2.0 * pi * lat.basis[0][0] / det};
  lat.motif = {{0.0, 0.0}};
  if (kind == LatticeKind::honeycomb)
    lat.motif = {{1.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 2.0 / 3.0}};
  return lat;
}

// Regular grid of N_C^d points in the unit cell, row-major (axis 0 outer),
// fractional coordinates j/N_C, uniform quadrature weight 1/N_C^d.
struct CellGrid {
  int n = 1;
  int dim = 1;
  std::vector<Vec2> points;  // Cartesian coordinates
  double weight = 1.0;
  std::size_t size() const { return points.size(); }
};

inline CellGrid cell_grid(const Lattice& lat, int n_c) {
  if (n_c < 1) throw std::invalid_argument("cell_grid: N_C >= 1 required");
  CellGrid g;
  g.n = n_c;
  g.dim = lat.dim;
  if (lat.dim == 1) {
    g.points.reserve(n_c);
    for (int j = 0; j < n_c; ++j)
      g.points.push_back(lat.cartesian({double(j) / n_c, 0.0}));
    g.weight = 1.0 / n_c;
  } else {
    g.points.reserve(std::size_t(n_c) * n_c);
    for (int j0 = 0; j0 < n_c; ++j0)
      for (int j1 = 0; j1 < n_c; ++j1)
        g.points.push_back(lat.cartesian({double(j0) / n_c, double(j1) / n_c}));
    g.weight = 1.0 / (double(n_c) * n_c);
  }
  return g;
}

// Gamma-centered uniform grid of N_B^d quasimomenta; fractional coordinates
// j/N_B mapped to [-1/2, 1/2), uniform weight 1/N_B^d (average over B).
struct BZGrid {
  int n = 1;
  int dim = 1;
  std::vector<Vec2> xi;  // Cartesian quasimomenta
  double weight = 1.0;
  std::size_t size() const { return xi.size(); }
};

inline BZGrid bz_grid(const Lattice& lat, int n_b) {
  if (n_b < 1) throw std::invalid_argument("bz_grid: N_B >= 1 required");
  auto centered = [n_b](int j) {
    double f = double(j) / n_b;
    return f >= 0.5 ? f - 1.0 : f;
  };
  BZGrid g;
  g.n = n_b;
  g.dim = lat.dim;
  if (lat.dim == 1) {
    g.xi.reserve(n_b);
    for (int j = 0; j < n_b; ++j)
      g.xi.push_back({centered(j) * lat.dual[0][0], 0.0});
    g.weight = 1.0 / n_b;
  } else {
    g.xi.reserve(std::size_t(n_b) * n_b);
    for (int j0 = 0; j0 < n_b; ++j0)
      for (int j1 = 0; j1 < n_b; ++j1) {
        const double f0 = centered(j0), f1 = centered(j1);
        g.xi.push_back({f0 * lat.dual[0][0] + f1 * lat.dual[1][0],
                        f0 * lat.dual[0][1] + f1 * lat.dual[1][1]});
      }
    g.weight = 1.0 / (double(n_b) * n_b);
  }
  return g;
}

// Truncated plane-wave set {G = sum_i z_i b_i : |G|^2 <= E_cut}, sorted by
// |G|^2 then lexicographically by the integer coordinates. Contains G = 0
// and is closed under G -> -G.
struct PlaneWaveBasis {
  double ecut = 0.0;
  std::vector<std::array<int, 2>> z;  // integer dual coordinates
  std::vector<Vec2> g;                // Cartesian G vectors
  std::vector<double> g2;             // |G|^2
  std::size_t size() const { return z.size(); }
};

inline PlaneWaveBasis dual_vectors(const Lattice& lat, double e_cut) {
  if (!(e_cut > 0.0)) throw std::invalid_argument("dual_vectors: E_cut > 0 required");
  // |z_i| = |v_i . G| / (2 pi) <= |v_i| sqrt(E_cut) / (2 pi) bounds the search box.
  const double r = std::sqrt(e_cut);
  struct Entry {
    double g2;
    std::array<int, 2> z;
    Vec2 g;
  };
  std::vector<Entry> entries;
  const int z0max = int(std::floor(std::sqrt(norm2(lat.basis[0])) * r / (2.0 * pi))) + 1;
  const int z1max = lat.dim == 1
                        ? 0
                        : int(std::floor(std::sqrt(norm2(lat.basis[1])) * r / (2.0 * pi))) + 1;
  for (int z0 = -z0max; z0 <= z0max; ++z0)
    for (int z1 = -z1max; z1 <= z1max; ++z1) {
      const Vec2 gv = {z0 * lat.dual[0][0] + z1 * lat.dual[1][0],
                       z0 * lat.dual[0][1] + z1 * lat.dual[1][1]};
      const double g2 = norm2(gv);
      if (g2 <= e_cut) entries.push_back({g2, {z0, z1}, gv});
    }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.g2 != b.g2) return a.g2 < b.g2;
    return a.z < b.z;
  });
  PlaneWaveBasis basis;
  basis.ecut = e_cut;
  basis.z.reserve(entries.size());
  basis.g.reserve(entries.size());
  basis.g2.reserve(entries.size());
  for (const auto& e : entries) {
    basis.z.push_back(e.z);
    basis.g.push_back(e.g);
    basis.g2.push_back(e.g2);
  }
  return basis;
}

// Default plane-wave cutoff: at least N_C plane waves per axis, i.e.
// sqrt(E_cut) = (N_C / 2) max_i |b_i|.
inline double default_ecut(const Lattice& lat, int n_c) {
  double bmax2 = norm2(lat.dual[0]);
  if (lat.dim == 2) bmax2 = std::max(bmax2, norm2(lat.dual[1]));
  const double s = 0.5 * n_c * std::sqrt(bmax2);
  return s * s;
}

}  // namespace ltlab

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "ltlab/bloch.hpp"

using namespace ltlab;

namespace {

PotentialField random_potential(const Lattice& lat, int n_c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Smooth-ish random field: a few low Fourier modes with random phases.
  std::vector<double> a(6), b(6), ph(6);
  for (int m = 0; m < 6; ++m) {
    a[m] = u(rng);
    b[m] = u(rng);
    ph[m] = pi * u(rng);
  }
  return make_potential(lat, n_c, [&](const Vec2& x) {
    double s = 0.0;
    for (int m = 0; m < 6; ++m)
      s += a[m] * std::cos((m + 1) * x[0] + ph[m]) +
           (lat.dim == 2 ? b[m] * std::cos((m + 1) * (x[0] + 0.7 * x[1])) : 0.0);
    return s - 1.0;
  });
}

}  // namespace

TEST_CASE("potential_fourier of a constant is a pure DC mode") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const FourierField F = potential_fourier(constant_potential(lat, 16, -3.25));
  CHECK(F.c[0].real() == Catch::Approx(-3.25).margin(1e-14));
  CHECK(F.c[0].imag() == Catch::Approx(0.0).margin(1e-16));
  for (std::size_t m = 1; m < F.c.size(); ++m) CHECK(std::abs(F.c[m]) < 1e-14);
}

TEST_CASE("fourier round trip reproduces the grid values") {
  for (auto [kind, d] : {std::pair{LatticeKind::line, 1}, {LatticeKind::square, 2}}) {
    const Lattice lat = make_lattice(kind, d);
    const PotentialField V = random_potential(lat, 12, 42u + unsigned(d));
    const std::vector<complexd> back = fourier_synthesis(potential_fourier(V));
    REQUIRE(back.size() == V.values.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].real() == Catch::Approx(V.values[i]).margin(1e-12));
      CHECK(back[i].imag() == Catch::Approx(0.0).margin(1e-12));
    }
  }
}

TEST_CASE("parseval on the cell grid") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = random_potential(lat, 24, 7u);
  const FourierField F = potential_fourier(V);
  double sum_x = 0.0, sum_k = 0.0;
  for (double v : V.values) sum_x += v * v;
  for (const complexd& c : F.c) sum_k += std::norm(c);
  CHECK(sum_x / V.values.size() == Catch::Approx(sum_k).epsilon(1e-12));
}

TEST_CASE("bloch matrices are hermitian to 1e-12") {
  for (auto [kind, d] : {std::pair{LatticeKind::line, 1}, {LatticeKind::triangular, 2}}) {
    const Lattice lat = make_lattice(kind, d);
    const PotentialField V = random_potential(lat, 10, 11u + unsigned(d));
    const FourierField Vhat = potential_fourier(V);
    const PlaneWaveBasis basis = dual_vectors(lat, default_ecut(lat, 10));
    const BZGrid grid = bz_grid(lat, 3);
    for (const Vec2& xi : grid.xi) {
      const Eigen::MatrixXcd H = build_h_xi(Vhat, basis, xi);
      CHECK(max_asymmetry(H) <= 1e-12);
    }
  }
}

TEST_CASE("time-reversal: eps(-xi) = eps(xi) for real potentials") {
  const Lattice lat = make_lattice(LatticeKind::square, 2);
  const PotentialField V = random_potential(lat, 10, 3u);
  const double ecut = default_ecut(lat, 10);
  const std::vector<Vec2> xis = {{0.4, -0.9}, {-0.4, 0.9}, {1.1, 0.3}, {-1.1, -0.3}};
  const BandStructure bs = band_structure_at(V, 4, ecut, xis, false);
  for (int j = 0; j < 4; ++j) {
    CHECK(bs.value(0, j) == Catch::Approx(bs.value(1, j)).margin(1e-10));
    CHECK(bs.value(2, j) == Catch::Approx(bs.value(3, j)).margin(1e-10));
  }
}

TEST_CASE("constant shift moves every band by the shift") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = random_potential(lat, 16, 5u);
  PotentialField W = V;
  const double shift = 2.75;
  for (double& v : W.values) v += shift;
  const double ecut = default_ecut(lat, 16);
  const std::vector<Vec2> xis = {{0.0, 0.0}, {1.0, 0.0}, {-2.2, 0.0}};
  const BandStructure a = band_structure_at(V, 5, ecut, xis, false);
  const BandStructure b = band_structure_at(W, 5, ecut, xis, false);
  for (std::size_t i = 0; i < xis.size(); ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(b.value(i, j) - a.value(i, j) == Catch::Approx(shift).margin(1e-10));
}

TEST_CASE("free bands match |G + xi|^2") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = constant_potential(lat, 16, 0.0);
  const double ecut = default_ecut(lat, 16);
  const PlaneWaveBasis basis = dual_vectors(lat, ecut);
  const Vec2 xi = {0.7, 0.0};
  const BandStructure bs = band_structure_at(V, 6, ecut, {xi}, false);
  std::vector<double> kin;
  for (std::size_t a = 0; a < basis.size(); ++a)
    kin.push_back(std::pow(basis.g[a][0] + xi[0], 2));
  std::sort(kin.begin(), kin.end());
  for (int j = 0; j < 6; ++j) CHECK(bs.value(0, j) == Catch::Approx(kin[j]).margin(1e-10));
}

TEST_CASE("variational monotonicity in the cutoff") {
  const Lattice lat = make_lattice(LatticeKind::triangular, 2);
  const PotentialField V = random_potential(lat, 12, 19u);
  const double e1 = default_ecut(lat, 12);
  const std::vector<Vec2> xis = {{0.3, 0.4}};
  const BandStructure coarse = band_structure_at(V, 4, e1, xis, false);
  const BandStructure fine = band_structure_at(V, 4, 2.0 * e1, xis, false);
  for (int j = 0; j < 4; ++j) CHECK(fine.value(0, j) <= coarse.value(0, j) + 1e-12);
}

TEST_CASE("weak-coupling gap of V = 2 cos(2 pi x) is about 2") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V =
      make_potential(lat, 32, [](const Vec2& x) { return 2.0 * std::cos(2.0 * pi * x[0]); });
  // At the BZ edge the two lowest free states split by 2 |V_1| = 2.
  const BandStructure bs =
      band_structure_at(V, 2, default_ecut(lat, 32), {{-pi, 0.0}}, false);
  const double gap = bs.value(0, 1) - bs.value(0, 0);
  CHECK(gap == Catch::Approx(2.0).epsilon(0.1));
}

TEST_CASE("band extrema and riesz mean of a constant well") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const double mu = 0.8 * pi * pi;
  const PotentialField V = constant_potential(lat, 16, -mu);
  const BandStructure bs = lowest_bands(V, 1, 64, default_ecut(lat, 16), false);
  CHECK(band_min(bs, 0) == Catch::Approx(-mu).margin(1e-10));
  // eps(xi) = xi^2 - mu on the first band; max on the grid is at |xi| = pi.
  CHECK(band_max(bs, 0) == Catch::Approx(pi * pi - mu).margin(1e-10));
  const double j = riesz_mean(bs, 1.5);
  CHECK(j > 0.0);
  CHECK(j < std::pow(mu, 1.5));
}

TEST_CASE("riesz_mean ignores nonnegative eigenvalues") {
  BandStructure bs;
  bs.bands = 2;
  bs.grid.dim = 1;
  bs.grid.xi = {{0.0, 0.0}, {1.0, 0.0}};
  bs.grid.weight = 0.5;
  bs.eps = {-4.0, 1.0, -1.0, 5.0};
  CHECK(riesz_mean(bs, 1.5) == Catch::Approx(0.5 * (8.0 + 1.0)).epsilon(1e-14));
}

TEST_CASE("potential_lp_integral uses only the negative part") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  PotentialField V = constant_potential(lat, 8, 0.0);
  V.values = {-2.0, 3.0, -1.0, 0.0, -2.0, 0.5, -1.0, 7.0};
  const double got = potential_lp_integral(V, 2.0);
  CHECK(got == Catch::Approx((4.0 + 1.0 + 4.0 + 1.0) / 8.0).epsilon(1e-14));
}

TEST_CASE("eigenvector grid synthesis handles plane waves and aliasing") {
  PlaneWaveBasis basis;
  basis.z = {{0, 0}, {3, 0}, {-5, 0}};
  Eigen::VectorXcd c(3);

  // A single plane wave lands on exp(i G x).
  c << 0.0, 1.0, 0.0;
  const int n = 8;
  auto vals = eigenvector_grid_values(basis, c, n, 1);
  for (int j = 0; j < n; ++j) {
    const double arg = 2.0 * pi * 3.0 * j / n;
    CHECK(vals[j].real() == Catch::Approx(std::cos(arg)).margin(1e-13));
    CHECK(vals[j].imag() == Catch::Approx(std::sin(arg)).margin(1e-13));
  }

  // z = -5 wraps to the same grid mode as z = 3 on an 8-point grid.
  c << 0.0, 0.0, 1.0;
  auto alias = eigenvector_grid_values(basis, c, n, 1);
  for (int j = 0; j < n; ++j) {
    CHECK(alias[j].real() == Catch::Approx(vals[j].real()).margin(1e-13));
    CHECK(alias[j].imag() == Catch::Approx(vals[j].imag()).margin(1e-13));
  }
}

TEST_CASE("band_structure_at is independent of the worker count") {
  const Lattice lat = make_lattice(LatticeKind::square, 2);
  const PotentialField V = random_potential(lat, 8, 23u);
  const double ecut = default_ecut(lat, 8);
  const BZGrid grid = bz_grid(lat, 4);
  const BandStructure s1 = band_structure_at(V, 3, ecut, grid.xi, true, 1);
  const BandStructure s4 = band_structure_at(V, 3, ecut, grid.xi, true, 4);
  REQUIRE(s1.eps.size() == s4.eps.size());
  for (std::size_t i = 0; i < s1.eps.size(); ++i) CHECK(s1.eps[i] == s4.eps[i]);
  for (std::size_t i = 0; i < s1.vectors.size(); ++i)
    CHECK((s1.vectors[i] - s4.vectors[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lowest_bands validates the band count") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = constant_potential(lat, 8, -1.0);
  CHECK_THROWS_AS(lowest_bands(V, 0, 4, default_ecut(lat, 8), false),
                  std::invalid_argument);
  CHECK_THROWS_AS(lowest_bands(V, 10000, 4, default_ecut(lat, 8), false),
                  std::invalid_argument);
}

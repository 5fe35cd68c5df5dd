#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "ltlab/scf.hpp"

using namespace ltlab;

namespace {

ScfConfig line_config() {
  ScfConfig cfg;
  cfg.gamma = 1.5;
  cfg.dim = 1;
  cfg.lattice = LatticeKind::line;
  cfg.bands = 1;
  cfg.norm = 5.0;
  cfg.n_cell = 32;
  cfg.n_bz = 32;
  return cfg;
}

PotentialField roll(const PotentialField& V, int shift) {
  PotentialField out = V;
  const int n = V.grid.n;
  for (int i = 0; i < n; ++i) out.values[i] = V.values[(i + shift) % n];
  return out;
}

}  // namespace

TEST_CASE("config validation and defaults") {
  ScfConfig cfg = line_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.p() == Catch::Approx(2.0).margin(1e-15));

  ScfConfig bad = cfg;
  bad.gamma = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.mixing = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.norm = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = cfg;
  bad.lattice = LatticeKind::square;  // dim stays 1: invalid pairing
  CHECK_THROWS(bad.validate());

  ScfConfig d1, d2;
  d2.dim = 2;
  d2.lattice = LatticeKind::triangular;
  CHECK(d1.n_cell_value() == 64);
  CHECK(d1.n_bz_value() == 128);
  CHECK(d2.n_cell_value() == 24);
  CHECK(d2.n_bz_value() == 12);
}

TEST_CASE("normalization and lp distance") {
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  PotentialField V = constant_potential(lat, 8, 0.0);
  V.values = {-1.0, -2.0, 0.5, -1.0, 0.0, -3.0, 1.0, -0.5};
  normalize_to_constraint(V, 2.0, 4.0);
  CHECK(potential_lp_integral(V, 2.0) == Catch::Approx(16.0).epsilon(1e-13));

  PotentialField P = constant_potential(lat, 8, 1.0);
  CHECK_THROWS_AS(normalize_to_constraint(P, 2.0, 4.0), std::runtime_error);

  PotentialField W = V;
  for (double& v : W.values) v += 0.25;
  CHECK(lp_distance(W, V, 2.0) == Catch::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("initial potential satisfies the constraint") {
  for (auto kind : {LatticeKind::line, LatticeKind::triangular, LatticeKind::honeycomb}) {
    ScfConfig cfg;
    cfg.lattice = kind;
    cfg.dim = kind == LatticeKind::line ? 1 : 2;
    cfg.gamma = 1.5;
    cfg.norm = 7.0;
    const PotentialField V = init_potential(cfg);
    CHECK(potential_lp_integral(V, cfg.p()) ==
          Catch::Approx(std::pow(7.0, cfg.p())).epsilon(1e-12));
    for (double v : V.values) CHECK(v <= 0.0);
  }
}

TEST_CASE("honeycomb initial guess has two symmetric wells") {
  ScfConfig cfg;
  cfg.lattice = LatticeKind::honeycomb;
  cfg.dim = 2;
  const PotentialField V = init_potential(cfg);
  const int n = cfg.n_cell_value();
  REQUIRE(n == 24);
  // Motif sites (1/3, 1/3) and (2/3, 2/3) land on grid nodes 8 and 16.
  const double at1 = V.values[std::size_t(8) * n + 8];
  const double at2 = V.values[std::size_t(16) * n + 16];
  const double vmin = *std::min_element(V.values.begin(), V.values.end());
  CHECK(at1 == Catch::Approx(at2).epsilon(1e-12));
  CHECK(at1 <= 0.9 * vmin);
  // The cell origin sits between the wells; the tails are negligible there.
  CHECK(std::fabs(V.values[0]) < 0.01 * std::fabs(vmin));
}

TEST_CASE("very wide wells flatten to a constant") {
  ScfConfig cfg = line_config();
  cfg.init_width = 50.0;
  const PotentialField V = init_potential(cfg);
  const auto [lo, hi] = std::minmax_element(V.values.begin(), V.values.end());
  CHECK((*hi - *lo) < 1e-6 * std::fabs(*lo));
}

TEST_CASE("initial potential is deterministic in the seed") {
  ScfConfig cfg;
  cfg.lattice = LatticeKind::honeycomb;
  cfg.dim = 2;
  cfg.n_cell = 12;
  cfg.init_perturb = 0.2;
  cfg.seed = 1;
  const PotentialField a = init_potential(cfg);
  const PotentialField b = init_potential(cfg);
  for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == b.values[i]);
  cfg.seed = 2;
  const PotentialField c = init_potential(cfg);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    diff = std::max(diff, std::fabs(a.values[i] - c.values[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("folded BZ grid covers the full grid with multiplicities") {
  const Lattice line = make_lattice(LatticeKind::line, 1);
  const auto f1 = detail::folded_bz_grid(line, 8, true);
  REQUIRE(f1.xi.size() == 5);
  double total = 0.0;
  for (double m : f1.mult) total += m;
  CHECK(total * f1.weight == Catch::Approx(1.0).margin(1e-15));
  CHECK(f1.mult.front() == 1.0);  // Gamma is self-paired
  CHECK(f1.mult.back() == 1.0);   // and so is the BZ edge for even N_B

  const Lattice tri = make_lattice(LatticeKind::triangular, 2);
  const auto f2 = detail::folded_bz_grid(tri, 3, true);
  REQUIRE(f2.xi.size() == 5);
  total = 0.0;
  for (double m : f2.mult) total += m;
  CHECK(total * f2.weight == Catch::Approx(1.0).margin(1e-15));

  const auto full = detail::folded_bz_grid(tri, 3, false);
  CHECK(full.xi.size() == 9);
  for (double m : full.mult) CHECK(m == 1.0);
}

TEST_CASE("constant potential is a fixed point when the band stays simple") {
  // At I = 5 < pi^2 the first band of V = -5 is negative only away from the
  // BZ edge, so the update reproduces the constant exactly (p = 2 here).
  ScfConfig cfg = line_config();
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = constant_potential(lat, 32, -5.0);
  const ScfStepResult step = scf_step(V, cfg);
  CHECK(step.delta_lp < 1e-12);

  // Independent objective: eps(xi) = xi^2 - 5 on the first band.
  const BZGrid grid = bz_grid(lat, 32);
  double expected = 0.0;
  for (const Vec2& xi : grid.xi) {
    const double e = xi[0] * xi[0] - 5.0;
    if (e < 0.0) expected += std::pow(-e, 1.5);
  }
  expected /= double(grid.size());
  CHECK(step.objective == Catch::Approx(expected).epsilon(1e-13));
}

TEST_CASE("scf step throws when the spectrum is nonnegative") {
  ScfConfig cfg = line_config();
  const Lattice lat = make_lattice(LatticeKind::line, 1);
  const PotentialField V = constant_potential(lat, 32, 1.0);
  CHECK_THROWS_WITH(scf_step(V, cfg), Catch::Matchers::ContainsSubstring("no negative spectrum"));
}

TEST_CASE("scf step commutes with grid translations") {
  ScfConfig cfg = line_config();
  cfg.n_cell = 24;
  cfg.n_bz = 16;
  PotentialField V = init_potential(cfg);
  // Break the reflection symmetry so the comparison is not trivially aided.
  for (int i = 0; i < 24; ++i) V.values[i] *= 1.0 + 0.05 * std::sin(2.0 * pi * i / 24.0);
  normalize_to_constraint(V, cfg.p(), cfg.norm);

  const int shift = 5;
  const ScfStepResult a = scf_step(V, cfg);
  const ScfStepResult b = scf_step(roll(V, shift), cfg);
  CHECK(b.objective == Catch::Approx(a.objective).margin(1e-10));
  const PotentialField rolled = roll(a.next, shift);
  for (int i = 0; i < 24; ++i)
    CHECK(b.next.values[i] == Catch::Approx(rolled.values[i]).margin(1e-8));
}

TEST_CASE("time-reversal folding changes nothing but the work") {
  ScfConfig cfg = line_config();
  cfg.n_cell = 24;
  cfg.n_bz = 16;
  const PotentialField V = init_potential(cfg);
  ScfConfig folded = cfg, full = cfg;
  folded.use_time_reversal = true;
  full.use_time_reversal = false;
  const ScfStepResult a = scf_step(V, folded);
  const ScfStepResult b = scf_step(V, full);
  CHECK(a.objective == Catch::Approx(b.objective).epsilon(1e-11));
  for (int i = 0; i < 24; ++i)
    CHECK(a.next.values[i] == Catch::Approx(b.next.values[i]).margin(1e-9));
}

TEST_CASE("scf step is independent of the worker count") {
  ScfConfig cfg;
  cfg.gamma = 1.3;
  cfg.dim = 2;
  cfg.lattice = LatticeKind::square;
  cfg.norm = 12.0;
  cfg.n_cell = 10;
  cfg.n_bz = 6;
  const PotentialField V = init_potential(cfg);
  ScfConfig c1 = cfg, c4 = cfg;
  c1.jobs = 1;
  c4.jobs = 4;
  const ScfStepResult a = scf_step(V, c1);
  const ScfStepResult b = scf_step(V, c4);
  REQUIRE(a.objective == b.objective);
  for (std::size_t i = 0; i < a.next.values.size(); ++i)
    REQUIRE(a.next.values[i] == b.next.values[i]);
}

TEST_CASE("optimization converges with a monotone objective trace") {
  ScfConfig cfg = line_config();
  cfg.tol = 1e-9;
  cfg.max_iter = 200;
  const OptimizationResult res = optimize_point(cfg);
  CHECK(res.converged);
  CHECK(res.residual < cfg.tol);
  CHECK(res.iterations >= 2);
  CHECK(res.trace.size() == std::size_t(res.iterations) + 1);
  for (std::size_t i = 1; i < res.trace.size(); ++i)
    CHECK(res.trace[i] >= res.trace[i - 1] - 1e-10 * std::max(1.0, res.trace[i - 1]));
  CHECK(res.constraint_rel_error < 1e-10);
  // On the line the optimizer reproduces the semiclassical level at this I.
  CHECK(res.ratio_sc == Catch::Approx(1.0).margin(5e-3));
  CHECK(res.ratio_1bs > 0.0);
  CHECK(res.objective == Catch::Approx(res.ratio_sc * 25.0 * 0.1875).epsilon(1e-12));
}

TEST_CASE("warm starts are accepted and validated") {
  ScfConfig cfg = line_config();
  cfg.tol = 1e-8;
  cfg.want_ratio_1bs = false;
  const OptimizationResult first = optimize_point(cfg);
  REQUIRE(first.converged);

  ScfConfig next = cfg;
  next.norm = 6.0;
  const OptimizationResult warm = optimize_point(next, &first.potential);
  CHECK(warm.converged);
  CHECK(warm.constraint_rel_error < 1e-10);

  ScfConfig other = next;
  other.n_cell = 16;
  CHECK_THROWS_AS(optimize_point(other, &first.potential), std::invalid_argument);
}

TEST_CASE("sweep over constraint levels records results and failures") {
  ScfConfig base = line_config();
  base.n_cell = 24;
  base.n_bz = 24;
  base.tol = 1e-7;
  base.want_ratio_1bs = false;
  const std::vector<double> levels = {4.0, 5.0};

  const auto cold = sweep_I(base, levels, false);
  REQUIRE(cold.size() == 2);
  for (const auto& r : cold) {
    CHECK(!r.failed);
    CHECK(r.converged);
  }
  CHECK(cold[0].config.norm == 4.0);
  CHECK(cold[1].config.norm == 5.0);
  CHECK(cold[1].objective > cold[0].objective);

  const auto warm = sweep_I(base, levels, true);
  REQUIRE(warm.size() == 2);
  CHECK(warm[1].converged);
  CHECK(warm[1].ratio_sc == Catch::Approx(cold[1].ratio_sc).margin(1e-6));

  ScfConfig broken = base;
  broken.gamma = 0.9;  // rejected by validation inside each point
  const auto failed = sweep_I(broken, levels, false);
  REQUIRE(failed.size() == 2);
  for (const auto& r : failed) {
    CHECK(r.failed);
    CHECK(r.error.find("gamma") != std::string::npos);
  }
}

TEST_CASE("critical gamma search recovers a synthetic crossing") {
  // max over I of this ratio is 1 + 0.5 (1.3 - g), attained at I = 7.
  auto ratio = [](double g, double I) {
    return 1.0 + 0.5 * (1.3 - g) - 0.003 * (I - 7.0) * (I - 7.0);
  };
  const CriticalGammaResult res =
      detail::critical_gamma_search(ratio, 1.1, 1.6, 2.0, 12.0, 1e-3, 0.05);
  CHECK(res.gamma_star == Catch::Approx(1.3).margin(2e-3));
  CHECK(res.i_star == Catch::Approx(7.0).margin(0.2));
  CHECK(res.max_ratio == Catch::Approx(1.0).margin(2e-3));
  CHECK(res.evaluations > 0);
  CHECK(res.trace.size() == std::size_t(res.evaluations));

  auto flat = [](double, double) { return 0.5; };
  CHECK_THROWS_AS(detail::critical_gamma_search(flat, 1.1, 1.6, 2.0, 12.0, 1e-3, 0.5),
                  std::runtime_error);
  CHECK_THROWS_AS(detail::critical_gamma_search(ratio, 1.6, 1.1, 2.0, 12.0, 1e-3, 0.5),
                  std::invalid_argument);
}

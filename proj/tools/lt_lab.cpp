// lt-lab: band structures, elliptic oracles, reference constants, and
// constrained SCF optimization of periodic Schroedinger potentials, from the
// command line. Every emitted numeric uses %.12e so identical configurations
// reproduce identical files.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltlab/constants.hpp"
#include "ltlab/elliptic.hpp"
#include "ltlab/io.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/scf.hpp"
#include "ltlab/sweep.hpp"

namespace {

using namespace ltlab;

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("LT_LAB_OUT");
  return (env != nullptr && *env != '\0') ? std::filesystem::path(env)
                                          : std::filesystem::path("lt-lab-out");
}

void emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty())
    std::cout << text;
  else
    atomic_write(out_file, text);
}

struct ScfFlags {
  ScfConfig cfg;
  std::string lattice = "line";
  int dim = 0;  // 0 = infer from the lattice kind
  unsigned jobs = 0;

  void add_to(CLI::App* cmd, bool with_gamma_norm = true) {
    if (with_gamma_norm) {
      cmd->add_option("--gamma", cfg.gamma, "Riesz exponent gamma (> 1 for SCF)");
      cmd->add_option("--norm", cfg.norm, "constraint level I");
    }
    cmd->add_option("--dim", dim, "dimension 1 or 2 (default: inferred from --lattice)");
    cmd->add_option("--lattice", lattice, "line|square|triangular|honeycomb");
    cmd->add_option("--bands", cfg.bands, "retained band count K");
    cmd->add_option("--nc", cfg.n_cell, "cell grid points per axis (0 = default)");
    cmd->add_option("--nb", cfg.n_bz, "BZ grid points per axis (0 = default)");
    cmd->add_option("--ecut", cfg.ecut, "plane-wave cutoff (0 = grid default)");
    cmd->add_option("--tol", cfg.tol, "SCF stop threshold on ||V_next - V||_Lp");
    cmd->add_option("--max-iter", cfg.max_iter, "SCF iteration cap");
    cmd->add_option("--init-width", cfg.init_width, "width of the initial Gaussian wells");
    cmd->add_option("--init-perturb", cfg.init_perturb, "seeded jitter of the well depths");
    cmd->add_option("--mixing", cfg.mixing, "blend factor of V_n into V_next (0 = none)");
    cmd->add_option("--seed", cfg.seed, "seed for the initial-guess jitter");
    cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");
  }

  ScfConfig resolve() {
    cfg.lattice = lattice_kind_from_string(lattice);
    cfg.dim = dim != 0 ? dim : (cfg.lattice == LatticeKind::line ? 1 : 2);
    cfg.jobs = resolve_jobs(jobs);
    return cfg;
  }
};

int cmd_constants(double gamma, int dim, bool crossing, const std::string& out_file) {
  GammaExponent{gamma, dim}.validate();
  const double lsc = semiclassical_constant(gamma, dim);
  double l1 = std::numeric_limits<double>::quiet_NaN();
  if (gamma + 0.5 * dim > 1.0) l1 = one_bound_state_constant(gamma, dim);
  std::string csv = "gamma,d,L_sc,L_1bs,ratio_1bs_sc";
  std::string row = fmt(gamma) + ',' + std::to_string(dim) + ',' + fmt(lsc) + ',' + fmt(l1) +
                    ',' + fmt(l1 / lsc);
  if (crossing) {
    csv += ",gamma_crossing";
    row += ',' + fmt(crossing_exponent(dim));
  }
  emit(csv + '\n' + row + '\n', out_file);
  return 0;
}

int cmd_lame(std::vector<double> ks, const std::string& out_file) {
  std::string csv = "k,ell,c,edge0,edge1,edge2,riesz_mean,potential_mean,ratio,deviation\n";
  bool all_ok = true;
  for (double k : ks) {
    const LameModel m = make_lame_model(k);
    const double riesz = lame_riesz_mean(k);
    const double mean = lame_potential_mean(k);
    const double ratio = riesz / mean;
    const double dev = ratio - 3.0 / 16.0;
    if (!(std::fabs(dev) <= 1e-8)) all_ok = false;
    csv += fmt(k) + ',' + fmt(m.period) + ',' + fmt(m.c) + ',' + fmt(m.band_edges[0]) + ',' +
           fmt(m.band_edges[1]) + ',' + fmt(m.band_edges[2]) + ',' + fmt(riesz) + ',' +
           fmt(mean) + ',' + fmt(ratio) + ',' + fmt(dev) + '\n';
  }
  emit(csv, out_file);
  return all_ok ? 0 : 1;
}

enum class BandSource { constant, lame, file };

int cmd_bands(ScfFlags& flags, BandSource source, double mu, double lame_k,
              const std::string& potential_file, const std::string& out_file) {
  const ScfConfig cfg = flags.resolve();
  PotentialField V;
  if (source == BandSource::file) {
    V = load_potential(potential_file);
  } else if (source == BandSource::lame) {
    const Lattice lat = make_lattice(LatticeKind::line, 1);
    const double ell = 2.0 * complete_elliptic_k(lame_k);
    V = make_potential(lat, cfg.n_cell_value(), [&](const Vec2& x) {
      return ell * ell * lame_potential(ell * x[0], lame_k);
    });
  } else {
    const Lattice lat = make_lattice(cfg.lattice, cfg.dim);
    V = constant_potential(lat, cfg.n_cell_value(), -mu);
  }
  const BandStructure bs = lowest_bands(V, cfg.bands, cfg.n_bz_value(),
                                        cfg.ecut_value(V.lattice), false, cfg.jobs);
  emit(bands_csv(bs), out_file);
  return 0;
}

int cmd_optimize(ScfFlags& flags, const std::filesystem::path& out_dir) {
  const ScfConfig cfg = flags.resolve();
  const OptimizationResult r = optimize_point(cfg);
  std::filesystem::create_directories(out_dir);
  atomic_write(out_dir / "result.json", result_json(r));
  atomic_write(out_dir / "result.csv", sweep_csv_header() + sweep_csv_row(r));
  atomic_write(out_dir / "potential.json", potential_json(r.potential));
  atomic_write(out_dir / "potential.csv", potential_csv(r.potential));
  std::cout << "converged=" << (r.converged ? 1 : 0) << " iterations=" << r.iterations
            << " objective=" << fmt(r.objective) << " ratio_sc=" << fmt(r.ratio_sc)
            << " ratio_1bs=" << fmt(r.ratio_1bs) << " residual=" << fmt(r.residual)
            << " negative_bands=" << r.negative_bands << "\n"
            << "results in " << out_dir.string() << "\n";
  const bool ok = r.converged && r.constraint_rel_error < 1e-8;
  return ok ? 0 : 1;
}

int cmd_sweep(ScfFlags& flags, std::vector<double> gammas, std::vector<double> norms,
              bool warm_start, bool resume, const std::filesystem::path& out_dir) {
  SweepPlan plan;
  plan.base = flags.resolve();
  plan.gamma_list = gammas.empty() ? std::vector<double>{plan.base.gamma} : gammas;
  plan.norm_list = norms.empty() ? std::vector<double>{plan.base.norm} : norms;
  plan.warm_start = warm_start;
  plan.resume = resume;
  plan.out_dir = out_dir;
  plan.jobs = plan.base.jobs;
  const SweepOutcome res = run_sweep(plan, &std::cerr);
  std::cout << "computed=" << res.computed << " skipped=" << res.skipped
            << " failed=" << res.failed << " not_converged=" << res.not_converged << "\n"
            << "results in " << res.csv_path.string() << "\n";
  return res.ok() ? 0 : 1;
}

int cmd_critical_gamma(ScfFlags& flags, double i_lo, double i_hi, double gamma_lo,
                       double gamma_hi, double gamma_tol, double i_tol,
                       const std::filesystem::path& out_dir, bool write_out) {
  const ScfConfig base = flags.resolve();
  if (base.dim != 2)
    throw std::domain_error("critical-gamma: a 2D lattice is required");
  const CriticalGammaResult r = critical_gamma(base.lattice, base.bands, i_lo, i_hi, base,
                                               gamma_lo, gamma_hi, gamma_tol, i_tol);
  std::string csv = "lattice,K,gamma_star,i_star,max_ratio,evaluations\n";
  csv += to_string(base.lattice) + ',' + std::to_string(base.bands) + ',' +
         fmt(r.gamma_star) + ',' + fmt(r.i_star) + ',' + fmt(r.max_ratio) + ',' +
         std::to_string(r.evaluations) + '\n';
  std::cout << csv;
  if (write_out) {
    std::string trace = "gamma,I,ratio_sc\n";
    for (const auto& row : r.trace)
      trace += fmt(row[0]) + ',' + fmt(row[1]) + ',' + fmt(row[2]) + '\n';
    std::filesystem::create_directories(out_dir);
    atomic_write(out_dir / "critical_gamma.csv", csv);
    atomic_write(out_dir / "critical_gamma_trace.csv", trace);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lt-lab: periodic Lieb-Thirring laboratory"};
  app.require_subcommand(1);

  // constants
  auto* c_cmd = app.add_subcommand("constants", "semiclassical and one-bound-state constants");
  double c_gamma = 1.5;
  int c_dim = 1;
  bool c_crossing = false;
  std::string c_out;
  c_cmd->set_config("--config", "", "key=value config file (flags override)");
  c_cmd->add_option("--gamma", c_gamma, "Riesz exponent");
  c_cmd->add_option("--dim", c_dim, "dimension 1 or 2");
  c_cmd->add_flag("--crossing", c_crossing, "also compute the L_1bs = L_sc crossing exponent");
  c_cmd->add_option("--out", c_out, "output CSV file (default stdout)");

  // lame
  auto* l_cmd = app.add_subcommand("lame", "one-gap elliptic oracle report");
  double l_k = -1.0;
  std::vector<double> l_list;
  std::string l_out;
  l_cmd->set_config("--config", "", "key=value config file (flags override)");
  l_cmd->add_option("--k", l_k, "modulus k in (0, 1)");
  l_cmd->add_option("--k-list", l_list, "comma-separated moduli")->delimiter(',');
  l_cmd->add_option("--out", l_out, "output CSV file (default stdout)");

  // bands
  auto* b_cmd = app.add_subcommand("bands", "band structure CSV for a chosen potential");
  ScfFlags b_flags;
  b_flags.cfg.bands = 4;
  double b_mu = -1.0, b_lame_k = -1.0;
  std::string b_potential, b_out;
  b_cmd->set_config("--config", "", "key=value config file (flags override)");
  b_flags.add_to(b_cmd, false);
  auto* b_mu_opt = b_cmd->add_option("--mu", b_mu, "constant potential depth: V = -mu");
  auto* b_lk_opt = b_cmd->add_option("--lame-k", b_lame_k,
                                     "rescaled one-gap potential of modulus k on the line");
  auto* b_pf_opt = b_cmd->add_option("--potential", b_potential, "potential JSON file");
  b_mu_opt->excludes(b_lk_opt)->excludes(b_pf_opt);
  b_lk_opt->excludes(b_pf_opt);
  b_cmd->add_option("--out", b_out, "output CSV file (default stdout)");

  // optimize
  auto* o_cmd = app.add_subcommand("optimize", "SCF optimization of a single point");
  ScfFlags o_flags;
  std::string o_out;
  o_cmd->set_config("--config", "", "key=value config file (flags override)");
  o_flags.add_to(o_cmd);
  o_cmd->add_option("--out", o_out, "output directory (default $LT_LAB_OUT or lt-lab-out)");

  // sweep
  auto* s_cmd = app.add_subcommand("sweep", "resumable sweep over gamma and I lists");
  ScfFlags s_flags;
  std::vector<double> s_gammas, s_norms;
  bool s_warm = false, s_resume = false;
  std::string s_out;
  s_cmd->set_config("--config", "", "key=value config file (flags override)");
  s_flags.add_to(s_cmd);
  s_cmd->add_option("--gamma-list", s_gammas, "comma-separated gamma values")->delimiter(',');
  s_cmd->add_option("--norm-list", s_norms, "comma-separated I values")->delimiter(',');
  s_cmd->add_flag("--warm-start", s_warm, "chain each I from the previous converged potential");
  s_cmd->add_flag("--resume", s_resume, "skip points already recorded in the manifest");
  s_cmd->add_option("--out", s_out, "output directory (default $LT_LAB_OUT or lt-lab-out)");

  // critical-gamma
  auto* g_cmd = app.add_subcommand("critical-gamma",
                                   "bisection for the exponent where max_I ratio_sc = 1");
  ScfFlags g_flags;
  g_flags.lattice = "triangular";
  double g_ilo = 20.0, g_ihi = 40.0, g_glo = 1.10, g_ghi = 1.25;
  double g_gtol = 2e-4, g_itol = 0.25;
  std::string g_out;
  bool g_write = false;
  g_cmd->set_config("--config", "", "key=value config file (flags override)");
  g_flags.add_to(g_cmd, false);
  g_cmd->add_option("--i-lo", g_ilo, "lower end of the I window");
  g_cmd->add_option("--i-hi", g_ihi, "upper end of the I window");
  g_cmd->add_option("--gamma-lo", g_glo, "lower end of the gamma bracket");
  g_cmd->add_option("--gamma-hi", g_ghi, "upper end of the gamma bracket");
  g_cmd->add_option("--gamma-tol", g_gtol, "bisection tolerance in gamma");
  g_cmd->add_option("--i-tol", g_itol, "golden-section tolerance in I");
  g_cmd->add_flag("--write", g_write, "also write result and trace CSVs to --out");
  g_cmd->add_option("--out", g_out, "output directory (default $LT_LAB_OUT or lt-lab-out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_cmd->parsed()) return cmd_constants(c_gamma, c_dim, c_crossing, c_out);
    if (l_cmd->parsed()) {
      std::vector<double> ks = l_list;
      if (l_cmd->count("--k") > 0) ks.insert(ks.begin(), l_k);
      if (ks.empty()) throw CLI::ValidationError("lame", "provide --k or --k-list");
      return cmd_lame(ks, l_out);
    }
    if (b_cmd->parsed()) {
      if (b_cmd->count("--mu") + b_cmd->count("--lame-k") + b_cmd->count("--potential") != 1)
        throw CLI::ValidationError("bands", "provide exactly one of --mu, --lame-k, --potential");
      const BandSource src = b_cmd->count("--potential") > 0 ? BandSource::file
                             : b_cmd->count("--lame-k") > 0  ? BandSource::lame
                                                             : BandSource::constant;
      return cmd_bands(b_flags, src, b_mu, b_lame_k, b_potential, b_out);
    }
    if (o_cmd->parsed())
      return cmd_optimize(o_flags,
                          o_out.empty() ? default_out_dir() : std::filesystem::path(o_out));
    if (s_cmd->parsed())
      return cmd_sweep(s_flags, s_gammas, s_norms, s_warm, s_resume,
                       s_out.empty() ? default_out_dir() : std::filesystem::path(s_out));
    if (g_cmd->parsed())
      return cmd_critical_gamma(g_flags, g_ilo, g_ihi, g_glo, g_ghi, g_gtol, g_itol,
                                g_out.empty() ? default_out_dir() : std::filesystem::path(g_out),
                                g_write);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

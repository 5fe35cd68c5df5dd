#pragma once

// Deterministic result files: every numeric field is printed as %.12e, files
// are replaced atomically (temp file + rename), and reading back a %.12e
// value and reprinting it reproduces the same bytes, so assembled CSVs do
// not depend on which process computed a row.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltlab/bloch.hpp"
#include "ltlab/lattice.hpp"
#include "ltlab/scf.hpp"

namespace ltlab {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

// JSON value text for a double: %.12e, with non-finite values mapped to null.
inline std::string fmt_json(double x) { return std::isfinite(x) ? fmt(x) : "null"; }

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

// Write content to path via a temp file in the same directory plus rename,
// so readers never observe a partial file and a killed writer leaves the
// previous version intact.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    f.write(content.data(), std::streamsize(content.size()));
    f.flush();
    if (!f) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_file: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- potential fields ----

// Compact JSON object: {"lattice": "...", "n_cell": N, "values": [...]}
// with row-major grid values.
inline std::string potential_json(const PotentialField& V) {
  std::string s = "{\"lattice\":\"" + to_string(V.lattice.kind) +
                  "\",\"n_cell\":" + std::to_string(V.grid.n) + ",\"values\":[";
  for (std::size_t i = 0; i < V.values.size(); ++i) {
    if (i) s += ',';
    s += fmt(V.values[i]);
  }
  s += "]}";
  return s;
}

inline PotentialField potential_from_json(const nlohmann::json& j) {
  const LatticeKind kind = lattice_kind_from_string(j.at("lattice").get<std::string>());
  const int dim = kind == LatticeKind::line ? 1 : 2;
  const Lattice lat = make_lattice(kind, dim);
  const int n = j.at("n_cell").get<int>();
  if (n < 1) throw std::runtime_error("potential_from_json: bad n_cell");
  PotentialField V;
  V.lattice = lat;
  V.grid = cell_grid(lat, n);
  V.values = j.at("values").get<std::vector<double>>();
  V.validate();
  return V;
}

inline PotentialField load_potential(const std::filesystem::path& path) {
  return potential_from_json(nlohmann::json::parse(read_file(path)));
}

// Grid dump: index, Cartesian point, value and |value| (heat-map ready).
inline std::string potential_csv(const PotentialField& V) {
  const int dim = V.lattice.dim;
  std::string s = dim == 1 ? "i0,x0,value,abs_value\n" : "i0,i1,x0,x1,value,abs_value\n";
  const int n = V.grid.n;
  for (std::size_t q = 0; q < V.values.size(); ++q) {
    const double v = V.values[q];
    if (dim == 1) {
      s += std::to_string(q) + ',' + fmt(V.grid.points[q][0]);
    } else {
      s += std::to_string(q / std::size_t(n)) + ',' + std::to_string(q % std::size_t(n)) +
           ',' + fmt(V.grid.points[q][0]) + ',' + fmt(V.grid.points[q][1]);
    }
    s += ',' + fmt(v) + ',' + fmt(std::fabs(v)) + '\n';
  }
  return s;
}

// ---- band structures ----

inline std::string bands_csv(const BandStructure& bs) {
  const int dim = bs.grid.dim;
  std::string s = dim == 1 ? "xi0,n,eps\n" : "xi0,xi1,n,eps\n";
  for (std::size_t i = 0; i < bs.grid.xi.size(); ++i) {
    for (int j = 0; j < bs.bands; ++j) {
      s += fmt(bs.grid.xi[i][0]);
      if (dim == 2) s += ',' + fmt(bs.grid.xi[i][1]);
      s += ',' + std::to_string(j) + ',' + fmt(bs.value(i, j)) + '\n';
    }
  }
  return s;
}

// ---- optimization results ----

// Config echo with the resolved grid sizes and cutoff (what actually ran).
inline std::string config_json(const ScfConfig& cfg) {
  const Lattice lat = make_lattice(cfg.lattice, cfg.dim);
  std::string s = "{";
  s += "\"gamma\":" + fmt(cfg.gamma);
  s += ",\"dim\":" + std::to_string(cfg.dim);
  s += ",\"lattice\":\"" + to_string(cfg.lattice) + "\"";
  s += ",\"bands\":" + std::to_string(cfg.bands);
  s += ",\"norm\":" + fmt(cfg.norm);
  s += ",\"n_cell\":" + std::to_string(cfg.n_cell_value());
  s += ",\"n_bz\":" + std::to_string(cfg.n_bz_value());
  s += ",\"ecut\":" + fmt(cfg.ecut_value(lat));
  s += ",\"tol\":" + fmt(cfg.tol);
  s += ",\"max_iter\":" + std::to_string(cfg.max_iter);
  s += ",\"init_width\":" + fmt(cfg.init_width);
  s += ",\"init_perturb\":" + fmt(cfg.init_perturb);
  s += ",\"seed\":" + std::to_string(cfg.seed);
  s += ",\"mixing\":" + fmt(cfg.mixing);
  s += "}";
  return s;
}

inline std::string result_json(const OptimizationResult& r) {
  std::string s = "{\"schema\":\"lt-lab/point-v1\"";
  s += ",\"config\":" + config_json(r.config);
  s += ",\"objective\":" + fmt_json(r.objective);
  s += ",\"ratio_sc\":" + fmt_json(r.ratio_sc);
  s += ",\"ratio_1bs\":" + fmt_json(r.ratio_1bs);
  s += ",\"iterations\":" + std::to_string(r.iterations);
  s += ",\"converged\":" + std::string(r.converged ? "true" : "false");
  s += ",\"residual\":" + fmt_json(r.residual);
  s += ",\"constraint_rel_error\":" + fmt_json(r.constraint_rel_error);
  s += ",\"negative_bands\":" + std::to_string(r.negative_bands);
  s += ",\"gap_above_bands\":" + fmt_json(r.gap_above_bands);
  s += ",\"seconds\":" + fmt_json(r.seconds);
  s += ",\"failed\":" + std::string(r.failed ? "true" : "false");
  s += ",\"error\":\"" + json_escape(r.error) + "\"";
  s += ",\"trace\":[";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    if (i) s += ',';
    s += fmt_json(r.trace[i]);
  }
  s += "]";
  if (!r.failed) s += ",\"potential\":" + potential_json(r.potential);
  s += "}";
  return s;
}

// Sweep CSV schema. Wall-clock seconds stay in the per-point JSON so that
// reruns and resumed runs reproduce the CSV byte-for-byte.
inline std::string sweep_csv_header() {
  return "gamma,d,lattice,K,I,objective,ratio_sc,ratio_1bs,iterations,converged\n";
}

inline std::string sweep_csv_row(double gamma, int d, const std::string& lattice, int k_bands,
                                 double norm, double objective, double ratio_sc,
                                 double ratio_1bs, int iterations, bool converged) {
  std::string s = fmt(gamma);
  s += ',' + std::to_string(d);
  s += ',' + lattice;
  s += ',' + std::to_string(k_bands);
  s += ',' + fmt(norm);
  s += ',' + fmt(objective);
  s += ',' + fmt(ratio_sc);
  s += ',' + fmt(ratio_1bs);
  s += ',' + std::to_string(iterations);
  s += ',' + std::string(converged ? "1" : "0");
  s += '\n';
  return s;
}

inline std::string sweep_csv_row(const OptimizationResult& r) {
  return sweep_csv_row(r.config.gamma, r.config.dim, to_string(r.config.lattice),
                       r.config.bands, r.config.norm, r.objective, r.ratio_sc, r.ratio_1bs,
                       r.iterations, r.converged && !r.failed);
}

// Row rebuilt from a stored point JSON; %.12e -> double -> %.12e is
// byte-stable, so this matches the row the computing process would emit.
inline std::string sweep_csv_row(const nlohmann::json& j) {
  const auto& c = j.at("config");
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  return sweep_csv_row(c.at("gamma").get<double>(), c.at("dim").get<int>(),
                       c.at("lattice").get<std::string>(), c.at("bands").get<int>(),
                       c.at("norm").get<double>(), num(j.at("objective")),
                       num(j.at("ratio_sc")), num(j.at("ratio_1bs")),
                       j.at("iterations").get<int>(),
                       j.at("converged").get<bool>() && !j.at("failed").get<bool>());
}

}  // namespace ltlab

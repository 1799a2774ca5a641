#pragma once

// The solve / front / traj pipelines behind the command-line tool, working
// on a directory of snapshots described by a manifest.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "phjb/pareto.hpp"
#include "phjb/scenario.hpp"
#include "phjb/snapshot_io.hpp"
#include "phjb/trajectory.hpp"

namespace phjb {

namespace fs = std::filesystem;

inline std::string slice_stem(std::size_t it, std::size_t iz) {
  return "slice_t" + std::to_string(it) + "_z" + std::to_string(iz);
}

/// Marches every (t_f, z1) slice of the scenario and writes snapshots,
/// per-slice diagnostics and manifest.json into `out`. Failed slices are
/// recorded in the manifest; the others still run.
inline Manifest solve_to_dir(const Scenario& sc, const fs::path& out, unsigned threads,
                             std::ostream* log = nullptr) {
  fs::create_directories(out);
  Manifest man;
  man.scenario = sc.to_json().dump();
  man.z1s = sc.z1s;
  man.t_fs = sc.t_fs;
  SolverConfig cfg = sc.solver;
  cfg.threads = threads;
  with_model(sc, [&](const auto& model) {
    using M = std::decay_t<decltype(model)>;
    const SliceSolver<M> solver(model, sc.make_grid(), cfg);
    for (std::size_t it = 0; it < sc.t_fs.size(); ++it)
      for (std::size_t iz = 0; iz < sc.z1s.size(); ++iz) {
        ManifestEntry e;
        e.z1 = sc.z1s[iz];
        e.t_f = sc.t_fs[it];
        const std::string stem = slice_stem(it, iz);
        e.diagnostics = stem + ".csv";
        std::vector<StepDiagnostic> diag;
        try {
          MarchResult r = solver.march(e.z1, e.t_f);
          diag = std::move(r.diagnostics);
          const std::string bytes =
              encode_snapshot({r.field.grid, e.z1, e.t_f, r.field.kappa, std::move(r.field.values)});
          e.file = stem + ".phjb";
          write_file(out / e.file, bytes);
          e.checksum = hex64(fnv1a64(bytes));
          e.steps = r.steps;
          e.ok = true;
        } catch (const Error& ex) {
          e.error = ex.what();
        }
        std::ofstream d(out / e.diagnostics);
        write_diagnostics_csv(d, diag);
        if (log)
          *log << "slice z1=" << e.z1 << " t_f=" << e.t_f << ": "
               << (e.ok ? "ok, " + std::to_string(e.steps) + " steps" : "FAILED: " + e.error) << '\n';
        man.slices.push_back(std::move(e));
      }
  });
  write_file(out / "manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

struct LoadedSlices {
  Scenario scenario;
  SliceSet set;
  double z1_violation = 0.0;  // removed by the monotone envelope
};

/// Reads a manifest and its snapshots, checking every checksum, and applies
/// the monotone envelope in z1.
inline LoadedSlices load_slices(const fs::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(manifest_path.string() + ": " + ex.what());
  }
  const Manifest man = Manifest::from_json(j);
  LoadedSlices out{parse_scenario(man.scenario), {}, 0.0};
  const Grid grid = out.scenario.make_grid();
  std::vector<bool> periodic(grid.dims());
  for (std::size_t d = 0; d < grid.dims(); ++d) periodic[d] = grid.periodic(d);
  out.set.grid = grid;
  out.set.z1s = man.z1s;
  out.set.t_fs = man.t_fs;
  if (man.slices.size() != man.z1s.size() * man.t_fs.size())
    throw ConfigError("manifest: slice count does not match the schedules");
  const fs::path dir = manifest_path.parent_path();
  for (const auto& e : man.slices) {
    if (!e.ok)
      throw NumericalError("slice z1=" + std::to_string(e.z1) + " t_f=" + std::to_string(e.t_f) +
                           " failed during solve: " + e.error);
    const std::string bytes = read_file(dir / e.file);
    if (hex64(fnv1a64(bytes)) != e.checksum)
      throw ConfigError("snapshot " + e.file + ": checksum mismatch");
    Snapshot s = decode_snapshot(bytes, periodic);
    if (s.values.size() != grid.size()) throw ConfigError("snapshot " + e.file + ": grid mismatch");
    out.set.fields.push_back(std::move(s.values));
  }
  out.set.validate();
  out.z1_violation = out.set.enforce_z1_order();
  return out;
}

inline void check_state_size(const Scenario& sc, const std::vector<double>& r0) {
  if (r0.size() != sc.dims())
    throw ConfigError("r0 needs " + std::to_string(sc.dims()) + " components for mode " +
                      to_string(sc.mode) + ", got " + std::to_string(r0.size()));
}

struct FrontOutput {
  UtopianPoint utopian;
  std::vector<RaySample> sigma;
  std::vector<RaySample> front;
};

inline FrontOutput compute_front(const LoadedSlices& ls, const std::vector<double>& r0, int rays) {
  check_state_size(ls.scenario, r0);
  FrontOutput out;
  out.utopian = utopian(ls.set, r0, ls.scenario.m_max());
  out.sigma = sigma_front(ls.set, r0, out.utopian, rays);
  out.front = pareto_front(out.sigma);
  if (out.front.empty())
    throw InfeasibleError("no admissible trajectory: every ray misses the zero level of vartheta");
  return out;
}

/// Line chart of the front in objective space.
inline void write_front_svg(std::ostream& os, std::span<const RaySample> front,
                            const std::string& time_unit) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& r : front) {
    x0 = std::min(x0, r.z.z1);
    x1 = std::max(x1, r.z.z1);
    y0 = std::min(y0, r.z.z2);
    y1 = std::max(y1, r.z.z2);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double W = 480, H = 360, pad = 50;
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
  auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<polyline fill=\"none\" stroke=\"black\" points=\"" << pad << ',' << pad << ' ' << pad << ','
     << H - pad << ' ' << W - pad << ',' << H - pad << "\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">z1 = -m_final ["
     << x0 << ", " << x1 << "]</text>\n"
     << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">z2 = t_f (" << time_unit << ") [" << y0 << ", " << y1
     << "]</text>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& r : front) os << px(r.z.z1) << ',' << py(r.z.z2) << ' ';
  os << "\"/>\n";
  for (const auto& r : front)
    os << "<circle cx=\"" << px(r.z.z1) << "\" cy=\"" << py(r.z.z2) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  os << "</svg>\n";
}

struct TrajSummary {
  ObjectivePoint requested;
  ObjectivePoint achieved;
  double t_f = 0.0;
  double vartheta = 0.0;
  bool admissible = false;
  double max_g = 0.0;
  double final_nu = 0.0;
  double switch_agreement = 0.0;  // share of steps where both control paths agree on thrust on/off
  std::size_t thrust_steps = 0, coast_steps = 0;
  std::vector<std::string> failures;
  std::vector<std::string> diagnostics;
};

/// Re-marches the slice (z1, t_f*) with t_f* the vartheta minimizer, keeps
/// its kappa history, reconstructs from r0 and audits the result.
/// Writes trajectory.csv and glyphs.csv into `out` when it is non-empty.
inline TrajSummary run_traj(const Scenario& sc, const SliceSet& set, const std::vector<double>& r0,
                            ObjectivePoint z, std::size_t steps, unsigned threads,
                            const fs::path& out = {}) {
  check_state_size(sc, r0);
  const VarthetaValue v = vartheta(set, r0, z);
  if (v.value > 0.0) {
    std::ostringstream msg;
    msg << "no admissible trajectory for z = (" << z.z1 << ", " << z.z2 << "): vartheta = " << v.value
        << " > 0";
    throw InfeasibleError(msg.str());
  }
  TrajSummary sum;
  sum.requested = z;
  sum.t_f = v.t_f;
  sum.vartheta = v.value;
  SolverConfig cfg = sc.solver;
  cfg.threads = threads;
  ReconstructionConfig rc;
  rc.steps = steps;
  with_model(sc, [&](const auto& model) {
    using M = std::decay_t<decltype(model)>;
    constexpr std::size_t D = M::kDim;
    const SliceSolver<M> solver(model, sc.make_grid(), cfg);
    const MarchResult m = solver.march(z.z1, v.t_f, true);
    Vec<D> x0;
    std::copy(r0.begin(), r0.end(), x0.begin());
    const auto tr = reconstruct(model, m.history, x0, rc);
    const AuditReport rep = audit(model, tr, rc.g_tol);
    sum.achieved = rep.achieved;
    sum.admissible = rep.admissible;
    sum.max_g = rep.max_g;
    sum.final_nu = rep.final_nu;
    sum.failures = rep.failures;
    sum.diagnostics = tr.diagnostics;
    if (!tr.controls.empty())
      sum.switch_agreement = double(tr.thrust_switch_agreement) / double(tr.controls.size());
    for (const auto& u : tr.controls) (u.thrust > 0.0 ? sum.thrust_steps : sum.coast_steps)++;
    if (!out.empty()) {
      fs::create_directories(out);
      std::ofstream t(out / "trajectory.csv");
      write_trajectory_csv(t, model, tr);
      std::ofstream g(out / "glyphs.csv");
      write_glyph_csv(g, model, tr, std::max<std::size_t>(1, steps / 50));
    }
  });
  return sum;
}

inline json to_json(const TrajSummary& s) {
  return {{"requested", {s.requested.z1, s.requested.z2}},
          {"achieved", {s.achieved.z1, s.achieved.z2}},
          {"t_f", s.t_f},
          {"vartheta", s.vartheta},
          {"admissible", s.admissible},
          {"max_g", s.max_g},
          {"final_nu", s.final_nu},
          {"switch_agreement", s.switch_agreement},
          {"thrust_steps", s.thrust_steps},
          {"coast_steps", s.coast_steps},
          {"failures", s.failures},
          {"diagnostics", s.diagnostics}};
}

}  // namespace phjb

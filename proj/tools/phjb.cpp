// phjb: solve the slice family of a scenario, extract the Pareto front at an
// initial state, reconstruct a trajectory, or run the property suites.
//
// Exit codes: 0 ok, 1 other error, 2 configuration, 3 numerical failure,
// 4 infeasible query.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "phjb/verify.hpp"
#include "phjb/workflow.hpp"

using namespace phjb;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3, kInfeasible = 4 };

unsigned pick_threads(int flag, unsigned scenario) {
  if (flag >= 0) return unsigned(flag);
  if (const char* env = std::getenv("PHJB_THREADS")) {
    try {
      return unsigned(std::stoul(env));
    } catch (const std::exception&) {
      throw ConfigError(std::string("PHJB_THREADS: not a thread count: ") + env);
    }
  }
  return scenario;
}

fs::path manifest_path(const std::string& manifest, const std::string& out) {
  if (!manifest.empty()) return manifest;
  if (!out.empty()) return fs::path(out) / "manifest.json";
  throw ConfigError("give --manifest or --out");
}

std::vector<double> pick_r0(const std::vector<double>& flag, const Scenario& sc) {
  if (!flag.empty()) return flag;
  if (!sc.query.r0.empty()) return sc.query.r0;
  throw ConfigError("no initial state: give --r0 or set query.r0 in the scenario");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto fronts of low-thrust transfers from Hamilton-Jacobi-Bellman slices"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, manifest;
  int threads = -1;
  int rays = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 20240501;
  std::vector<double> r0, z;
  std::string suite;

  auto* solve = app.add_subcommand("solve", "march every (z1, t_f) slice and write snapshots");
  solve->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out_dir, "output directory")->required();
  solve->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* front = app.add_subcommand("front", "Pareto front at r0 from solved slices");
  front->add_option("--manifest", manifest, "manifest.json written by solve");
  front->add_option("--out", out_dir, "output directory (also locates manifest.json)");
  front->add_option("--r0", r0, "initial state, comma separated")->delimiter(',');
  front->add_option("--rays", rays, "number of rays");

  auto* traj = app.add_subcommand("traj", "reconstruct a transfer for an objective point z");
  traj->add_option("--manifest", manifest, "manifest.json written by solve");
  traj->add_option("--out", out_dir, "output directory (also locates manifest.json)");
  traj->add_option("--r0", r0, "initial state, comma separated")->delimiter(',');
  traj->add_option("--z", z, "objective point z1,z2")->delimiter(',')->expected(2);
  traj->add_option("--steps", steps, "reconstruction steps N");
  traj->add_option("--threads", threads, "worker threads (0 = auto)");

  auto* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", suite, "constraints, dynamics, hamiltonian, hjb, pareto, oracle or all")
      ->required();
  verify->add_option("--seed", seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) {
      const Scenario sc = load_scenario(scenario_path);
      const Manifest man = solve_to_dir(sc, out_dir, pick_threads(threads, sc.solver.threads), &std::cout);
      std::size_t failed = 0;
      for (const auto& e : man.slices) failed += !e.ok;
      std::cout << "wrote " << man.slices.size() - failed << " snapshots to " << out_dir << '\n';
      if (failed) {
        std::cerr << failed << " slice(s) failed; see manifest.json\n";
        return kNumerical;
      }
      return kOk;
    }

    if (*front) {
      const fs::path mp = manifest_path(manifest, out_dir);
      const LoadedSlices ls = load_slices(mp);
      const auto x0 = pick_r0(r0, ls.scenario);
      const int n = rays > 0 ? rays : ls.scenario.query.rays;
      const fs::path dir = out_dir.empty() ? mp.parent_path() : fs::path(out_dir);
      std::cout << "z1 envelope removed a crossing of " << ls.z1_violation << '\n';
      FrontOutput fo;
      try {
        fo = compute_front(ls, x0, n);
      } catch (const InfeasibleError& e) {
        json rep = {{"status", "infeasible"}, {"r0", x0}, {"reason", e.what()}};
        write_file(dir / "front_report.json", rep.dump(2) + "\n");
        std::cerr << e.what() << '\n';
        return kInfeasible;
      }
      std::ofstream f(dir / "front.csv"), s(dir / "sigma.csv"), svg(dir / "front.svg");
      write_front_csv(f, fo.front);
      write_front_csv(s, fo.sigma);
      write_front_svg(svg, fo.front, ls.scenario.time_unit);
      std::cout << "utopian point (" << fo.utopian.z1_star << ", " << fo.utopian.z2_star << "), "
                << fo.front.size() << " front points of " << fo.sigma.size() << " rays\n";
      return kOk;
    }

    if (*traj) {
      const fs::path mp = manifest_path(manifest, out_dir);
      const LoadedSlices ls = load_slices(mp);
      const auto x0 = pick_r0(r0, ls.scenario);
      ObjectivePoint zp;
      if (!z.empty()) zp = {z[0], z[1]};
      else if (ls.scenario.query.z) zp = {(*ls.scenario.query.z)[0], (*ls.scenario.query.z)[1]};
      else throw ConfigError("no objective point: give --z or set query.z in the scenario");
      const fs::path dir = out_dir.empty() ? mp.parent_path() : fs::path(out_dir);
      const TrajSummary sum =
          run_traj(ls.scenario, ls.set, x0, zp, steps ? steps : ls.scenario.query.steps,
                   pick_threads(threads, ls.scenario.solver.threads), dir);
      const json rep = to_json(sum);
      write_file(dir / "audit.json", rep.dump(2) + "\n");
      std::cout << rep.dump(2) << '\n';
      return sum.admissible ? kOk : kNumerical;
    }

    if (*verify) {
      bool ok = true;
      for (const auto& r : run_verify(suite, seed))
        for (const auto& c : r.checks) {
          ok = ok && c.pass;
          std::cout << (c.pass ? "PASS " : "FAIL ") << r.suite << ": " << c.name
                    << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
        }
      return ok ? kOk : kNumerical;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const OutOfRangeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}

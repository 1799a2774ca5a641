#pragma once

// Brute-force references on the toy problem: semi-Lagrangian dynamic
// programming with the exact toy flow and multilinear interpolation, the
// lattice front built from it, and a sampled trajectory-divergence check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phjb/dynamics.hpp"
#include "phjb/grid.hpp"
#include "phjb/models.hpp"
#include "phjb/parallel.hpp"
#include "phjb/pareto.hpp"

namespace phjb {

struct DpConfig {
  std::size_t steps = 0;  // 0: about one cell of travel per step
  int control_levels = 2;
  unsigned threads = 1;
  bool keep_tables = false;
};

struct DpResult {
  Grid grid;
  double z1 = 0.0;
  double t_f = 0.0;
  std::size_t steps = 0;
  std::vector<double> value;                // kappa = 0
  std::vector<char> feasible;               // value <= 0
  std::vector<std::vector<double>> tables;  // kappa = k / steps, when kept

  double value_at(std::span<const double> x) const { return grid.interpolate(value, x); }
};

inline std::size_t dp_default_steps(const ToyModel& model, const Grid& grid, double t_f) {
  const double vmax = std::max(std::abs(grid.lower(1)), std::abs(grid.upper(1)));
  const double amax = model.t_max() / grid.lower(2);
  const double cells = t_f * std::max(vmax / grid.spacing(0), amax / grid.spacing(1));
  return std::max<std::size_t>(1, std::size_t(std::ceil(cells)));
}

/// omega_k = max(g, min_u I[omega_{k+1}](Phi_u(x, t_f / K))), omega_K the
/// terminal data max(-m - z1, nu, g).
inline DpResult dp_solve(const ToyModel& model, const Grid& grid, double z1, double t_f,
                         const DpConfig& cfg = {}) {
  if (grid.dims() != 3) throw ConfigError("dp_solve: toy grid must be 3-dimensional");
  if (!(t_f >= 0.0)) throw ConfigError("dp_solve: t_f must be >= 0");
  const std::size_t n = grid.size();
  const std::size_t K = cfg.steps ? cfg.steps : dp_default_steps(model, grid, t_f);
  const double dt = t_f / double(K);
  const auto controls = model.control_sample(cfg.control_levels);
  std::vector<double> g(n), next(n), cur(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = grid.point<3>(i);
    g[i] = model.constraint(s);
    next[i] = std::max({-s[2] - z1, model.target(s), g[i]});
  }
  DpResult res;
  res.grid = grid;
  res.z1 = z1;
  res.t_f = t_f;
  res.steps = K;
  if (cfg.keep_tables) res.tables.assign(K + 1, {});
  if (cfg.keep_tables) res.tables[K] = next;
  for (std::size_t k = K; k-- > 0;) {
    parallel_for(n, cfg.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        if (g[i] > 0.0) {
          cur[i] = std::max(g[i], next[i]);
          continue;
        }
        const auto s = grid.point<3>(i);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& u : controls) {
          const auto y = model.flow(s, u, dt);
          best = std::min(best, grid.interpolate_clamped(next, y));
        }
        cur[i] = std::max(g[i], best);
      }
    });
    std::swap(cur, next);
    if (cfg.keep_tables) res.tables[k] = next;
  }
  res.value = std::move(next);
  res.feasible.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.feasible[i] = res.value[i] <= 0.0;
  return res;
}

struct OracleLattice {
  std::vector<double> z1s, t_fs;
  std::vector<char> feasible;  // [it * z1s.size() + iz]
  std::vector<ObjectivePoint> front;
};

/// Feasibility of r0 on the (z1, t_f) lattice, then the non-dominated
/// feasible lattice points.
inline OracleLattice oracle_front(const ToyModel& model, const Grid& grid,
                                  std::span<const double> r0, std::span<const double> z1s,
                                  std::span<const double> t_fs, const DpConfig& cfg = {}) {
  OracleLattice out;
  out.z1s.assign(z1s.begin(), z1s.end());
  out.t_fs.assign(t_fs.begin(), t_fs.end());
  std::vector<ObjectivePoint> feasible;
  for (double tf : t_fs) {
    for (double z1 : z1s) {
      const bool ok = dp_solve(model, grid, z1, tf, cfg).value_at(r0) <= 0.0;
      out.feasible.push_back(ok);
      if (ok) feasible.push_back({z1, tf});
    }
  }
  out.front = dominance_filter(std::span<const ObjectivePoint>(feasible));
  return out;
}

struct OracleTrajectory {
  std::vector<Vec<3>> states;
  std::vector<ControlSpherical> controls;
  double max_g = -std::numeric_limits<double>::infinity();
  double final_nu = 0.0;
  ObjectivePoint achieved;
  bool admissible = false;
};

/// Greedy closed-loop rollout of a DP solved with keep_tables, using the
/// exact flow.
inline OracleTrajectory oracle_rollout(const ToyModel& model, const DpResult& dp, Vec<3> r0,
                                       int control_levels = 2) {
  if (dp.tables.size() != dp.steps + 1) throw ConfigError("oracle_rollout needs kept DP tables");
  const auto controls = model.control_sample(control_levels);
  const double dt = dp.t_f / double(dp.steps);
  OracleTrajectory tr;
  Vec<3> s = r0;
  tr.states.push_back(s);
  tr.max_g = model.constraint(s);
  for (std::size_t k = 0; k < dp.steps; ++k) {
    double best = std::numeric_limits<double>::infinity();
    ControlSpherical ub{};
    for (const auto& u : controls) {
      const double v = dp.grid.interpolate_clamped(dp.tables[k + 1], model.flow(s, u, dt));
      if (v < best) {
        best = v;
        ub = u;
      }
    }
    s = model.flow(s, ub, dt);
    tr.controls.push_back(ub);
    tr.states.push_back(s);
    tr.max_g = std::max(tr.max_g, model.constraint(s));
  }
  tr.final_nu = model.target(s);
  tr.achieved = {-s[2], dp.t_f};
  tr.admissible = tr.max_g <= 0.0 && tr.final_nu <= 0.0;
  return tr;
}

/// State Jacobian of the toy vector field.
inline Eigen::Matrix3d toy_jacobian(const Vec<3>& s, const ControlSpherical& u) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  J(0, 1) = 1.0;
  J(1, 2) = -u.thrust * std::cos(u.alpha) / (s[2] * s[2]);
  return J;
}

struct DivergenceReport {
  double L_f = 0.0;
  double L_tf = 0.0;
  double max_ratio = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
  bool within_bound() const { return max_ratio <= L_tf; }
};

/// Integrates pairs of nearby toy states under shared random piecewise
/// constant controls with the exact flow and reports the largest ratio
/// |r(s) - r_hat(s)| / |r0 - r_hat0| over the rescaled horizon.
inline DivergenceReport divergence_check(const ToyModel& model, const Grid& region, double t_f,
                                         std::size_t pairs, std::uint64_t seed,
                                         std::size_t segments = 50, double perturbation = 1e-2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_state = [&] {
    Vec<3> s;
    for (std::size_t d = 0; d < 3; ++d)
      s[d] = region.lower(d) + unit(rng) * (region.upper(d) - region.lower(d));
    return s;
  };
  // Region Lipschitz bound from sampled Jacobians at the extreme controls.
  std::vector<Vec<3>> states;
  for (int k = 0; k < 2000; ++k) states.push_back(sample_state());
  const auto controls = model.control_sample(1);
  auto field = [&](const Vec<3>& s, const ControlSpherical& u) { return model.dynamics(s, u); };
  auto jac = [&](const Vec<3>& s, const ControlSpherical& u) { return toy_jacobian(s, u); };
  const GrowthBounds gb = growth_bounds<3, ControlSpherical>(states, controls, field, jac);

  DivergenceReport rep;
  rep.L_f = gb.L_f;
  rep.L_tf = gb.L_tf(t_f);
  const double dt = t_f / double(segments);
  for (std::size_t p = 0; p < pairs; ++p) {
    Vec<3> a = sample_state();
    Vec<3> b = a;
    for (std::size_t d = 0; d < 3; ++d)
      b[d] += perturbation * (2.0 * unit(rng) - 1.0) * (region.upper(d) - region.lower(d));
    // Keep the mass high enough that the flow stays defined over the horizon.
    const double m_floor = model.t_max() * t_f / model.v_exhaust() + 0.05 * region.lower(2);
    a[2] = std::max(a[2], m_floor);
    b[2] = std::max(b[2], m_floor);
    const double d0 = norm(a - b);
    if (d0 == 0.0) {
      ++rep.skipped;
      continue;
    }
    ++rep.pairs;
    for (std::size_t k = 0; k < segments; ++k) {
      ControlSpherical u{unit(rng) < 0.5 ? 0.0 : kPi, 0.0, model.t_max() * unit(rng)};
      a = model.flow(a, u, dt);
      b = model.flow(b, u, dt);
      rep.max_ratio = std::max(rep.max_ratio, norm(a - b) / d0);
    }
  }
  return rep;
}

}  // namespace phjb

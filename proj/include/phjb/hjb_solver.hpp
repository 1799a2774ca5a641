#pragma once

// Backward march of the obstacle problem
//
//   omega_tau + H_hat(r, grad omega) = 0,  omega >= g,  tau = 1 - kappa,
//   omega(kappa = 1) = max(-m - z1, nu, g),
//
// on a uniform grid, with WENO5 one-sided derivatives, a Lax-Friedrichs
// numerical Hamiltonian and three-stage TVD Runge-Kutta in tau. Each
// (z1, t_f) pair is an independent slice.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phjb/constraints.hpp"
#include "phjb/grid.hpp"
#include "phjb/hamiltonian.hpp"
#include "phjb/models.hpp"
#include "phjb/parallel.hpp"
#include "phjb/weno.hpp"

namespace phjb {

struct SolverConfig {
  double cfl = 0.8;
  std::size_t kappa_steps = 0;   // 0: fewest uniform steps meeting the CFL bound
  std::size_t history_levels = 64;  // kappa levels kept when a history is requested
  unsigned threads = 1;
  double trim_band = 0.0;  // > 0: freeze unrecoverable points this close to the boundary
  int trim_directions = 8;
  // Local Lax-Friedrichs: alpha from the node's own |dH/dq| instead of the
  // grid-wide maximum. Less smearing where the dynamics are slow.
  bool local_dissipation = false;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("solver.cfl must lie in (0, 1]");
    if (history_levels == 1) throw ConfigError("solver.history_levels must be 0 or >= 2");
    if (trim_band < 0.0) throw ConfigError("solver.trim_band must be >= 0");
  }
};

struct ValueField {
  Grid grid;
  double z1 = 0.0;
  double t_f = 0.0;
  double kappa = 0.0;
  std::vector<double> values;

  double at(std::span<const double> x) const { return grid.interpolate(values, x); }
};

struct StepDiagnostic {
  std::size_t step = 0;
  double kappa = 0.0;
  double max_change = 0.0;
  double dt = 0.0;
};

/// Stored kappa levels of one slice, ordered by increasing kappa.
struct History {
  Grid grid;
  double z1 = 0.0;
  double t_f = 0.0;
  std::vector<double> kappa;
  std::vector<std::vector<double>> values;

  /// Linear interpolation in kappa between the bracketing stored levels.
  std::vector<double> field_at(double k) const {
    const auto [i, w] = bracket(k);
    if (w == 0.0) return values[i];
    std::vector<double> out(values[i].size());
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = (1.0 - w) * values[i][j] + w * values[i + 1][j];
    return out;
  }

  double value(double k, std::span<const double> x) const {
    const auto [i, w] = bracket(k);
    const double a = grid.interpolate(values[i], x);
    return w == 0.0 ? a : (1.0 - w) * a + w * grid.interpolate(values[i + 1], x);
  }

 private:
  std::pair<std::size_t, double> bracket(double k) const {
    if (kappa.empty()) throw NumericalError("history is empty");
    if (k <= kappa.front()) return {0, 0.0};
    if (k >= kappa.back()) return {kappa.size() - 1, 0.0};
    const auto it = std::upper_bound(kappa.begin(), kappa.end(), k);
    const std::size_t i = std::size_t(it - kappa.begin()) - 1;
    return {i, (k - kappa[i]) / (kappa[i + 1] - kappa[i])};
  }
};

struct MarchResult {
  ValueField field;
  std::vector<StepDiagnostic> diagnostics;
  std::size_t steps = 0;
  History history;  // empty unless requested
};

/// omega <- max(candidate, g) pointwise.
inline void obstacle_step(std::span<double> field, std::span<const double> g_field) {
  for (std::size_t i = 0; i < field.size(); ++i) field[i] = std::max(field[i], g_field[i]);
}

/// Terminal data max(-m - z1, nu, g) at every grid point.
template <DynamicsModel M>
std::vector<double> terminal_condition(const M& model, const Grid& grid, double z1) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto s = grid.point<M::kDim>(i);
    out[i] = std::max({-s[kMassIndex<M>] - z1, model.target(s), model.constraint(s)});
  }
  return out;
}

/// Precomputed per-point data for one model on one grid, shared by all
/// slices.
template <DynamicsModel M>
class SliceSolver {
 public:
  static constexpr std::size_t D = M::kDim;
  using State = typename M::State;

  SliceSolver(M model, Grid grid, SolverConfig cfg)
      : model_(std::move(model)), grid_(std::move(grid)), cfg_(cfg) {
    cfg_.validate();
    if (grid_.dims() != D)
      throw ConfigError("grid has " + std::to_string(grid_.dims()) + " dimensions, model needs " +
                        std::to_string(D));
    for (std::size_t d = 0; d < D; ++d)
      if (grid_.periodic(d) != M::periodic()[d])
        throw ConfigError("grid periodicity of dimension " + std::to_string(d) +
                          " does not match the model");
    const std::size_t n = grid_.size();
    coast_.resize(n * D);
    inv_mass_.resize(n);
    g_.resize(n);
    target_.resize(n);
    mass_.resize(n);
    frozen_.assign(n, 0);
    if (cfg_.local_dissipation) local_alpha_.assign(n * D, 0.0);
    const auto controls = model_.control_sample(cfg_.trim_directions);
    std::vector<State> active;
    for (std::size_t i = 0; i < n; ++i) {
      const State s = grid_.point<D>(i);
      g_[i] = model_.constraint(s);
      target_[i] = model_.target(s);
      mass_[i] = s[kMassIndex<M>];
      inv_mass_[i] = 1.0 / s[kMassIndex<M>];
      bool freeze = g_[i] > 0.0;
      if (!freeze && cfg_.trim_band > 0.0 && trim_candidate(s))
        freeze = !recoverable(model_, s, controls, cfg_.trim_band).recoverable;
      frozen_[i] = freeze ? 1 : 0;
      if (freeze) continue;
      const State f = model_.coast(s);
      std::copy(f.begin(), f.end(), coast_.begin() + std::ptrdiff_t(i * D));
      active.push_back(s);
      if (cfg_.local_dissipation) {
        const State a = dissipation_bounds(model_, std::span<const State>(&s, 1), 1.0);
        std::copy(a.begin(), a.end(), local_alpha_.begin() + std::ptrdiff_t(i * D));
      }
    }
    unit_alpha_ = dissipation_bounds(model_, std::span<const State>(active), 1.0);
  }

  const M& model() const { return model_; }
  const Grid& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }
  std::span<const double> g_field() const { return g_; }
  std::span<const double> target_field() const { return target_; }
  bool frozen(std::size_t i) const { return frozen_[i] != 0; }
  std::size_t frozen_count() const {
    return std::size_t(std::count(frozen_.begin(), frozen_.end(), char(1)));
  }

  State dissipation(double t_f) const { return t_f * unit_alpha_; }

  std::vector<double> terminal(double z1) const {
    std::vector<double> out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::max({-mass_[i] - z1, target_[i], g_[i]});
    return out;
  }

  /// Largest stable step in tau for the given horizon.
  double cfl_step(double t_f) const {
    const State a = dissipation(t_f);
    double s = 0.0;
    for (std::size_t d = 0; d < D; ++d) s += a[d] / grid_.spacing(d);
    return s > 0.0 ? cfg_.cfl / s : 1.0;
  }

  std::size_t step_count(double t_f) const {
    const double dt = cfl_step(t_f);
    if (cfg_.kappa_steps > 0) {
      if (1.0 / double(cfg_.kappa_steps) > dt * (1.0 + 1e-12))
        throw NumericalError("kappa_steps = " + std::to_string(cfg_.kappa_steps) +
                             " violates the CFL bound (need >= " +
                             std::to_string(std::size_t(std::ceil(1.0 / dt))) + ")");
      return cfg_.kappa_steps;
    }
    return std::max<std::size_t>(1, std::size_t(std::ceil(1.0 / dt - 1e-9)));
  }

  /// Lax-Friedrichs numerical Hamiltonian at every point; zero on frozen
  /// points. With local dissipation `alpha` is ignored.
  void lax_friedrichs_rhs(std::span<const double> phi, double t_f, const State& alpha,
                          std::span<double> out) const {
    const std::size_t n = grid_.size();
    work_.resize(2 * D);
    for (auto& w : work_) w.resize(n);
    for (std::size_t d = 0; d < D; ++d)
      weno5_derivative(grid_, phi, d, work_[2 * d], work_[2 * d + 1], cfg_.threads);
    parallel_for(n, cfg_.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        if (frozen_[i]) {
          out[i] = 0.0;
          continue;
        }
        State avg, coast;
        double diss = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          const double pm = work_[2 * d][i], pp = work_[2 * d + 1][i];
          const double a = cfg_.local_dissipation ? t_f * local_alpha_[i * D + d] : alpha[d];
          avg[d] = 0.5 * (pm + pp);
          diss += a * 0.5 * (pp - pm);
          coast[d] = coast_[i * D + d];
        }
        out[i] = hamiltonian_from_coast(coast, inv_mass_[i], t_f, avg, M::thrust_channels(),
                                        model_.t_max(), model_.v_exhaust()) -
                 diss;
      }
    });
  }

  MarchResult march(double z1, double t_f, bool keep_history = false) const {
    if (!(t_f >= 0.0) || !std::isfinite(t_f)) throw ConfigError("t_f must be finite and >= 0");
    const std::size_t n = grid_.size();
    if (t_f == 0.0) {
      // Zero horizon: omega is the terminal data, no march.
      MarchResult res;
      res.field = {grid_, z1, 0.0, 0.0, terminal(z1)};
      if (keep_history) res.history = {grid_, z1, 0.0, {0.0, 1.0}, {res.field.values, res.field.values}};
      return res;
    }
    const State alpha = dissipation(t_f);
    const std::size_t steps = step_count(t_f);
    const double dt = 1.0 / double(steps);

    MarchResult res;
    res.steps = steps;
    std::vector<double> phi = terminal(z1);
    for (double v : phi)
      if (!std::isfinite(v)) throw NumericalError("terminal condition is not finite");

    std::size_t stride = 0;
    if (keep_history) {
      res.history.grid = grid_;
      res.history.z1 = z1;
      res.history.t_f = t_f;
      const std::size_t levels = cfg_.history_levels ? cfg_.history_levels : steps + 1;
      stride = std::max<std::size_t>(1, (steps + levels - 2) / std::max<std::size_t>(1, levels - 1));
      res.history.kappa.push_back(1.0);
      res.history.values.push_back(phi);
    }

    // Frozen points keep their terminal value, which bounds omega from below
    // there: outside the admissible set neither g nor the mass term can
    // decrease along any trajectory.
    const std::vector<double> held = phi;
    std::vector<double> s1(n), s2(n), rhs(n);
    auto project = [&](std::vector<double>& v) {
      for (std::size_t i = 0; i < n; ++i) v[i] = frozen_[i] ? held[i] : std::max(v[i], g_[i]);
    };

    for (std::size_t k = 1; k <= steps; ++k) {
      lax_friedrichs_rhs(phi, t_f, alpha, rhs);
      for (std::size_t i = 0; i < n; ++i) s1[i] = phi[i] - dt * rhs[i];
      project(s1);
      lax_friedrichs_rhs(s1, t_f, alpha, rhs);
      for (std::size_t i = 0; i < n; ++i)
        s2[i] = 0.75 * phi[i] + 0.25 * (s1[i] - dt * rhs[i]);
      project(s2);
      lax_friedrichs_rhs(s2, t_f, alpha, rhs);
      double change = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = phi[i] / 3.0 + 2.0 / 3.0 * (s2[i] - dt * rhs[i]);
        const double p = frozen_[i] ? held[i] : std::max(v, g_[i]);
        finite = finite && std::isfinite(p);
        change = std::max(change, std::abs(p - phi[i]));
        phi[i] = p;
      }
      const double kappa = k == steps ? 0.0 : 1.0 - double(k) * dt;
      if (!finite)
        throw NumericalError("non-finite value at step " + std::to_string(k) +
                             " (kappa = " + std::to_string(kappa) + ")");
      res.diagnostics.push_back({k, kappa, change, dt});
      if (keep_history && (k % stride == 0 || k == steps)) {
        res.history.kappa.push_back(kappa);
        res.history.values.push_back(phi);
      }
    }
    if (keep_history) {
      std::reverse(res.history.kappa.begin(), res.history.kappa.end());
      std::reverse(res.history.values.begin(), res.history.values.end());
    }
    res.field = {grid_, z1, t_f, 0.0, std::move(phi)};
    return res;
  }

 private:
  // Only points near a non-mass face are trimmed; the mass face is never
  // recoverable since mass only decreases.
  bool trim_candidate(const State& s) const {
    for (const auto& f : model_.faces(s))
      if (std::string_view(f.name) != "m_min" && f.residual >= -cfg_.trim_band) return true;
    return false;
  }

  M model_;
  Grid grid_;
  SolverConfig cfg_;
  std::vector<double> coast_, inv_mass_, g_, target_, mass_, local_alpha_;
  std::vector<char> frozen_;
  State unit_alpha_{};
  mutable std::vector<std::vector<double>> work_;
};

struct SliceResult {
  double z1 = 0.0;
  double t_f = 0.0;
  bool ok = false;
  std::string error;
  std::size_t steps = 0;
  ValueField field;
  std::vector<StepDiagnostic> diagnostics;
};

/// One march per (t_f, z1) pair, t_f-major. A failing slice is recorded and
/// its siblings still run.
template <DynamicsModel M>
std::vector<SliceResult> solve_all(const SliceSolver<M>& solver, std::span<const double> z1s,
                                   std::span<const double> t_fs) {
  std::vector<SliceResult> out;
  out.reserve(z1s.size() * t_fs.size());
  for (double t_f : t_fs) {
    for (double z1 : z1s) {
      SliceResult r;
      r.z1 = z1;
      r.t_f = t_f;
      try {
        MarchResult m = solver.march(z1, t_f);
        r.ok = true;
        r.steps = m.steps;
        r.field = std::move(m.field);
        r.diagnostics = std::move(m.diagnostics);
      } catch (const Error& e) {
        r.error = e.what();
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace phjb

#pragma once

// Trajectory and control reconstruction from the kappa-history of one slice.
// Each step estimates the costate from the interpolated field, takes the
// Hamiltonian minimizer, checks it against a one-step lookahead argmin over
// a control sample, and advances with fourth-order Adams-Bashforth-Moulton
// (RK4 for the first three steps) under the rescaled dynamics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "phjb/grid.hpp"
#include "phjb/hamiltonian.hpp"
#include "phjb/hjb_solver.hpp"
#include "phjb/models.hpp"
#include "phjb/pareto.hpp"

namespace phjb {

/// Central differences of the interpolated field with one grid spacing,
/// one-sided where a neighbour would leave the grid.
template <std::size_t N, class Eval>
Vec<N> costate_estimate(const Grid& grid, const Vec<N>& x, Eval&& eval) {
  if (!grid.contains(x)) throw OutOfRangeError("costate_estimate: state outside the grid");
  Vec<N> q{};
  const double f0 = eval(x);
  for (std::size_t d = 0; d < N; ++d) {
    const double h = grid.spacing(d);
    Vec<N> xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    const bool up = grid.periodic(d) || xp[d] <= grid.upper(d);
    const bool dn = grid.periodic(d) || xm[d] >= grid.lower(d);
    if (up && dn)
      q[d] = (eval(xp) - eval(xm)) / (2.0 * h);
    else if (up)
      q[d] = (eval(xp) - f0) / h;
    else if (dn)
      q[d] = (f0 - eval(xm)) / h;
  }
  return q;
}

template <std::size_t N>
Vec<N> costate_estimate(const Grid& grid, std::span<const double> field, const Vec<N>& x) {
  return costate_estimate<N>(grid, x, [&](const Vec<N>& y) { return grid.interpolate(field, y); });
}

struct ReconstructionConfig {
  std::size_t steps = 400;
  int control_sample = 16;   // lookahead sample: directions or thrust levels
  double agree_rel = 0.05;   // analytic control accepted within this share of the lookahead spread
  double agree_abs = 1e-12;
  double g_tol = 1e-3;
};

template <std::size_t N>
struct Trajectory {
  double t_f = 0.0;
  std::vector<double> s;
  std::vector<Vec<N>> states;
  std::vector<ControlSpherical> controls;  // one per step, size states - 1
  std::vector<double> g;
  double final_nu = 0.0;
  ObjectivePoint achieved;
  std::size_t lookahead_overrides = 0;   // steps where the lookahead result won
  std::size_t thrust_switch_agreement = 0;  // steps where both paths agree on thrust on/off
  std::vector<std::string> diagnostics;
  bool complete = false;
};

struct AuditReport {
  bool admissible = false;
  double max_g = 0.0;
  double final_nu = 0.0;
  double min_mass_slack = 0.0;  // min_k m_k - m_min
  bool mass_monotone = true;
  ObjectivePoint achieved;
  std::vector<std::string> failures;
};

/// One ABM4 predictor-corrector step. `hist` holds y_{k-3..k} (oldest
/// first); derivatives are evaluated with the current control.
template <std::size_t N, class F>
Vec<N> abm4_step(F&& f, std::span<const Vec<N>> hist, double h) {
  const Vec<N> f3 = f(hist[3]), f2 = f(hist[2]), f1 = f(hist[1]), f0 = f(hist[0]);
  const Vec<N> pred =
      hist[3] + (h / 24.0) * (55.0 * f3 - 59.0 * f2 + 37.0 * f1 - 9.0 * f0);
  return hist[3] + (h / 24.0) * (9.0 * f(pred) + 19.0 * f3 - 5.0 * f2 + f1);
}

template <std::size_t N, class F>
Vec<N> rk4_step(F&& f, const Vec<N>& y, double h) {
  const Vec<N> k1 = f(y);
  const Vec<N> k2 = f(y + (0.5 * h) * k1);
  const Vec<N> k3 = f(y + (0.5 * h) * k2);
  const Vec<N> k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates y' = f(y) over [0, 1] with `steps` ABM4 steps (RK4 start).
template <std::size_t N, class F>
std::vector<Vec<N>> abm4_integrate(F&& f, const Vec<N>& y0, std::size_t steps) {
  const double h = 1.0 / double(steps);
  std::vector<Vec<N>> ys{y0};
  for (std::size_t k = 0; k < steps; ++k) {
    if (ys.size() < 4)
      ys.push_back(rk4_step<N>(f, ys.back(), h));
    else
      ys.push_back(abm4_step<N>(f, std::span<const Vec<N>>(ys.data() + ys.size() - 4, 4), h));
  }
  return ys;
}

/// Control at step k: the Hamiltonian minimizer unless the lookahead
/// argmin of omega(s_{k+1}, r + h t_f f(r, u)) beats it by more than the
/// agreement tolerance.
template <DynamicsModel M>
ControlSpherical control_select(const M& model, const History& hist, double s_k, double h,
                                const typename M::State& r, const ReconstructionConfig& cfg,
                                bool* overridden = nullptr, bool* switch_agrees = nullptr) {
  constexpr std::size_t D = M::kDim;
  const double t_f = hist.t_f;
  const auto q = costate_estimate<D>(hist.grid, r, [&](const Vec<D>& y) { return hist.value(s_k, y); });
  ControlSpherical ua = optimal_control(model, r, q);
  if constexpr (requires { M::normalize(ua); }) ua = M::normalize(ua);
  auto score = [&](const ControlSpherical& u) {
    const Vec<D> y = r + (h * t_f) * model.dynamics(r, u);
    if (!hist.grid.contains(y)) return std::numeric_limits<double>::infinity();
    return hist.value(s_k + h, y);
  };
  auto sample = model.control_sample(cfg.control_sample);
  const double sa = score(ua);
  double best = sa, worst = sa;
  ControlSpherical ub = ua;
  for (const auto& u : sample) {
    const double v = score(u);
    if (v < best) {
      best = v;
      ub = u;
    }
    if (std::isfinite(v)) worst = std::max(worst, v);
  }
  const double tol = cfg.agree_rel * (worst - best) + cfg.agree_abs;
  if (switch_agrees) *switch_agrees = (ua.thrust > 0.0) == (ub.thrust > 0.0) || sa <= best + tol;
  // Where the field cannot tell thrusting from coasting, keep the propellant.
  const ControlSpherical coast{};
  if (ua.thrust > 0.0 && score(coast) <= best + tol) {
    if (overridden) *overridden = true;
    return coast;
  }
  if (sa <= best + tol) {
    if (overridden) *overridden = false;
    return ua;
  }
  if (overridden) *overridden = true;
  return ub;
}

/// Rebuilds the trajectory from r0 over the horizon of `hist`. Problems are
/// reported in `diagnostics`; leaving the grid stops the reconstruction.
template <DynamicsModel M>
Trajectory<M::kDim> reconstruct(const M& model, const History& hist,
                                typename M::State r0, const ReconstructionConfig& cfg = {}) {
  constexpr std::size_t D = M::kDim;
  using State = typename M::State;
  if (cfg.steps < 1) throw ConfigError("reconstruction needs at least one step");
  const std::size_t N = cfg.steps;
  const double h = 1.0 / double(N);
  const double t_f = hist.t_f;
  Trajectory<D> tr;
  tr.t_f = t_f;
  tr.states.push_back(r0);
  tr.s.push_back(0.0);
  tr.g.push_back(model.constraint(r0));
  bool g_reported = false;
  for (std::size_t k = 0; k < N; ++k) {
    const double sk = double(k) * h;
    const State& r = tr.states.back();
    ControlSpherical u;
    bool over = false, agree = true;
    try {
      u = control_select(model, hist, sk, h, r, cfg, &over, &agree);
    } catch (const OutOfRangeError&) {
      tr.diagnostics.push_back("left the grid at step " + std::to_string(k));
      break;
    }
    tr.lookahead_overrides += over;
    tr.thrust_switch_agreement += agree;
    tr.controls.push_back(u);
    auto f = [&](const State& y) { return rescale(model.dynamics(y, u), t_f); };
    State next;
    if (k < 3) {
      next = rk4_step<D>(f, r, h);
    } else {
      next = abm4_step<D>(f, std::span<const State>(tr.states.data() + tr.states.size() - 4, 4), h);
    }
    tr.states.push_back(next);
    tr.s.push_back(double(k + 1) * h);
    const double gv = model.constraint(next);
    tr.g.push_back(gv);
    if (gv > cfg.g_tol && !g_reported) {
      tr.diagnostics.push_back("constraint violated at step " + std::to_string(k + 1) +
                               " (g = " + std::to_string(gv) + ")");
      g_reported = true;
    }
    if (!hist.grid.contains(next)) {
      tr.diagnostics.push_back("left the grid at step " + std::to_string(k + 1));
      break;
    }
  }
  tr.complete = tr.states.size() == N + 1;
  const State& last = tr.states.back();
  tr.final_nu = model.target(last);
  tr.achieved = {-last[kMassIndex<M>], t_f};
  if (tr.complete && tr.final_nu > 0.0)
    tr.diagnostics.push_back("terminal state outside the target (nu = " +
                             std::to_string(tr.final_nu) + ")");
  return tr;
}

template <DynamicsModel M>
AuditReport audit(const M& model, const Trajectory<M::kDim>& tr, double g_tol) {
  AuditReport rep;
  rep.max_g = -std::numeric_limits<double>::infinity();
  rep.min_mass_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    const auto& s = tr.states[k];
    rep.max_g = std::max(rep.max_g, model.constraint(s));
    rep.min_mass_slack = std::min(rep.min_mass_slack, s[kMassIndex<M>] - model.m_min());
    if (k > 0 && s[kMassIndex<M>] > tr.states[k - 1][kMassIndex<M>]) rep.mass_monotone = false;
  }
  rep.final_nu = model.target(tr.states.back());
  rep.achieved = {-tr.states.back()[kMassIndex<M>], tr.t_f};
  if (!tr.complete) rep.failures.push_back("incomplete reconstruction");
  if (rep.max_g > g_tol) rep.failures.push_back("constraint level exceeds tolerance");
  if (!(rep.final_nu < 0.0)) rep.failures.push_back("terminal state not inside the target");
  if (!(rep.min_mass_slack > 0.0)) rep.failures.push_back("mass reached the dry mass");
  if (!rep.mass_monotone) rep.failures.push_back("mass increased along the trajectory");
  rep.admissible = rep.failures.empty();
  return rep;
}

template <DynamicsModel M>
void write_trajectory_csv(std::ostream& os, const M& model, const Trajectory<M::kDim>& tr) {
  os.precision(17);
  os << "s,t";
  for (auto n : M::names()) os << ',' << n;
  os << ",alpha,delta,thrust,g,propellant_used\n";
  const double m0 = tr.states.front()[kMassIndex<M>];
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    os << tr.s[k] << ',' << tr.s[k] * tr.t_f;
    for (double v : tr.states[k]) os << ',' << v;
    const ControlSpherical u = k < tr.controls.size() ? tr.controls[k] : ControlSpherical{};
    os << ',' << u.alpha << ',' << u.delta << ',' << u.thrust << ',' << model.constraint(tr.states[k])
       << ',' << m0 - tr.states[k][kMassIndex<M>] << '\n';
  }
}

/// Thrust glyphs every `every` steps: position in the plane of motion and
/// the thrust vector scaled by T / T_max. For the axisymmetric layout the
/// longitude is recovered by integrating v_theta / rho; the toy model uses
/// its phase plane (x, v).
template <DynamicsModel M>
void write_glyph_csv(std::ostream& os, const M& model, const Trajectory<M::kDim>& tr,
                     std::size_t every) {
  os.precision(17);
  os << "t,x,y,thrust_x,thrust_y\n";
  every = std::max<std::size_t>(every, 1);
  double theta = 0.0;
  for (std::size_t k = 0; k < tr.controls.size(); ++k) {
    const auto& s = tr.states[k];
    const auto& u = tr.controls[k];
    const double share = u.thrust / model.t_max();
    double x, y, tx, ty;
    if constexpr (M::kDim == 3) {
      x = s[0];
      y = s[1];
      tx = share * std::cos(u.alpha);
      ty = 0.0;
    } else {
      const double rho = s[0];
      const double th = M::kDim == 4 ? theta : s[1];
      const Vec<3> d = thrust_direction(u);
      const double er_x = std::cos(th), er_y = std::sin(th);
      x = rho * er_x;
      y = rho * er_y;
      // In-plane thrust: d[0] radial, d[1] along e_theta.
      tx = share * (d[0] * er_x - d[1] * er_y);
      ty = share * (d[0] * er_y + d[1] * er_x);
      if constexpr (M::kDim == 4) {
        const auto& sn = tr.states[k + 1];
        const double h = tr.s[k + 1] - tr.s[k];
        theta += 0.5 * h * tr.t_f * (s[2] / s[0] + sn[2] / sn[0]);
      }
    }
    if (k % every == 0)
      os << tr.s[k] * tr.t_f << ',' << x << ',' << y << ',' << tx << ',' << ty << '\n';
  }
}

}  // namespace phjb

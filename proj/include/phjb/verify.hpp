#pragma once

// Property battery behind `phjb verify`. Each suite samples the module
// invariants with a seeded generator and reports one line per check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phjb/constraints.hpp"
#include "phjb/dynamics.hpp"
#include "phjb/hamiltonian.hpp"
#include "phjb/hjb_solver.hpp"
#include "phjb/models.hpp"
#include "phjb/oracle.hpp"
#include "phjb/pareto.hpp"

namespace phjb {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
};

namespace verify_detail {

inline AsteroidParams castalia() {
  AsteroidParams a;
  a.gm = kGravitationalConstant * 1.4091e12;
  a.omega = 4.2883e-4;
  return a;
}

inline SpacecraftParams craft() { return SpacecraftParams::from_newtons(1000.0, 0.2, 100.0, 40.0); }

inline ConstraintConfig limits() {
  ConstraintConfig c;
  c.rho_min = 1.0;
  c.rho_max = 8.74;
  c.m_min = 1000.0;
  c.m_max = 1000.2;
  return c;
}

inline SpatialModel spatial() {
  return SpatialModel(castalia(), craft(), limits(),
                      TargetConfig{{6.1175, 0, 0, 0, -0.0025, 0}, {1, 0, 1, 100, 100, 100}, 0.05});
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

struct Sampler {
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }

  SphericalState spherical_state() {
    return {uniform(3.0, 8.5), uniform(-3.1, 3.1), uniform(-1.4, 1.4), uniform(-2e-3, 2e-3),
            uniform(-3e-3, 3e-3), uniform(-2e-3, 2e-3), uniform(1000.0, 1000.2)};
  }
  Vec<7> costate() {
    Vec<7> q;
    for (auto& v : q) v = normal();
    q[6] *= 0.05;  // both sides of the thrust switch
    return q;
  }
};

}  // namespace verify_detail

struct HamiltonianGridReport {
  std::size_t draws = 0;
  double max_identity_residual = 0.0;  // |q3 cos a + sin a (q4 sin d + q5 cos d) + |q_thrust||
  double max_excess = 0.0;    // largest H_closed - H_grid beyond the grid error bound
  double min_gap = 0.0;  // H_closed - H_grid; negative only at rounding level
  double max_gap = 0.0;
  std::size_t below_grid = 0;  // draws with H_closed < H_grid beyond rounding
  double max_decomposition_error = 0.0;
  bool pass(double identity_tol = 1e-12) const {
    return max_identity_residual < identity_tol && max_excess <= 0.0 && below_grid == 0 &&
           max_decomposition_error <= 1e-12;
  }
};

/// Closed-form H against the exhaustive minimum over an (alpha, delta, T)
/// control grid on the 7-D model. The grid misses the optimal direction by
/// at most theta = (d_alpha + d_delta) / 2, costing at most
/// t_f (T_max / m) |q_thrust| theta^2 / 2.
inline HamiltonianGridReport hamiltonian_grid_check(std::size_t draws, std::uint64_t seed,
                                                    int n_alpha = 181, int n_delta = 91,
                                                    int n_thrust = 21) {
  using namespace verify_detail;
  const SpatialModel model = spatial();
  Sampler smp(seed);
  const double da = 2.0 * kPi / double(n_alpha - 1), dd = kPi / double(n_delta - 1);
  const double theta = 0.5 * (da + dd);
  std::vector<Vec<3>> dirs;
  std::vector<ControlSpherical> dir_controls;
  for (int i = 0; i < n_alpha; ++i)
    for (int j = 0; j < n_delta; ++j) {
      const ControlSpherical u{-kPi + da * i, -kPi / 2 + dd * j, 1.0};
      dirs.push_back(thrust_direction(u));
      dir_controls.push_back(u);
    }
  HamiltonianGridReport rep;
  rep.draws = draws;
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.max_excess = -std::numeric_limits<double>::infinity();
  const double t_max = model.t_max(), ve = model.v_exhaust();
  for (std::size_t k = 0; k < draws; ++k) {
    const Vec<7> s = smp.spherical_state().to_array();
    const Vec<7> q = smp.costate();
    const double t_f = smp.uniform(0.0, 50.0);
    const double m = s[6];

    const ThrustAngles ang = optimal_angles(q[3], q[4], q[5]);
    const double qn = std::sqrt(q[3] * q[3] + q[4] * q[4] + q[5] * q[5]);
    const double id = q[3] * std::cos(ang.alpha) +
                      std::sin(ang.alpha) * (q[4] * std::sin(ang.delta) + q[5] * std::cos(ang.delta));
    rep.max_identity_residual = std::max(rep.max_identity_residual, std::abs(id + qn));

    // q . f(u) = q . f(coast) + T (q_thrust . d / m - q_m / v_ex), linear in T.
    const double c0 = dot(q, model.coast(s));
    double best = std::numeric_limits<double>::infinity();
    ControlSpherical ub{};
    std::size_t best_dir = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double v = q[3] * dirs[i][0] + q[4] * dirs[i][1] + q[5] * dirs[i][2];
      if (v < best_dot) {
        best_dot = v;
        best_dir = i;
      }
    }
    for (int l = 0; l < n_thrust; ++l) {
      const double T = t_max * double(l) / double(n_thrust - 1);
      const double v = c0 + T * (best_dot / m - q[6] / ve);
      if (v < best) {
        best = v;
        ub = dir_controls[best_dir];
        ub.thrust = T;
      }
    }
    const double direct = dot(q, model.dynamics(s, ub));
    rep.max_decomposition_error =
        std::max(rep.max_decomposition_error, std::abs(direct - best) / (1.0 + std::abs(best)));

    const double h_closed = hamiltonian(model, s, t_f, q);
    const double h_grid = -t_f * best;
    const double gap = h_closed - h_grid;
    const double fp = 1e-12 * (1.0 + std::abs(h_closed));
    const double bound = t_f * (t_max / m) * qn * 0.5 * theta * theta + fp;
    rep.min_gap = std::min(rep.min_gap, gap);
    rep.below_grid += gap < -fp;
    rep.max_gap = std::max(rep.max_gap, gap);
    rep.max_excess = std::max(rep.max_excess, gap - bound);
  }
  return rep;
}

inline SuiteReport verify_hamiltonian(std::uint64_t seed) {
  using namespace verify_detail;
  SuiteReport r{"hamiltonian", {}};
  const auto g = hamiltonian_grid_check(2000, seed);
  r.checks.push_back({"closed form vs control-grid minimum", g.pass(),
                      "identity residual " + fmt(g.max_identity_residual) + ", gap in [" +
                          fmt(g.min_gap) + ", " + fmt(g.max_gap) + "]"});
  const SpatialModel model = spatial();
  Sampler smp(seed + 1);
  bool homogeneous = true, attained = true;
  for (int k = 0; k < 2000; ++k) {
    const Vec<7> s = smp.spherical_state().to_array();
    const Vec<7> q = smp.costate();
    const double h1 = hamiltonian(model, s, 1.0, q);
    for (double a : {0.0, 0.5, 2.0, 26.9}) homogeneous = homogeneous && hamiltonian(model, s, a, q) == a * h1;
    const double at = -dot(q, model.dynamics(s, optimal_control(model, s, q)));
    attained = attained && std::abs(at - h1) <= 1e-10 * (1.0 + std::abs(h1));
  }
  r.checks.push_back({"positively homogeneous in t_f", homogeneous, ""});
  r.checks.push_back({"analytic control attains H", attained, ""});
  bool step = true;
  const double m = 1000.1, tm = 0.1, ve = 40.0;
  double prev = tm;
  int switches = 0;
  for (int k = 0; k <= 4000; ++k) {
    const double t = optimal_thrust(0.02 - 2e-5 * k, 1.0, m, tm, ve);
    step = step && t <= prev;
    switches += t != prev;
    prev = t;
  }
  r.checks.push_back({"thrust switch is a single non-increasing step", step && switches == 1, ""});
  return r;
}

inline SuiteReport verify_constraints(std::uint64_t seed) {
  using namespace verify_detail;
  SuiteReport r{"constraints", {}};
  ConstraintConfig c = limits();
  c.length_scale = 0.5;
  c.mass_scale = 0.1;
  Sampler smp(seed);
  bool lip = true, sign = true;
  for (int k = 0; k < 10000; ++k) {
    const double r1 = smp.uniform(0.5, 9.5), r2 = smp.uniform(0.5, 9.5);
    const double m1 = smp.uniform(999.9, 1000.3), m2 = smp.uniform(999.9, 1000.3);
    lip = lip && std::abs(constraint_level(r1, m1, c) - constraint_level(r2, m2, c)) <=
                     c.lipschitz() * std::hypot(r1 - r2, m1 - m2) * (1 + 1e-12);
    const bool inside = r1 >= c.rho_min && r1 <= c.rho_max && m1 >= c.m_min;
    sign = sign && (constraint_level(r1, m1, c) <= 0.0) == inside;
  }
  r.checks.push_back({"g Lipschitz in the normalized metric", lip, ""});
  r.checks.push_back({"g sign matches set membership", sign, ""});
  const TargetConfig t{{0.3, -0.2, 0.7}, {1.0, 3.0, 0.5}, 0.2};
  bool within = true;
  for (int k = 0; k < 10000; ++k) {
    const std::array<double, 3> x{smp.uniform(-1, 1), smp.uniform(-1, 1), smp.uniform(-1, 1)};
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) d2 += std::pow(t.weights[i] * (x[i] - t.state[i]), 2);
    if (nu(x, t) < 0.0) within = within && std::sqrt(d2) < t.epsilon;
  }
  r.checks.push_back({"nu < 0 implies weighted distance < epsilon", within, ""});
  return r;
}

inline SuiteReport verify_dynamics(std::uint64_t seed) {
  using namespace verify_detail;
  SuiteReport r{"dynamics", {}};
  const AsteroidParams p = castalia();
  const SpacecraftParams sc = craft();
  Sampler smp(seed);
  // Complex-step derivative of the coordinate map along the spherical field.
  double worst = 0.0;
  bool mass_ok = true;
  for (int k = 0; k < 10000; ++k) {
    const SphericalState s = smp.spherical_state();
    const ControlSpherical c{smp.uniform(-kPi, kPi), smp.uniform(-kPi / 2, kPi / 2),
                             k % 10 == 0 ? 0.0 : sc.t_max * smp.uniform(0, 1)};
    const SphericalState fs = f_tilde_spherical(s, c, p, sc);
    mass_ok = mass_ok && fs.m <= 0.0 && ((fs.m == 0.0) == (c.thrust == 0.0));
    const double h = 1e-30;
    using C = std::complex<double>;
    const Vec<7> sa = s.to_array(), fa = fs.to_array();
    const C rho{sa[0], h * fa[0]}, th{sa[1], h * fa[1]}, ps{sa[2], h * fa[2]};
    const C vr{sa[3], h * fa[3]}, vt{sa[4], h * fa[4]}, vp{sa[5], h * fa[5]};
    const C ct = std::cos(th), st = std::sin(th), cp = std::cos(ps), sp = std::sin(ps);
    const std::array<C, 3> er{cp * ct, cp * st, sp}, et{-st, ct, C(0)}, ep{-sp * ct, -sp * st, cp};
    const LocalBasis b = local_basis(s.theta, s.psi);
    const Vec<3> d = thrust_direction(c);
    const Vec<3> force = c.thrust * (d[0] * b.e_rho + d[1] * b.e_theta + d[2] * b.e_psi);
    const Vec<7> fc = f_tilde_cartesian(to_cartesian(s), force, p, sc).to_array();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double dx = (rho * er[i]).imag() / h - fc[i];
      const double dv = (vr * er[i] + vt * et[i] + vp * ep[i]).imag() / h - fc[3 + i];
      num += dx * dx + dv * dv;
      den += fc[i] * fc[i] + fc[3 + i] * fc[3 + i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  r.checks.push_back({"spherical and Cartesian fields agree", worst < 1e-10,
                      "max relative error " + fmt(worst)});
  r.checks.push_back({"mass derivative <= 0, zero iff coasting", mass_ok, ""});
  // Thrust image is the ball of radius T_max / m: support function check.
  const SphericalState s0{6.1, 0.2, 0.1, 0.0, -2.5e-3, 0.0, 1000.1};
  const SphericalState coast = f_tilde_spherical(s0, {}, p, sc);
  std::vector<Vec<3>> accel;
  for (int i = 0; i <= 180; ++i)
    for (int j = 0; j <= 90; ++j) {
      const SphericalState f =
          f_tilde_spherical(s0, {-kPi + kPi * i / 90.0, -kPi / 2 + kPi * j / 90.0, sc.t_max}, p, sc);
      accel.push_back({f.v_rho - coast.v_rho, f.v_theta - coast.v_theta, f.v_psi - coast.v_psi});
    }
  const double radius = sc.t_max / s0.m;
  double support_err = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vec<3> dir{smp.normal(), smp.normal(), smp.normal()};
    dir = (1.0 / norm(dir)) * dir;
    double best = -1e300;
    for (const auto& a : accel) best = std::max(best, dot(dir, a));
    support_err = std::max(support_err, std::abs(best - radius) / radius);
  }
  r.checks.push_back({"thrust acceleration set is the ball T_max/m", support_err < 2e-3,
                      "max support error " + fmt(support_err)});
  bool linear = true;
  const Vec<3> f{1.5, -2.0, 0.25};
  for (double a : {0.5, 2.0, 26.9})
    for (int i = 0; i < 3; ++i) linear = linear && rescale(f, a * 1.0)[i] == a * rescale(f, 1.0)[i];
  r.checks.push_back({"rescale linear in t_f", linear, ""});
  const ToyModel toy;
  const auto div = divergence_check(toy, Grid({-0.5, -0.8, 1.1}, {1.3, 0.8, 1.5}, {7, 7, 7}), 2.0,
                                    500, seed);
  r.checks.push_back({"trajectory divergence within L_tf", div.within_bound(),
                      "max ratio " + fmt(div.max_ratio) + " vs L_tf " + fmt(div.L_tf)});
  return r;
}

inline SuiteReport verify_hjb(std::uint64_t seed) {
  using verify_detail::fmt;
  (void)seed;
  SuiteReport r{"hjb", {}};
  const Grid grid({-0.8, -1.2, 0.95}, {1.6, 1.2, 1.55}, {25, 25, 9});
  const SliceSolver<ToyModel> s1(ToyModel{}, grid, SolverConfig{});
  SolverConfig c3;
  c3.threads = 3;
  const SliceSolver<ToyModel> s3(ToyModel{}, grid, c3);
  const auto a = s1.march(-1.4, 1.5).field.values;
  const auto b = s1.march(-1.3, 1.5).field.values;
  const auto g = s1.g_field();
  bool obstacle = true;
  for (std::size_t i = 0; i < a.size(); ++i) obstacle = obstacle && a[i] >= g[i] && b[i] >= g[i];
  r.checks.push_back({"omega >= g after the march", obstacle, ""});
  SliceSet set{grid, {-1.4, -1.3}, {1.5}, {a, b}};
  const double raw = set.enforce_z1_order();
  r.checks.push_back({"z1 ordering after envelope", set.z1_order_violation() == 0.0 && raw < 0.01,
                      "raw crossing " + fmt(raw)});
  r.checks.push_back({"bitwise identical across thread counts",
                      s3.march(-1.4, 1.5).field.values == a, ""});
  return r;
}

inline SuiteReport verify_pareto(std::uint64_t seed) {
  SuiteReport r{"pareto", {}};
  verify_detail::Sampler smp(seed);
  std::vector<ObjectivePoint> pts;
  for (int k = 0; k < 500; ++k) pts.push_back({std::round(smp.uniform(0, 20)), std::round(smp.uniform(0, 20))});
  const auto kept = dominance_filter(std::span<const ObjectivePoint>(pts));
  bool sound = true, complete = true;
  for (const auto& x : kept)
    for (const auto& y : kept) sound = sound && !dominates(x, y);
  for (const auto& p : pts) {
    const bool in = std::any_of(kept.begin(), kept.end(),
                                [&](const ObjectivePoint& k) { return k.z1 == p.z1 && k.z2 == p.z2; });
    const bool dominated = std::any_of(kept.begin(), kept.end(),
                                       [&](const ObjectivePoint& k) { return dominates(k, p); });
    complete = complete && (in || dominated);
  }
  r.checks.push_back({"dominance filter sound", sound, ""});
  r.checks.push_back({"dominance filter complete", complete, ""});

  // Toy slices: rays land on the zero level of vartheta, which is
  // non-increasing along each ray.
  ToyProblem tp;
  tp.target.epsilon = 0.2;  // resolved by the coarse grid
  const Grid grid({-0.8, -1.2, 0.95}, {1.6, 1.2, 1.55}, {25, 25, 9});
  const SliceSolver<ToyModel> solver(ToyModel(tp), grid, SolverConfig{});
  SliceSet set{grid, {-1.5, -1.4, -1.3, -1.2}, {2.0, 2.5, 3.0, 3.5, 4.0}, {}};
  for (double tf : set.t_fs)
    for (double z1 : set.z1s) set.fields.push_back(solver.march(z1, tf).field.values);
  set.enforce_z1_order();
  const std::array<double, 3> r0{1.0, 0.0, 1.5};
  const UtopianPoint zs = utopian(set, r0, 1.5);
  const auto sigma = sigma_front(set, r0, zs, 9);
  bool level = true, monotone = true;
  for (const auto& s : sigma) {
    if (!s.finite()) continue;
    level = level && std::abs(s.vartheta_residual) <= 0.05;
    double prev = 1e300;
    for (int k = 0; k <= 20; ++k) {
      const double tau = s.theta * 1.5 * k / 20.0;
      const ObjectivePoint z{std::min(zs.z1_star + s.mu1 * tau, set.z1s.back()),
                             zs.z2_star + s.mu2 * tau};
      const double v = vartheta(set, r0, z).value;
      monotone = monotone && v <= prev + 1e-9;
      prev = v;
    }
  }
  r.checks.push_back({"ray samples on the zero level", level, ""});
  r.checks.push_back({"vartheta non-increasing along rays", monotone, ""});
  return r;
}

inline SuiteReport verify_oracle(std::uint64_t seed) {
  (void)seed;
  SuiteReport r{"oracle", {}};
  const ToyModel toy;
  const Grid grid({-0.8, -1.2, 0.95}, {1.6, 1.2, 1.55}, {41, 41, 13});
  const auto a = dp_solve(toy, grid, -1.3, 2.0);
  const auto b = dp_solve(toy, grid, -1.3, 3.0);
  const auto c = dp_solve(toy, grid, -1.2, 2.0);
  std::size_t t_viol = 0, m_viol = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t_viol += a.feasible[i] && !b.feasible[i];
    m_viol += a.feasible[i] && !c.feasible[i];
  }
  // Longer horizons can lose points whose target approach is unresolved on
  // the grid; require near-inclusion.
  const double na = double(std::count(a.feasible.begin(), a.feasible.end(), char(1)));
  r.checks.push_back({"feasible set grows with mass budget", m_viol == 0,
                      std::to_string(m_viol) + " violations"});
  r.checks.push_back({"feasible set grows with t_f", double(t_viol) <= 0.01 * na,
                      std::to_string(t_viol) + " of " + std::to_string(std::size_t(na))});
  return r;
}

inline const std::vector<std::pair<std::string, std::function<SuiteReport(std::uint64_t)>>>&
verify_suites() {
  static const std::vector<std::pair<std::string, std::function<SuiteReport(std::uint64_t)>>> s{
      {"constraints", verify_constraints}, {"dynamics", verify_dynamics},
      {"hamiltonian", verify_hamiltonian}, {"hjb", verify_hjb},
      {"pareto", verify_pareto},           {"oracle", verify_oracle}};
  return s;
}

/// Runs one suite, or every suite for "all".
inline std::vector<SuiteReport> run_verify(const std::string& name, std::uint64_t seed) {
  std::vector<SuiteReport> out;
  for (const auto& [n, f] : verify_suites())
    if (name == "all" || name == n) out.push_back(f(seed));
  if (out.empty()) {
    std::string list;
    for (const auto& [n, f] : verify_suites()) list += n + ", ";
    throw ConfigError("unknown suite \"" + name + "\"; available: " + list + "all");
  }
  return out;
}

}  // namespace phjb

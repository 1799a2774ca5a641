#pragma once

// Spacecraft equations of motion about a uniformly rotating small body,
// in body-fixed Cartesian and local spherical coordinates.
//
// Units are km, kg, s throughout. Thrust is a force in kg km/s^2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "phjb/core.hpp"

namespace phjb {

// Unnormalized degree-2 zonal/sectoral coefficients.
struct Harmonics {
  double c20 = 0.0;
  double c22 = 0.0;
  double reference_radius = 1.0;  // km
};

struct AsteroidParams {
  double omega = 0.0;  // rad/s, rotation about +z
  double gm = 0.0;     // km^3/s^2
  std::optional<Harmonics> harmonics;
  // Positions closer than this to the centre are rejected by the gravity model.
  double singularity_guard = 0.5;  // km

  void validate() const {
    if (!(gm > 0.0)) throw ConfigError("asteroid.gm must be > 0");
    if (!(omega >= 0.0)) throw ConfigError("asteroid.omega must be >= 0");
    if (!(singularity_guard > 0.0)) throw ConfigError("asteroid.singularity_guard must be > 0");
    if (harmonics && !(harmonics->reference_radius > 0.0))
      throw ConfigError("asteroid.harmonics.reference_radius must be > 0");
  }

  bool axisymmetric() const { return !harmonics || harmonics->c22 == 0.0; }
};

struct SpacecraftParams {
  double m_dry = 0.0;         // kg
  double m_propellant = 0.0;  // kg
  double t_max = 0.0;         // kg km/s^2
  double v_exhaust = 0.0;     // km/s

  double m_min() const { return m_dry; }
  double m_max() const { return m_dry + m_propellant; }

  static SpacecraftParams from_newtons(double m_dry, double m_prop, double thrust_n,
                                       double v_exhaust) {
    return {m_dry, m_prop, thrust_n * kNewtonToKgKmPerS2, v_exhaust};
  }

  void validate() const {
    if (!(m_dry > 0.0)) throw ConfigError("spacecraft.m_dry must be > 0");
    if (!(m_propellant > 0.0)) throw ConfigError("spacecraft.m_propellant must be > 0");
    if (!(t_max > 0.0)) throw ConfigError("spacecraft.t_max must be > 0");
    if (!(v_exhaust > 0.0)) throw ConfigError("spacecraft.v_exhaust must be > 0");
  }
};

struct StateVector {
  double x = 0, y = 0, z = 0;
  double vx = 0, vy = 0, vz = 0;
  double m = 0;

  Vec<7> to_array() const { return {x, y, z, vx, vy, vz, m}; }
  static StateVector from_array(const Vec<7>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
  Vec<3> position() const { return {x, y, z}; }
  Vec<3> velocity() const { return {vx, vy, vz}; }
};

// psi is the latitude above the equatorial (x, y) plane; velocities are
// components along the local unit vectors e_rho, e_theta, e_psi.
struct SphericalState {
  double rho = 0, theta = 0, psi = 0;
  double v_rho = 0, v_theta = 0, v_psi = 0;
  double m = 0;

  Vec<7> to_array() const { return {rho, theta, psi, v_rho, v_theta, v_psi, m}; }
  static SphericalState from_array(const Vec<7>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
};

// Thrust direction in the local frame is
// (cos alpha, sin alpha sin delta, sin alpha cos delta) along (e_rho, e_theta, e_psi).
struct ControlSpherical {
  double alpha = 0.0;  // [-pi, pi]
  double delta = 0.0;  // [-pi/2, pi/2]
  double thrust = 0.0; // [0, t_max]
};

inline Vec<3> thrust_direction(const ControlSpherical& u) {
  const double sa = std::sin(u.alpha);
  return {std::cos(u.alpha), sa * std::sin(u.delta), sa * std::cos(u.delta)};
}

struct LocalBasis {
  Vec<3> e_rho, e_theta, e_psi;
};

inline LocalBasis local_basis(double theta, double psi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  return {{cp * ct, cp * st, sp}, {-st, ct, 0.0}, {-sp * ct, -sp * st, cp}};
}

/// Gradient of the gravitational potential (the gravitational acceleration).
/// Point mass plus optional unnormalized C20/C22 terms.
inline Vec<3> gravity_accel(const Vec<3>& r, const AsteroidParams& p) {
  const double rho2 = dot(r, r);
  const double rho = std::sqrt(rho2);
  if (!(rho >= p.singularity_guard))
    throw NumericalError("gravity_accel: radius " + std::to_string(rho) +
                         " km is inside the singularity guard");
  const double inv3 = 1.0 / (rho2 * rho);
  Vec<3> a{-p.gm * r[0] * inv3, -p.gm * r[1] * inv3, -p.gm * r[2] * inv3};
  if (p.harmonics && (p.harmonics->c20 != 0.0 || p.harmonics->c22 != 0.0)) {
    const auto& h = *p.harmonics;
    const double x = r[0], y = r[1], z = r[2];
    const double inv5 = inv3 / rho2;
    const double inv7 = inv5 / rho2;
    const double re2 = h.reference_radius * h.reference_radius;
    // U20 = A (3z^2 - rho^2) / rho^5 with A = gm Re^2 C20 / 2
    const double A = 0.5 * p.gm * re2 * h.c20;
    const double s20 = 3.0 * z * z - rho2;
    a[0] += A * (-2.0 * x * inv5 - 5.0 * s20 * x * inv7);
    a[1] += A * (-2.0 * y * inv5 - 5.0 * s20 * y * inv7);
    a[2] += A * (4.0 * z * inv5 - 5.0 * s20 * z * inv7);
    // U22 = B (x^2 - y^2) / rho^5 with B = 3 gm Re^2 C22
    const double B = 3.0 * p.gm * re2 * h.c22;
    const double s22 = x * x - y * y;
    a[0] += B * (2.0 * x * inv5 - 5.0 * s22 * x * inv7);
    a[1] += B * (-2.0 * y * inv5 - 5.0 * s22 * y * inv7);
    a[2] += B * (-5.0 * s22 * z * inv7);
  }
  return a;
}

/// Potential whose gradient is gravity_accel (sign convention: U > 0).
inline double gravity_potential(const Vec<3>& r, const AsteroidParams& p) {
  const double rho2 = dot(r, r);
  const double rho = std::sqrt(rho2);
  double u = p.gm / rho;
  if (p.harmonics) {
    const auto& h = *p.harmonics;
    const double re2 = h.reference_radius * h.reference_radius;
    const double inv5 = 1.0 / (rho2 * rho2 * rho);
    u += 0.5 * p.gm * re2 * h.c20 * (3.0 * r[2] * r[2] - rho2) * inv5;
    u += 3.0 * p.gm * re2 * h.c22 * (r[0] * r[0] - r[1] * r[1]) * inv5;
  }
  return u;
}

// Gravity plus centrifugal and Coriolis terms in the body-fixed frame.
inline Vec<3> frame_accel(const Vec<3>& r, const Vec<3>& v, const AsteroidParams& p) {
  const Vec<3> g = gravity_accel(r, p);
  const double w = p.omega, w2 = w * w;
  return {g[0] + w2 * r[0] + 2.0 * w * v[1], g[1] + w2 * r[1] - 2.0 * w * v[0], g[2]};
}

/// Body-fixed Cartesian vector field for a thrust force u (kg km/s^2).
inline StateVector f_tilde_cartesian(const StateVector& s, const Vec<3>& u,
                                     const AsteroidParams& p, const SpacecraftParams& sc) {
  const Vec<3> a = frame_accel(s.position(), s.velocity(), p);
  const double inv_m = 1.0 / s.m;
  return {s.vx,
          s.vy,
          s.vz,
          a[0] + u[0] * inv_m,
          a[1] + u[1] * inv_m,
          a[2] + u[2] * inv_m,
          -norm(u) / sc.v_exhaust};
}

/// Inertial state (frames coincident at this instant) to the body-fixed
/// frame rotating at omega about +z: v_body = v_inertial - omega x r.
inline StateVector inertial_to_body(const StateVector& s, const AsteroidParams& p) {
  StateVector b = s;
  b.vx = s.vx + p.omega * s.y;
  b.vy = s.vy - p.omega * s.x;
  return b;
}

inline StateVector to_cartesian(const SphericalState& s) {
  const LocalBasis b = local_basis(s.theta, s.psi);
  StateVector c;
  c.x = s.rho * b.e_rho[0];
  c.y = s.rho * b.e_rho[1];
  c.z = s.rho * b.e_rho[2];
  for (int i = 0; i < 3; ++i) {
    const double vi = s.v_rho * b.e_rho[i] + s.v_theta * b.e_theta[i] + s.v_psi * b.e_psi[i];
    (i == 0 ? c.vx : i == 1 ? c.vy : c.vz) = vi;
  }
  c.m = s.m;
  return c;
}

inline SphericalState to_spherical(const StateVector& c) {
  SphericalState s;
  s.rho = std::sqrt(c.x * c.x + c.y * c.y + c.z * c.z);
  s.theta = std::atan2(c.y, c.x);
  s.psi = std::asin(std::clamp(c.z / s.rho, -1.0, 1.0));
  const LocalBasis b = local_basis(s.theta, s.psi);
  const Vec<3> v = c.velocity();
  s.v_rho = dot(v, b.e_rho);
  s.v_theta = dot(v, b.e_theta);
  s.v_psi = dot(v, b.e_psi);
  s.m = c.m;
  return s;
}

// Control-free accelerations along e_rho, e_theta, e_psi, including the
// curvature terms of the rotating local basis.
struct SphericalAccel {
  double a_rho, a_theta, a_psi;
};

inline SphericalAccel coast_accel_spherical(const SphericalState& s, const AsteroidParams& p) {
  const LocalBasis b = local_basis(s.theta, s.psi);
  const Vec<3> r = s.rho * b.e_rho;
  const Vec<3> v = s.v_rho * b.e_rho + s.v_theta * b.e_theta + s.v_psi * b.e_psi;
  const Vec<3> a = frame_accel(r, v, p);
  const double inv_rho = 1.0 / s.rho;
  const double tp = std::tan(s.psi);
  return {dot(a, b.e_rho) + (s.v_theta * s.v_theta + s.v_psi * s.v_psi) * inv_rho,
          dot(a, b.e_theta) + (-s.v_theta * s.v_rho + s.v_theta * s.v_psi * tp) * inv_rho,
          dot(a, b.e_psi) + (-s.v_psi * s.v_rho - s.v_theta * s.v_theta * tp) * inv_rho};
}

/// Vector field in local spherical coordinates.
inline SphericalState f_tilde_spherical(const SphericalState& s, const ControlSpherical& u,
                                        const AsteroidParams& p, const SpacecraftParams& sc) {
  if (!(s.rho >= p.singularity_guard))
    throw NumericalError("f_tilde_spherical: radius inside the singularity guard");
  const SphericalAccel a = coast_accel_spherical(s, p);
  const Vec<3> d = thrust_direction(u);
  const double tm = u.thrust / s.m;
  SphericalState out;
  out.rho = s.v_rho;
  out.theta = s.v_theta / (s.rho * std::cos(s.psi));
  out.psi = s.v_psi / s.rho;
  out.v_rho = a.a_rho + tm * d[0];
  out.v_theta = a.a_theta + tm * d[1];
  out.v_psi = a.a_psi + tm * d[2];
  out.m = -u.thrust / sc.v_exhaust;
  return out;
}

/// Fixed-horizon rescaling: f = (t_f - t_0) f_tilde with t_0 = 0.
template <std::size_t N>
constexpr Vec<N> rescale(const Vec<N>& f_tilde, double t_f) {
  return t_f * f_tilde;
}

// Bounds from the standing growth/Lipschitz assumptions. L_tf is the
// Gronwall constant for trajectories on the rescaled horizon.
struct GrowthBounds {
  double c_f = 0.0;
  double L_f = 0.0;

  double L_tf(double t_f) const { return 1.0 + t_f * L_f * std::exp(t_f * L_f); }
};

template <std::size_t N>
inline double spectral_norm(const Eigen::Matrix<double, int(N), int(N)>& J) {
  Eigen::JacobiSVD<Eigen::Matrix<double, int(N), int(N)>> svd(J);
  return svd.singularValues()(0);
}

/// Sampled estimate of c_f and L_f. `field(state, control)` returns f_tilde,
/// `jacobian(state, control)` its state Jacobian. The maxima over all
/// (state, control) samples are inflated by `safety`.
template <std::size_t N, class Control, class Field, class Jacobian>
GrowthBounds growth_bounds(std::span<const Vec<N>> states, std::span<const Control> controls,
                           Field&& field, Jacobian&& jacobian, double safety = 1.1) {
  if (states.empty() || controls.empty())
    throw ConfigError("growth_bounds: empty sample set");
  GrowthBounds gb;
  for (const auto& s : states) {
    for (const auto& u : controls) {
      const Vec<N> f = field(s, u);
      const double cf = norm(f) / (1.0 + norm(s));
      const double lf = spectral_norm<N>(jacobian(s, u));
      if (!std::isfinite(cf) || !std::isfinite(lf))
        throw NumericalError("growth_bounds: unbounded estimate in sampled region");
      gb.c_f = std::max(gb.c_f, cf);
      gb.L_f = std::max(gb.L_f, lf);
    }
  }
  gb.c_f *= safety;
  gb.L_f *= safety;
  return gb;
}

/// State Jacobian of f_tilde_cartesian for a fixed thrust force u.
/// The point-mass gravity gradient is analytic; harmonic terms are added by
/// central differences of gravity_accel.
inline Eigen::Matrix<double, 7, 7> cartesian_jacobian(const StateVector& s, const Vec<3>& u,
                                                      const AsteroidParams& p) {
  Eigen::Matrix<double, 7, 7> J = Eigen::Matrix<double, 7, 7>::Zero();
  J(0, 3) = J(1, 4) = J(2, 5) = 1.0;
  const Vec<3> r = s.position();
  const double rho = norm(r);
  const double inv3 = 1.0 / (rho * rho * rho), inv5 = inv3 / (rho * rho);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      J(3 + i, j) = p.gm * (3.0 * r[i] * r[j] * inv5 - (i == j ? inv3 : 0.0));
  if (p.harmonics && (p.harmonics->c20 != 0.0 || p.harmonics->c22 != 0.0)) {
    AsteroidParams only_harm = p;
    AsteroidParams point = p;
    point.harmonics.reset();
    const double h = 1e-6 * std::max(1.0, rho);
    for (int j = 0; j < 3; ++j) {
      Vec<3> rp = r, rm = r;
      rp[j] += h;
      rm[j] -= h;
      const Vec<3> dp = gravity_accel(rp, only_harm) - gravity_accel(rp, point);
      const Vec<3> dm = gravity_accel(rm, only_harm) - gravity_accel(rm, point);
      for (int i = 0; i < 3; ++i) J(3 + i, j) += (dp[i] - dm[i]) / (2.0 * h);
    }
  }
  const double w = p.omega;
  J(3, 0) += w * w;
  J(4, 1) += w * w;
  J(3, 4) += 2.0 * w;
  J(4, 3) -= 2.0 * w;
  const double inv_m2 = 1.0 / (s.m * s.m);
  for (int i = 0; i < 3; ++i) J(3 + i, 6) = -u[i] * inv_m2;
  return J;
}

}  // namespace phjb

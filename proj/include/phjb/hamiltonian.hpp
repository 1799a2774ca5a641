#pragma once

// Closed-form optimal Hamiltonian for the bang-off thrust models.
//
// With C(r, q) = q . f_tilde(r, T = 0) and a = (q_i) over the thrust
// channels,
//
//   H(r, t_f, q) = -t_f C(r, q) + t_f max(q_m T_max / v_ex + (T_max / m) |a|, 0)
//               = -t_f min_u q . f_tilde(r, u).

#include <algorithm>
#include <cmath>
#include <span>

#include "phjb/core.hpp"
#include "phjb/models.hpp"

namespace phjb {

template <DynamicsModel M>
using Costate = typename M::State;

template <DynamicsModel M>
double advective_term(const M& model, const typename M::State& s, const Costate<M>& q) {
  return dot(q, model.coast(s));
}

template <DynamicsModel M>
double thrust_costate_norm(const Costate<M>& q) {
  double s = 0.0;
  for (std::size_t c : M::thrust_channels()) s += q[c] * q[c];
  return std::sqrt(s);
}

struct ThrustAngles {
  double alpha = 0.0;
  double delta = 0.0;
};

/// Angles minimizing q3 cos(a) + sin(a) (q4 sin(d) + q5 cos(d)) over the box
/// a in [-pi, pi], d in [-pi/2, pi/2]. The minimum is -|(q3, q4, q5)|.
inline ThrustAngles optimal_angles(double q3, double q4, double q5) {
  const double n = std::sqrt(q3 * q3 + q4 * q4 + q5 * q5);
  if (n == 0.0) return {};
  const double c = std::clamp(-q3 / n, -1.0, 1.0);
  if (q4 == 0.0 && q5 == 0.0) return {std::acos(c), 0.0};
  // The thrust direction is -q / |q|. Choose the sign of sin(alpha) so that
  // cos(delta) >= 0 keeps delta inside [-pi/2, pi/2].
  if (q5 <= 0.0) return {std::acos(c), std::atan2(-q4, -q5)};
  return {-std::acos(c), std::atan2(q4, q5)};
}

/// Bang-off thrust switch; ties go to full thrust.
inline double optimal_thrust(double q_mass, double thrust_costate_norm, double m, double t_max,
                             double v_exhaust) {
  return (q_mass / v_exhaust + thrust_costate_norm / m >= 0.0) ? t_max : 0.0;
}

/// Minimizer of q . f_tilde over the control set.
template <DynamicsModel M>
ControlSpherical optimal_control(const M& model, const typename M::State& s, const Costate<M>& q) {
  constexpr auto ch = M::thrust_channels();
  ControlSpherical u;
  if constexpr (M::kThrust == 1) {
    u.alpha = q[ch[0]] > 0.0 ? kPi : 0.0;
  } else if constexpr (M::kThrust == 2) {
    const double a = q[ch[0]], b = q[ch[1]];
    u.alpha = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(-b, -a);
    u.delta = kPi / 2;
  } else {
    const ThrustAngles ang = optimal_angles(q[ch[0]], q[ch[1]], q[ch[2]]);
    u.alpha = ang.alpha;
    u.delta = ang.delta;
  }
  u.thrust = optimal_thrust(q[kMassIndex<M>], thrust_costate_norm<M>(q), s[kMassIndex<M>],
                            model.t_max(), model.v_exhaust());
  return u;
}

/// H from a precomputed coasting field value; shared by the grid solver.
template <std::size_t N, std::size_t K>
inline double hamiltonian_from_coast(const Vec<N>& coast, double inv_mass, double t_f,
                                     const Vec<N>& q, const std::array<std::size_t, K>& channels,
                                     double t_max, double v_exhaust) {
  double a2 = 0.0;
  for (std::size_t c : channels) a2 += q[c] * q[c];
  const double thrust_term = q[N - 1] * t_max / v_exhaust + t_max * inv_mass * std::sqrt(a2);
  return t_f * (std::max(thrust_term, 0.0) - dot(q, coast));
}

template <DynamicsModel M>
double hamiltonian(const M& model, const typename M::State& s, double t_f, const Costate<M>& q) {
  return hamiltonian_from_coast(model.coast(s), 1.0 / s[kMassIndex<M>], t_f, q,
                                M::thrust_channels(), model.t_max(), model.v_exhaust());
}

/// Per-dimension maxima of |dH/dq_i| over a sampled region:
///   coast channels   t_f |f_i(r, 0)|
///   thrust channels  t_f (|f_i(r, 0)| + T_max / m)
///   mass             t_f T_max / v_ex
template <DynamicsModel M>
typename M::State dissipation_bounds(const M& model, std::span<const typename M::State> region,
                                     double t_f) {
  typename M::State alpha{};
  for (const auto& s : region) {
    const auto f = model.coast(s);
    for (std::size_t i = 0; i + 1 < M::kDim; ++i) alpha[i] = std::max(alpha[i], std::abs(f[i]));
    for (std::size_t c : M::thrust_channels())
      alpha[c] = std::max(alpha[c], std::abs(f[c]) + model.t_max() / s[kMassIndex<M>]);
  }
  alpha[kMassIndex<M>] = model.t_max() / model.v_exhaust();
  return t_f * alpha;
}

}  // namespace phjb

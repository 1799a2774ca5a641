#pragma once

// Level-set representatives of the state constraints and the target set.
//
//   g(r)  <= 0  iff  r is in the closure of the admissible set
//   nu(r) <= 0  iff  r is in the target set

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "phjb/core.hpp"
#include "phjb/dynamics.hpp"

namespace phjb {

struct ConstraintConfig {
  double rho_min = 0.0;  // km
  double rho_max = 0.0;  // km
  double m_min = 0.0;    // kg
  double m_max = 0.0;    // kg
  double length_scale = 1.0;    // km
  double mass_scale = 1.0;      // kg
  double velocity_scale = 1.0;  // km/s

  void validate() const {
    if (!(rho_min > 0.0 && rho_min < rho_max))
      throw ConfigError("constraints: require 0 < rho_min < rho_max");
    if (!(m_min > 0.0 && m_min < m_max))
      throw ConfigError("constraints: require 0 < m_min < m_max");
    if (!(length_scale > 0.0 && mass_scale > 0.0 && velocity_scale > 0.0))
      throw ConfigError("constraints: scales must be strictly positive");
  }

  // Lipschitz constant of g with respect to the Euclidean state distance.
  double lipschitz() const { return std::max(1.0 / length_scale, 1.0 / mass_scale); }
};

// Target set over the non-mass state coordinates of a model. A zero weight
// leaves that coordinate unconstrained (e.g. the orbital phase of a
// circular target orbit).
struct TargetConfig {
  std::vector<double> state;
  std::vector<double> weights;
  double epsilon = 0.0;

  void validate(std::size_t dims) const {
    if (!(epsilon > 0.0)) throw ConfigError("target.epsilon must be > 0");
    if (state.size() != dims || weights.size() != dims)
      throw ConfigError("target: state/weights must have " + std::to_string(dims) +
                        " entries (all non-mass coordinates)");
    bool any = false;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("target.weights must be >= 0");
      any = any || w > 0.0;
    }
    if (!any) throw ConfigError("target.weights: at least one weight must be positive");
  }
};

/// Constraint level from radius and mass: the largest normalized residual.
inline double constraint_level(double rho, double m, const ConstraintConfig& c) {
  return std::max({(c.rho_min - rho) / c.length_scale, (rho - c.rho_max) / c.length_scale,
                   (c.m_min - m) / c.mass_scale});
}

inline double g(const StateVector& s, const ConstraintConfig& c) {
  return constraint_level(std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z), s.m, c);
}

inline double g(const SphericalState& s, const ConstraintConfig& c) {
  return constraint_level(s.rho, s.m, c);
}

/// Weighted Euclidean distance to the target state minus epsilon.
/// `periodic` marks coordinates whose difference is wrapped into [-pi, pi).
inline double nu(std::span<const double> state, const TargetConfig& t,
                 std::span<const bool> periodic = {}) {
  double s2 = 0.0;
  for (std::size_t i = 0; i < t.state.size(); ++i) {
    if (t.weights[i] == 0.0) continue;
    double d = state[i] - t.state[i];
    if (i < periodic.size() && periodic[i]) d = wrap_angle(d);
    const double wd = t.weights[i] * d;
    s2 += wd * wd;
  }
  return std::sqrt(s2) - t.epsilon;
}

// One face of a box-like constraint set: its residual (the face's term in
// g) and the exterior normal in state space.
template <std::size_t N>
struct ConstraintFace {
  const char* name;
  double residual;
  Vec<N> normal;
};

struct RecoverResult {
  bool recoverable = true;
  std::string failing_face;  // empty when recoverable
};

/// True when the state is at least `band` inside every face, or when some
/// sampled control makes the vector field point strictly inward on every
/// face whose residual is within `band` of zero.
template <class Model>
RecoverResult recoverable(const Model& model, const typename Model::State& s,
                          std::span<const ControlSpherical> controls, double band) {
  const auto faces = model.faces(s);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (faces[i].residual >= -band) active.push_back(i);
  if (active.empty()) return {};
  std::vector<bool> face_ok(faces.size(), false);
  for (const auto& u : controls) {
    const auto f = model.dynamics(s, u);
    bool all = true;
    for (std::size_t i : active) {
      const bool inward = dot(f, faces[i].normal) < 0.0;
      face_ok[i] = face_ok[i] || inward;
      all = all && inward;
    }
    if (all) return {};
  }
  for (std::size_t i : active)
    if (!face_ok[i]) return {false, faces[i].name};
  return {false, faces[active.front()].name};
}

}  // namespace phjb

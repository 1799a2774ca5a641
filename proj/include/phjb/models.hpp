#pragma once

// State parameterizations solved on the HJB grid. Every model stores the
// mass as its last coordinate and has a bang-off thrust structure: thrust
// acts on `kThrust` acceleration channels and drains mass at T / v_exhaust.
//
//   ToyModel                      (x, v, m)
//   SpacecraftModel<Axisymmetric> (rho, v_rho, v_theta, m)
//   SpacecraftModel<Planar>       (rho, theta, v_rho, v_theta, m)
//   SpacecraftModel<Spatial>      (rho, theta, psi, v_rho, v_theta, v_psi, m)

#include <array>
#include <cmath>
#include <concepts>
#include <string_view>
#include <vector>

#include "phjb/constraints.hpp"
#include "phjb/core.hpp"
#include "phjb/dynamics.hpp"

namespace phjb {

template <class M>
concept DynamicsModel = requires(const M& m, const typename M::State& s,
                                 const ControlSpherical& u) {
  requires std::same_as<typename M::State, Vec<M::kDim>>;
  { M::kThrust } -> std::convertible_to<std::size_t>;
  { M::thrust_channels() } -> std::same_as<std::array<std::size_t, M::kThrust>>;
  { m.dynamics(s, u) } -> std::same_as<typename M::State>;
  { m.coast(s) } -> std::same_as<typename M::State>;
  { m.constraint(s) } -> std::convertible_to<double>;
  { m.target(s) } -> std::convertible_to<double>;
  { m.t_max() } -> std::convertible_to<double>;
  { m.v_exhaust() } -> std::convertible_to<double>;
  { m.m_min() } -> std::convertible_to<double>;
  { m.m_max() } -> std::convertible_to<double>;
  { M::periodic() } -> std::same_as<std::array<bool, M::kDim>>;
  { M::names() } -> std::same_as<std::array<std::string_view, M::kDim>>;
  { m.faces(s) };
  { m.control_sample(8) } -> std::same_as<std::vector<ControlSpherical>>;
};

template <DynamicsModel M>
inline constexpr std::size_t kMassIndex = M::kDim - 1;

// One-dimensional double integrator with mass depletion. Thrust is signed
// through alpha in {0, pi}: a = T cos(alpha) / m.
struct ToyProblem {
  double m_dry = 1.0;
  double m_propellant = 0.5;
  double t_max = 1.0;
  double v_exhaust = 10.0;
  double x_min = -0.6, x_max = 1.4;  // position box
  double v_limit = 1.0;              // |v| <= v_limit
  double length_scale = 1.0, velocity_scale = 1.0, mass_scale = 1.0;
  TargetConfig target{{0.0, 0.0}, {1.0, 0.5}, 0.05};

  double m_min() const { return m_dry; }
  double m_max() const { return m_dry + m_propellant; }

  void validate() const {
    if (!(m_dry > 0 && m_propellant > 0 && t_max > 0 && v_exhaust > 0))
      throw ConfigError("toy: masses, thrust and exhaust velocity must be > 0");
    if (!(x_min < x_max && v_limit > 0))
      throw ConfigError("toy: require x_min < x_max and v_limit > 0");
    if (!(length_scale > 0 && velocity_scale > 0 && mass_scale > 0))
      throw ConfigError("toy: scales must be > 0");
    target.validate(2);
  }
};

class ToyModel {
 public:
  static constexpr std::size_t kDim = 3;
  static constexpr std::size_t kThrust = 1;
  using State = Vec<3>;

  ToyModel() = default;
  explicit ToyModel(ToyProblem p) : p_(p) { p_.validate(); }

  const ToyProblem& problem() const { return p_; }

  static constexpr std::array<std::size_t, 1> thrust_channels() { return {1}; }
  static constexpr std::array<bool, 3> periodic() { return {false, false, false}; }
  static constexpr std::array<std::string_view, 3> names() { return {"x", "v", "m"}; }

  State dynamics(const State& s, const ControlSpherical& u) const {
    return {s[1], u.thrust * std::cos(u.alpha) / s[2], -u.thrust / p_.v_exhaust};
  }
  State coast(const State& s) const { return {s[1], 0.0, 0.0}; }

  std::array<ConstraintFace<3>, 5> faces(const State& s) const {
    const double lx = p_.length_scale, lv = p_.velocity_scale, lm = p_.mass_scale;
    return {{{"x_min", (p_.x_min - s[0]) / lx, {-1.0 / lx, 0, 0}},
             {"x_max", (s[0] - p_.x_max) / lx, {1.0 / lx, 0, 0}},
             {"v_min", (-p_.v_limit - s[1]) / lv, {0, -1.0 / lv, 0}},
             {"v_max", (s[1] - p_.v_limit) / lv, {0, 1.0 / lv, 0}},
             {"m_min", (p_.m_dry - s[2]) / lm, {0, 0, -1.0 / lm}}}};
  }
  double constraint(const State& s) const {
    double r = -1e300;
    for (const auto& f : faces(s)) r = std::max(r, f.residual);
    return r;
  }
  double target(const State& s) const { return nu(std::span<const double>(s.data(), 2), p_.target); }

  double t_max() const { return p_.t_max; }
  double v_exhaust() const { return p_.v_exhaust; }
  double m_min() const { return p_.m_min(); }
  double m_max() const { return p_.m_max(); }

  std::vector<ControlSpherical> control_sample(int levels) const {
    std::vector<ControlSpherical> out{{0.0, 0.0, 0.0}};
    const int n = std::max(levels, 1);
    for (int k = 1; k <= n; ++k) {
      const double t = p_.t_max * k / n;
      out.push_back({0.0, 0.0, t});
      out.push_back({kPi, 0.0, t});
    }
    return out;
  }

  // Exact flow of the toy dynamics under constant control for duration dt.
  State flow(const State& s, const ControlSpherical& u, double dt) const {
    const double a_sign = std::cos(u.alpha) >= 0.0 ? 1.0 : -1.0;
    if (u.thrust == 0.0) return {s[0] + s[1] * dt, s[1], s[2]};
    const double c = u.thrust / p_.v_exhaust;
    const double w = 1.0 - c * dt / s[2];
    const double lw = std::log(w);
    const double ve = p_.v_exhaust;
    return {s[0] + s[1] * dt + a_sign * ve * (s[2] / c) * (w * lw - w + 1.0),
            s[1] - a_sign * ve * lw, s[2] - c * dt};
  }

 private:
  ToyProblem p_;
};

enum class SphericalLayout { Axisymmetric, Planar, Spatial };

template <SphericalLayout L>
struct LayoutTraits;

template <>
struct LayoutTraits<SphericalLayout::Axisymmetric> {
  static constexpr std::size_t kDim = 4, kThrust = 2;
  static constexpr std::array<std::size_t, 2> thrust = {1, 2};
  static constexpr std::array<bool, 4> periodic = {false, false, false, false};
  static constexpr std::array<std::string_view, 4> names = {"rho", "v_rho", "v_theta", "m"};
};

template <>
struct LayoutTraits<SphericalLayout::Planar> {
  static constexpr std::size_t kDim = 5, kThrust = 2;
  static constexpr std::array<std::size_t, 2> thrust = {2, 3};
  static constexpr std::array<bool, 5> periodic = {false, true, false, false, false};
  static constexpr std::array<std::string_view, 5> names = {"rho", "theta", "v_rho", "v_theta",
                                                            "m"};
};

template <>
struct LayoutTraits<SphericalLayout::Spatial> {
  static constexpr std::size_t kDim = 7, kThrust = 3;
  static constexpr std::array<std::size_t, 3> thrust = {3, 4, 5};
  static constexpr std::array<bool, 7> periodic = {false, true, false, false, false, false, false};
  static constexpr std::array<std::string_view, 7> names = {"rho",     "theta", "psi", "v_rho",
                                                            "v_theta", "v_psi", "m"};
};

template <SphericalLayout L>
class SpacecraftModel {
  using Traits = LayoutTraits<L>;

 public:
  static constexpr std::size_t kDim = Traits::kDim;
  static constexpr std::size_t kThrust = Traits::kThrust;
  using State = Vec<kDim>;

  SpacecraftModel() = default;
  SpacecraftModel(AsteroidParams a, SpacecraftParams sc, ConstraintConfig c, TargetConfig t)
      : ast_(std::move(a)), sc_(sc), con_(c), tgt_(std::move(t)) {
    ast_.validate();
    sc_.validate();
    con_.validate();
    tgt_.validate(kDim - 1);
    if constexpr (L == SphericalLayout::Axisymmetric) {
      if (!ast_.axisymmetric())
        throw ConfigError("axisymmetric mode requires C22 = 0 (gravity independent of longitude)");
    }
  }

  const AsteroidParams& asteroid() const { return ast_; }
  const SpacecraftParams& spacecraft() const { return sc_; }
  const ConstraintConfig& constraints() const { return con_; }
  const TargetConfig& target_config() const { return tgt_; }

  static constexpr std::array<std::size_t, kThrust> thrust_channels() { return Traits::thrust; }
  static constexpr std::array<bool, kDim> periodic() { return Traits::periodic; }
  static constexpr std::array<std::string_view, kDim> names() { return Traits::names; }

  static SphericalState to_spherical(const State& s) {
    SphericalState r;
    if constexpr (L == SphericalLayout::Axisymmetric) {
      r = {s[0], 0.0, 0.0, s[1], s[2], 0.0, s[3]};
    } else if constexpr (L == SphericalLayout::Planar) {
      r = {s[0], s[1], 0.0, s[2], s[3], 0.0, s[4]};
    } else {
      r = SphericalState::from_array(s);
    }
    return r;
  }

  static State from_spherical(const SphericalState& r) {
    if constexpr (L == SphericalLayout::Axisymmetric) {
      return {r.rho, r.v_rho, r.v_theta, r.m};
    } else if constexpr (L == SphericalLayout::Planar) {
      return {r.rho, r.theta, r.v_rho, r.v_theta, r.m};
    } else {
      return r.to_array();
    }
  }

  // In-plane layouts thrust with delta = pi/2, i.e. direction (cos a, sin a).
  static ControlSpherical normalize(ControlSpherical u) {
    if constexpr (L != SphericalLayout::Spatial) u.delta = kPi / 2;
    return u;
  }

  State dynamics(const State& s, const ControlSpherical& u) const {
    return from_spherical(f_tilde_spherical(to_spherical(s), normalize(u), ast_, sc_));
  }
  State coast(const State& s) const { return dynamics(s, ControlSpherical{0.0, 0.0, 0.0}); }

  std::array<ConstraintFace<kDim>, 3> faces(const State& s) const {
    const double rho = s[0], m = s[kDim - 1];
    State n_in{}, n_out{}, n_m{};
    n_in[0] = -1.0 / con_.length_scale;
    n_out[0] = 1.0 / con_.length_scale;
    n_m[kDim - 1] = -1.0 / con_.mass_scale;
    return {{{"rho_min", (con_.rho_min - rho) / con_.length_scale, n_in},
             {"rho_max", (rho - con_.rho_max) / con_.length_scale, n_out},
             {"m_min", (con_.m_min - m) / con_.mass_scale, n_m}}};
  }
  double constraint(const State& s) const { return constraint_level(s[0], s[kDim - 1], con_); }
  double target(const State& s) const {
    const auto p = periodic();
    return nu(std::span<const double>(s.data(), kDim - 1), tgt_,
              std::span<const bool>(p.data(), kDim - 1));
  }

  double t_max() const { return sc_.t_max; }
  double v_exhaust() const { return sc_.v_exhaust; }
  double m_min() const { return con_.m_min; }
  double m_max() const { return con_.m_max; }

  // `directions` thrust directions at full thrust plus the coasting control.
  std::vector<ControlSpherical> control_sample(int directions) const {
    std::vector<ControlSpherical> out{{0.0, 0.0, 0.0}};
    const int n = std::max(directions, 1);
    if constexpr (L == SphericalLayout::Spatial) {
      out.push_back({0.0, 0.0, sc_.t_max});
      out.push_back({kPi, 0.0, sc_.t_max});
      for (int k = 0; k < n; ++k) {
        const double d = -kPi / 2 + kPi * (k + 0.5) / n;
        out.push_back({kPi / 2, d, sc_.t_max});
        out.push_back({-kPi / 2, d, sc_.t_max});
      }
    } else {
      for (int k = 0; k < n; ++k)
        out.push_back({-kPi + 2.0 * kPi * k / n, kPi / 2, sc_.t_max});
    }
    return out;
  }

 private:
  AsteroidParams ast_;
  SpacecraftParams sc_;
  ConstraintConfig con_;
  TargetConfig tgt_;
};

using AxisymmetricModel = SpacecraftModel<SphericalLayout::Axisymmetric>;
using PlanarModel = SpacecraftModel<SphericalLayout::Planar>;
using SpatialModel = SpacecraftModel<SphericalLayout::Spatial>;

static_assert(DynamicsModel<ToyModel>);
static_assert(DynamicsModel<AxisymmetricModel>);
static_assert(DynamicsModel<PlanarModel>);
static_assert(DynamicsModel<SpatialModel>);

}  // namespace phjb

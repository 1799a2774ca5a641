#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "phjb/dynamics.hpp"

using namespace phjb;

namespace {

AsteroidParams castalia() {
  AsteroidParams p;
  p.gm = kGravitationalConstant * 1.4091e12;
  p.omega = 4.2883e-4;
  return p;
}

SpacecraftParams craft() { return SpacecraftParams::from_newtons(1000.0, 0.2, 100.0, 40.0); }

// Spherical -> Cartesian map written independently of the library, over a
// generic scalar so it can be differentiated with a complex step.
template <class T>
std::array<T, 6> sph_to_cart(const std::array<T, 6>& s) {
  using std::cos;
  using std::sin;
  const T rho = s[0], th = s[1], ps = s[2];
  const T ct = cos(th), st = sin(th), cp = cos(ps), sp = sin(ps);
  const std::array<T, 3> er{cp * ct, cp * st, sp}, et{-st, ct, T(0)}, ep{-sp * ct, -sp * st, cp};
  std::array<T, 6> c{};
  for (int i = 0; i < 3; ++i) {
    c[i] = rho * er[i];
    c[3 + i] = s[3] * er[i] + s[4] * et[i] + s[5] * ep[i];
  }
  return c;
}

}  // namespace

TEST(Gravity, PointMassMagnitudeAtTargetRadius) {
  const auto p = castalia();
  const Vec<3> a = gravity_accel({6.1175, 0.0, 0.0}, p);
  EXPECT_NEAR(a[0], -p.gm / (6.1175 * 6.1175), 1e-22);
  EXPECT_NEAR(a[0], -2.513e-9, 5e-13);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a[2], 0.0);
}

TEST(Gravity, PolarPointPullsAlongMinusZ) {
  const Vec<3> a = gravity_accel({0.0, 0.0, 7.0}, castalia());
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_LT(a[2], 0.0);
}

TEST(Gravity, ZeroHarmonicsMatchPointMassBitwise) {
  auto p = castalia();
  auto q = p;
  q.harmonics = Harmonics{0.0, 0.0, 0.8};
  const Vec<3> r{3.1, -4.2, 1.7};
  EXPECT_EQ(gravity_accel(r, p), gravity_accel(r, q));
}

TEST(Gravity, RejectsPointsInsideGuard) {
  auto p = castalia();
  p.singularity_guard = 0.5;
  EXPECT_THROW(gravity_accel({0.1, 0.2, 0.0}, p), NumericalError);
}

TEST(Gravity, AccelerationIsPotentialGradient) {
  auto p = castalia();
  p.harmonics = Harmonics{-0.08, 0.03, 0.9};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 200; ++k) {
    Vec<3> r{u(rng), u(rng), u(rng)};
    if (norm(r) < 2.0) continue;
    const Vec<3> a = gravity_accel(r, p);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-4;
      Vec<3> rp = r, rm = r;
      rp[j] += h;
      rm[j] -= h;
      const double fd = (gravity_potential(rp, p) - gravity_potential(rm, p)) / (2 * h);
      EXPECT_NEAR(a[j], fd, 1e-8 * std::abs(p.gm / dot(r, r)) + 1e-18);
    }
  }
}

TEST(CartesianField, AtRestWithoutThrust) {
  const auto p = castalia();
  const double r0 = 6.2;
  const StateVector s{r0, 0, 0, 0, 0, 0, 1000.1};
  const StateVector f = f_tilde_cartesian(s, {0, 0, 0}, p, craft());
  const double ux = gravity_accel({r0, 0, 0}, p)[0];
  EXPECT_EQ(f.x, 0.0);
  EXPECT_EQ(f.y, 0.0);
  EXPECT_EQ(f.z, 0.0);
  EXPECT_DOUBLE_EQ(f.vx, ux + p.omega * p.omega * r0);
  EXPECT_EQ(f.vy, 0.0);
  EXPECT_EQ(f.vz, 0.0);
  EXPECT_EQ(f.m, 0.0);
}

TEST(CartesianField, MassFlowAtFullThrust) {
  const StateVector s{6.2, 0, 0, 0, 0, 0, 1000.1};
  const StateVector f = f_tilde_cartesian(s, {1.0e-4, 0, 0}, castalia(), craft());
  EXPECT_NEAR(f.m, -2.5e-6, 1e-20);
}

TEST(Units, HundredNewtonsInKgKmPerS2) {
  EXPECT_DOUBLE_EQ(craft().t_max, 0.1);
  EXPECT_DOUBLE_EQ(craft().t_max / 1000.0, 1.0e-4);
}

TEST(Frames, CorotatingPointIsAtRestInBodyFrame) {
  const AsteroidParams p = castalia();
  const StateVector in{3.0, -4.0, 1.5, -p.omega * -4.0, p.omega * 3.0, 0.0, 1000.0};
  const StateVector b = inertial_to_body(in, p);
  EXPECT_NEAR(b.vx, 0.0, 1e-18);
  EXPECT_NEAR(b.vy, 0.0, 1e-18);
  EXPECT_EQ(b.x, in.x);
  EXPECT_EQ(b.z, in.z);
  EXPECT_EQ(b.m, in.m);
}

TEST(Frames, VerticalAndRadialVelocityUnchanged) {
  const AsteroidParams p = castalia();
  const StateVector in{6.0, 0.0, 0.0, 0.01, 0.0, -0.02, 1000.0};
  const SphericalState b = to_spherical(inertial_to_body(in, p));
  EXPECT_DOUBLE_EQ(b.v_rho, 0.01);
  EXPECT_DOUBLE_EQ(b.v_psi, -0.02);
  EXPECT_DOUBLE_EQ(b.v_theta, -p.omega * 6.0);
}

TEST(SphericalField, CoastingHasNoMassFlow) {
  const SphericalState s{6.1, 0.3, 0.0, 1e-4, -2.6e-3, 0.0, 1000.1};
  EXPECT_EQ(f_tilde_spherical(s, {0.7, 0.2, 0.0}, castalia(), craft()).m, 0.0);
}

TEST(SphericalField, RadialThrustEntersOnlyRadialEquation) {
  const auto p = castalia();
  const auto sc = craft();
  const SphericalState s{6.1, 0.3, 0.2, 1e-4, -2.6e-3, 3e-4, 1000.1};
  const auto f0 = f_tilde_spherical(s, {0.0, 0.0, 0.0}, p, sc);
  const auto f1 = f_tilde_spherical(s, {0.0, 0.4, sc.t_max}, p, sc);
  EXPECT_NEAR(f1.v_rho - f0.v_rho, sc.t_max / s.m, 1e-18);
  EXPECT_EQ(f1.v_theta, f0.v_theta);
  EXPECT_EQ(f1.v_psi, f0.v_psi);
}

TEST(SphericalField, RoundTripCoordinates) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const SphericalState s{6.0 + u(rng), 3.0 * u(rng), 1.3 * u(rng), 1e-3 * u(rng),
                           1e-3 * u(rng), 1e-3 * u(rng), 1000.0};
    const SphericalState b = to_spherical(to_cartesian(s));
    EXPECT_NEAR(b.rho, s.rho, 1e-12);
    EXPECT_NEAR(b.theta, s.theta, 1e-12);
    EXPECT_NEAR(b.psi, s.psi, 1e-12);
    EXPECT_NEAR(b.v_theta, s.v_theta, 1e-15);
  }
}

// Complex-step derivative of the coordinate map along the spherical field
// must equal the Cartesian field at the mapped point.
TEST(SphericalField, FrameConsistencyWithCartesian) {
  auto p = castalia();
  p.harmonics = Harmonics{-0.05, 0.02, 0.8};
  const auto sc = craft();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const SphericalState s{6.1 + 2.5 * u(rng), 3.1 * u(rng), 1.4 * u(rng), 2e-3 * u(rng),
                           3e-3 * u(rng), 2e-3 * u(rng), 1000.0 + 0.2 * std::abs(u(rng))};
    const ControlSpherical c{kPi * u(rng), 0.5 * kPi * u(rng), sc.t_max * std::abs(u(rng))};
    const SphericalState fs = f_tilde_spherical(s, c, p, sc);
    const double h = 1e-30;
    std::array<std::complex<double>, 6> z{};
    const Vec<7> sa = s.to_array(), fa = fs.to_array();
    for (int i = 0; i < 6; ++i) z[i] = {sa[i], h * fa[i]};
    const auto cz = sph_to_cart(z);
    // Thrust force in Cartesian coordinates from the local basis.
    const LocalBasis b = local_basis(s.theta, s.psi);
    const Vec<3> d = thrust_direction(c);
    const Vec<3> force = c.thrust * (d[0] * b.e_rho + d[1] * b.e_theta + d[2] * b.e_psi);
    const StateVector fc = f_tilde_cartesian(to_cartesian(s), force, p, sc);
    const Vec<7> fca = fc.to_array();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double diff = cz[i].imag() / h - fca[i];
      num += diff * diff;
      den += fca[i] * fca[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
    EXPECT_DOUBLE_EQ(fs.m, fc.m);
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Rescale, LinearInHorizon) {
  const Vec<3> f{1.5, -2.0, 0.25};
  EXPECT_EQ(rescale(f, 0.0), (Vec<3>{0, 0, 0}));
  EXPECT_EQ(rescale(f, 1.0), f);
  const auto r = rescale(f, 26.9);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(r[i], 26.9 * f[i]);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rescale(f, 2.0 * 3.0)[i], 2.0 * rescale(f, 3.0)[i]);
}

TEST(Rescale, MassDerivativeNonPositive) {
  const auto p = castalia();
  const auto sc = craft();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const SphericalState s{6.1, 0.0, 0.0, 0.0, -2.5e-3, 0.0, 1000.1};
    const double t = (k % 10 == 0) ? 0.0 : sc.t_max * u(rng);
    const double md = f_tilde_spherical(s, {u(rng), 0.0, t}, p, sc).m;
    EXPECT_LE(md, 0.0);
    EXPECT_EQ(md == 0.0, t == 0.0);
  }
}

TEST(GrowthBounds, ZeroHorizonGivesUnitConstant) {
  GrowthBounds gb{1.0, 3.0};
  EXPECT_EQ(gb.L_tf(0.0), 1.0);
  EXPECT_NEAR(gb.L_tf(0.5), 1.0 + 1.5 * std::exp(1.5), 1e-14);
}

TEST(GrowthBounds, SinglePointEqualsLocalJacobianNorm) {
  const auto p = castalia();
  const auto sc = craft();
  const StateVector s{6.1, 0.5, 0.1, 1e-4, -2e-3, 0.0, 1000.1};
  const std::array<Vec<7>, 1> states{s.to_array()};
  const std::array<Vec<3>, 1> controls{Vec<3>{0.0, 0.0, 0.0}};
  auto field = [&](const Vec<7>& x, const Vec<3>& u) {
    return f_tilde_cartesian(StateVector::from_array(x), u, p, sc).to_array();
  };
  auto jac = [&](const Vec<7>& x, const Vec<3>& u) {
    return cartesian_jacobian(StateVector::from_array(x), u, p);
  };
  const GrowthBounds gb = growth_bounds<7, Vec<3>>(states, controls, field, jac, 1.0);
  EXPECT_NEAR(gb.L_f, spectral_norm<7>(cartesian_jacobian(s, {0, 0, 0}, p)), 1e-15);
  EXPECT_GE(gb.L_f, 1.0);
}

TEST(GrowthBounds, JacobianMatchesFiniteDifferences) {
  auto p = castalia();
  p.harmonics = Harmonics{-0.05, 0.02, 0.8};
  const auto sc = craft();
  const StateVector s{5.1, -2.0, 1.2, 1e-3, -2e-3, 5e-4, 1000.1};
  const Vec<3> force{2e-2, -3e-2, 1e-2};
  const auto J = cartesian_jacobian(s, force, p);
  const Vec<7> x = s.to_array();
  for (int j = 0; j < 7; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    Vec<7> xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec<7> fp = f_tilde_cartesian(StateVector::from_array(xp), force, p, sc).to_array();
    const Vec<7> fm = f_tilde_cartesian(StateVector::from_array(xm), force, p, sc).to_array();
    for (int i = 0; i < 7; ++i) EXPECT_NEAR(J(i, j), (fp[i] - fm[i]) / (2 * h), 1e-11);
  }
}

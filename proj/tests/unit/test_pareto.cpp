#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "phjb/pareto.hpp"

using namespace phjb;

namespace {

// Synthetic slices on a 1-D grid with omega = c - t_f - k (z1 - z1_lo),
// which is affine in both t_f and z1 so interpolation is exact.
struct LinearSet {
  double c = 3.0, k = 4.0;
  SliceSet set;
  LinearSet() {
    set.grid = Grid({0.0}, {1.0}, {7});
    for (int i = 0; i <= 8; ++i) set.z1s.push_back(-1.5 + 0.05 * i);  // to -1.1
    for (int i = 0; i <= 12; ++i) set.t_fs.push_back(1.0 + 0.25 * i);  // to 4
    for (double t : set.t_fs)
      for (double z1 : set.z1s)
        set.fields.emplace_back(7, c - t - k * (z1 + 1.5));
    set.validate();
  }
};

const std::array<double, 1> r0{0.5};

}  // namespace

TEST(Dominance, Definition) {
  EXPECT_TRUE(dominates({1, 1}, {1, 2}));
  EXPECT_TRUE(dominates({0, 1}, {1, 1}));
  EXPECT_FALSE(dominates({1, 1}, {1, 1}));
  EXPECT_FALSE(dominates({0, 2}, {1, 1}));
}

TEST(Dominance, FilterKeepsNonDominatedSortedByZ2) {
  const std::vector<ObjectivePoint> pts{{3, 1}, {1, 3}, {2, 2}, {3, 3}, {2, 2.5}, {1, 3}};
  const auto f = dominance_filter(std::span<const ObjectivePoint>(pts));
  ASSERT_EQ(f.size(), 4u);  // the duplicate (1, 3) pair does not dominate itself
  EXPECT_EQ(f[0].z2, 1.0);
  EXPECT_EQ(f[1].z2, 2.0);
  EXPECT_EQ(f[2].z2, 3.0);
  EXPECT_EQ(f[3].z2, 3.0);
}

TEST(Dominance, FilteredSetIsMutuallyNonDominated) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ObjectivePoint> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng)});
  const auto f = dominance_filter(std::span<const ObjectivePoint>(pts));
  for (const auto& a : f)
    for (const auto& b : f) EXPECT_FALSE(dominates(a, b));
  for (const auto& p : pts) {
    bool covered = false;
    for (const auto& a : f) covered = covered || dominates(a, p) || (a.z1 == p.z1 && a.z2 == p.z2);
    EXPECT_TRUE(covered);
  }
}

TEST(Vartheta, ExactSegmentMinimum) {
  const LinearSet ls;
  // At z1 = -1.5: max(3 - t, t - z2) is minimized at t = (3 + z2) / 2.
  const auto v = vartheta(ls.set, r0, {-1.5, 2.1});
  EXPECT_NEAR(v.t_f, 2.55, 1e-12);
  EXPECT_NEAR(v.value, 0.45, 1e-12);
}

TEST(Vartheta, MonotoneInZ) {
  const LinearSet ls;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u1(-1.5, -1.1), u2(0.0, 5.0), d(0.0, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const ObjectivePoint a{u1(rng), u2(rng)};
    const ObjectivePoint b{std::min(a.z1 + d(rng), -1.1), a.z2 + d(rng)};
    EXPECT_GE(vartheta(ls.set, r0, a).value, vartheta(ls.set, r0, b).value - 1e-12);
  }
}

TEST(Utopian, LinearRootAtMostPermissiveBudget) {
  const LinearSet ls;
  const auto u = utopian(ls.set, r0, 1.5);
  EXPECT_EQ(u.z1_star, -1.5);
  EXPECT_NEAR(u.z2_star, ls.c - ls.k * 0.4, 1e-12);
}

TEST(Utopian, InfeasibleReported) {
  LinearSet ls;
  for (auto& f : ls.set.fields) std::fill(f.begin(), f.end(), 1.0);
  EXPECT_THROW(utopian(ls.set, r0, 1.5), InfeasibleError);
}

TEST(ThetaRay, MatchesClosedForm) {
  const LinearSet ls;
  const auto zs = utopian(ls.set, r0, 1.5);
  const double delta = 0.4;  // z1 range above z1*
  for (double mu1 : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    const double mu2 = 1.0 - mu1;
    const auto r = theta_ray(ls.set, r0, zs, mu1);
    ASSERT_TRUE(r.finite()) << mu1;
    // Feasible iff z2 >= c - k (z1 + 1.5).
    const double expect = ls.k * delta / (mu2 + ls.k * mu1);
    const double t_cap = (ls.set.t_fs.back() - zs.z2_star) / mu2;
    const double cap = mu1 > 0 ? std::min(delta / mu1, t_cap) : t_cap;
    EXPECT_GE(r.theta, expect - 1e-12);
    EXPECT_LE(r.theta, expect + 1e-3 * cap + 1e-12);
    EXPECT_LE(r.vartheta_residual, 0.0);
  }
}

TEST(ThetaRay, FrontIsNonDominatedAndMonotone) {
  const LinearSet ls;
  const auto zs = utopian(ls.set, r0, 1.5);
  const auto sigma = sigma_front(ls.set, r0, zs, 33);
  EXPECT_EQ(sigma.size(), 33u);
  const auto front = pareto_front(sigma);
  ASSERT_GE(front.size(), 2u);
  for (std::size_t i = 1; i < front.size(); ++i) {
    EXPECT_GE(front[i].z.z2, front[i - 1].z.z2);
    EXPECT_LE(front[i].z.z1, front[i - 1].z.z1);
  }
}

TEST(ThetaRay, InvalidInputs) {
  const LinearSet ls;
  const auto zs = utopian(ls.set, r0, 1.5);
  EXPECT_THROW(theta_ray(ls.set, r0, zs, 1.5), ConfigError);
  EXPECT_THROW(sigma_front(ls.set, r0, zs, 1), ConfigError);
  const std::array<double, 1> outside{2.0};
  EXPECT_THROW(vartheta(ls.set, outside, {-1.3, 2.0}), OutOfRangeError);
  EXPECT_THROW(vartheta(ls.set, r0, {-1.0, 2.0}), OutOfRangeError);
}

TEST(FrontCsv, HeaderAndInfiniteRows) {
  RaySample a;
  a.mu1 = 0.25;
  RaySample b{0.5, 0.5, 1.0, {-1.3, 2.0}, 2.0, -1e-4};
  std::ostringstream os;
  const std::vector<RaySample> rows{a, b};
  write_front_csv(os, rows);
  EXPECT_EQ(os.str().rfind("mu1,theta,z1,z2,t_f_argmin,vartheta_residual\n", 0), 0u);
  EXPECT_NE(os.str().find("0.25,inf,,,,\n"), std::string::npos);
  EXPECT_NE(os.str().find("0.5,1,-1.3"), std::string::npos);
}

#pragma once

// Objective-space queries over a set of kappa = 0 slices: vartheta, the
// utopian point, ray lengths Theta(mu), the manifold Sigma and the
// dominance-filtered front.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "phjb/core.hpp"
#include "phjb/grid.hpp"

namespace phjb {

struct ObjectivePoint {
  double z1 = 0.0;  // -m_final
  double z2 = 0.0;  // transfer time
};

/// Def. 2 dominance: a <= b componentwise and a != b.
inline bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  return a.z1 <= b.z1 && a.z2 <= b.z2 && (a.z1 != b.z1 || a.z2 != b.z2);
}

/// Non-dominated subset, stably ordered by z2.
template <class T, class Key>
std::vector<T> dominance_filter(std::span<const T> samples, Key&& key) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return key(samples[a]).z2 < key(samples[b]).z2;
  });
  std::vector<T> out;
  for (std::size_t i : order) {
    bool dominated = false;
    for (std::size_t j = 0; j < samples.size() && !dominated; ++j)
      dominated = j != i && dominates(key(samples[j]), key(samples[i]));
    if (!dominated) out.push_back(samples[i]);
  }
  return out;
}

inline std::vector<ObjectivePoint> dominance_filter(std::span<const ObjectivePoint> samples) {
  return dominance_filter(samples, [](const ObjectivePoint& p) { return p; });
}

/// kappa = 0 fields on a (t_f, z1) lattice sharing one grid. Field index is
/// t_f-major: fields[it * z1s.size() + iz].
struct SliceSet {
  Grid grid;
  std::vector<double> z1s;  // strictly increasing
  std::vector<double> t_fs;  // strictly increasing
  std::vector<std::vector<double>> fields;

  void validate() const {
    auto increasing = [](const std::vector<double>& v) {
      for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
      return !v.empty();
    };
    if (!increasing(z1s)) throw ConfigError("slice set: z1 schedule must be strictly increasing");
    if (!increasing(t_fs)) throw ConfigError("slice set: t_f schedule must be strictly increasing");
    if (fields.size() != z1s.size() * t_fs.size())
      throw ConfigError("slice set: field count does not match the schedules");
    for (const auto& f : fields)
      if (f.size() != grid.size()) throw ConfigError("slice set: field size mismatch");
  }

  const std::vector<double>& field(std::size_t it, std::size_t iz) const {
    return fields[it * z1s.size() + iz];
  }

  /// Largest amount by which omega increases with z1 between neighbouring
  /// scheduled slices (0 when the set is ordered).
  double z1_order_violation() const {
    double worst = 0.0;
    for (std::size_t it = 0; it < t_fs.size(); ++it)
      for (std::size_t iz = 0; iz + 1 < z1s.size(); ++iz) {
        const auto& a = field(it, iz);
        const auto& b = field(it, iz + 1);
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, b[i] - a[i]);
      }
    return worst;
  }

  /// Replaces each slice by the pointwise max over all slices with larger
  /// z1, so omega is non-increasing in z1. The high-order march is not
  /// order-preserving; returns the violation that was removed.
  double enforce_z1_order() {
    const double before = z1_order_violation();
    for (std::size_t it = 0; it < t_fs.size(); ++it)
      for (std::size_t iz = z1s.size() - 1; iz-- > 0;) {
        auto& a = fields[it * z1s.size() + iz];
        const auto& b = fields[it * z1s.size() + iz + 1];
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(a[i], b[i]);
      }
    return before;
  }

  /// omega(0, r0, z1, t_f[it]): multilinear in state, linear in z1.
  double omega(std::span<const double> r0, double z1, std::size_t it) const {
    if (!grid.contains(r0)) throw OutOfRangeError("initial state lies outside the solver grid");
    const double tol = 1e-12 * (1.0 + std::abs(z1));
    if (z1 < z1s.front() - tol || z1 > z1s.back() + tol)
      throw OutOfRangeError("z1 = " + std::to_string(z1) + " outside the schedule range [" +
                            std::to_string(z1s.front()) + ", " + std::to_string(z1s.back()) +
                            "]");
    if (z1s.size() == 1) return grid.interpolate(field(it, 0), r0);
    const auto ub = std::upper_bound(z1s.begin(), z1s.end(), z1);
    std::size_t i = std::size_t(std::max<std::ptrdiff_t>(ub - z1s.begin() - 1, 0));
    if (i >= z1s.size() - 1) i = z1s.size() - 2;
    const double w = std::clamp((z1 - z1s[i]) / (z1s[i + 1] - z1s[i]), 0.0, 1.0);
    const double a = grid.interpolate(field(it, i), r0);
    if (w == 0.0) return a;
    const double b = grid.interpolate(field(it, i + 1), r0);
    return w == 1.0 ? b : (1.0 - w) * a + w * b;
  }
};

struct VarthetaValue {
  double value = 0.0;
  double t_f = 0.0;  // minimizing horizon
};

/// vartheta(r0, z) = min over t_f of max(omega(r0, z1, t_f), t_f - z2), with
/// omega piecewise linear in t_f between scheduled horizons and the minimum
/// taken exactly on each segment.
inline VarthetaValue vartheta(const SliceSet& s, std::span<const double> r0,
                              const ObjectivePoint& z) {
  const std::size_t nt = s.t_fs.size();
  std::vector<double> w(nt);
  for (std::size_t i = 0; i < nt; ++i) w[i] = s.omega(r0, z.z1, i);
  VarthetaValue best{std::numeric_limits<double>::infinity(), s.t_fs.front()};
  auto consider = [&](double v, double t) {
    if (v < best.value) best = {v, t};
  };
  for (std::size_t i = 0; i < nt; ++i) consider(std::max(w[i], s.t_fs[i] - z.z2), s.t_fs[i]);
  for (std::size_t i = 0; i + 1 < nt; ++i) {
    // On [t_i, t_{i+1}]: max of omega(t) = w_i + a (t - t_i) and t - z2.
    const double t0 = s.t_fs[i], t1 = s.t_fs[i + 1];
    // An interior minimum needs a decreasing omega meeting the rising line.
    const double a = (w[i + 1] - w[i]) / (t1 - t0);
    if (!(a < 0.0)) continue;
    const double tc = (w[i] - a * t0 + z.z2) / (1.0 - a);
    if (tc > t0 && tc < t1) consider(tc - z.z2, tc);
  }
  return best;
}

struct UtopianPoint {
  double z1_star = 0.0;
  double z2_star = 0.0;
};

/// z1* = -m_max; z2* is the first horizon at which omega at the most
/// permissive scheduled mass budget reaches zero (linear in t_f between
/// scheduled horizons).
inline UtopianPoint utopian(const SliceSet& s, std::span<const double> r0, double m_max) {
  const double z1 = s.z1s.back();
  double prev = s.omega(r0, z1, 0);
  if (prev <= 0.0) return {-m_max, s.t_fs.front()};
  for (std::size_t i = 1; i < s.t_fs.size(); ++i) {
    const double cur = s.omega(r0, z1, i);
    if (cur <= 0.0) {
      const double t = s.t_fs[i - 1] + (s.t_fs[i] - s.t_fs[i - 1]) * prev / (prev - cur);
      return {-m_max, t};
    }
    prev = cur;
  }
  throw InfeasibleError("no admissible trajectory: omega > 0 at the initial state on every slice");
}

struct RayConfig {
  double tau_tol_fraction = 1e-3;  // tau tolerance as a fraction of the ray cap
  int scan_points = 64;
  double plateau_tol = 1e-6;  // accept vartheta <= this when no sign change is found
};

struct RaySample {
  double mu1 = 0.0, mu2 = 0.0;
  double theta = std::numeric_limits<double>::infinity();
  ObjectivePoint z;
  double t_f_argmin = 0.0;
  double vartheta_residual = 0.0;
  bool finite() const { return std::isfinite(theta); }
};

/// Theta(mu) = inf { tau >= 0 : vartheta(r0, z* + mu tau) <= 0 }. The ray is
/// capped where z1 leaves the schedule or z2 passes the last scheduled
/// horizon, whichever comes first; past either, vartheta only plateaus.
inline RaySample theta_ray(const SliceSet& s, std::span<const double> r0, const UtopianPoint& zs,
                           double mu1, const RayConfig& cfg = {}) {
  if (!(mu1 >= 0.0 && mu1 <= 1.0)) throw ConfigError("mu1 must lie in [0, 1]");
  RaySample out;
  out.mu1 = mu1;
  out.mu2 = 1.0 - mu1;
  double cap = std::numeric_limits<double>::infinity();
  if (mu1 > 0.0) cap = (s.z1s.back() - zs.z1_star) / mu1;
  if (out.mu2 > 0.0) cap = std::min(cap, std::max(s.t_fs.back() - zs.z2_star, 0.0) / out.mu2);
  auto z_at = [&](double tau) {
    return ObjectivePoint{std::min(zs.z1_star + mu1 * tau, s.z1s.back()), zs.z2_star + out.mu2 * tau};
  };
  auto eval = [&](double tau) { return vartheta(s, r0, z_at(tau)); };
  auto finish = [&](double tau) {
    const auto v = eval(tau);
    out.theta = tau;
    out.z = z_at(tau);
    out.t_f_argmin = v.t_f;
    out.vartheta_residual = v.value;
    return out;
  };
  if (zs.z1_star < s.z1s.front() - 1e-12 * (1.0 + std::abs(zs.z1_star)))
    throw OutOfRangeError("z1 schedule must start at or below -m_max");
  if (eval(0.0).value <= 0.0) return finish(0.0);
  if (cap <= 0.0) return out;
  const double tol = cfg.tau_tol_fraction * cap;
  const int n = std::max(cfg.scan_points, 2);
  double lo = 0.0, hi = -1.0;
  for (int k = 1; k <= n; ++k) {
    const double tau = cap * double(k) / double(n);
    if (eval(tau).value <= 0.0) {
      hi = tau;
      break;
    }
    lo = tau;
  }
  if (hi < 0.0) {
    for (int k = 0; k <= n; ++k) {
      const double tau = cap * double(k) / double(n);
      if (eval(tau).value <= cfg.plateau_tol) return finish(tau);
    }
    return out;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid).value <= 0.0 ? hi : lo) = mid;
  }
  return finish(hi);
}

/// Rays at mu1 = 0, 1/(n-1), ..., 1.
inline std::vector<RaySample> sigma_front(const SliceSet& s, std::span<const double> r0,
                                          const UtopianPoint& zs, int n_rays,
                                          const RayConfig& cfg = {}) {
  if (n_rays < 2) throw ConfigError("n_rays must be >= 2");
  std::vector<RaySample> out;
  for (int i = 0; i < n_rays; ++i)
    out.push_back(theta_ray(s, r0, zs, double(i) / double(n_rays - 1), cfg));
  return out;
}

inline std::vector<RaySample> pareto_front(std::span<const RaySample> sigma) {
  std::vector<RaySample> finite;
  for (const auto& r : sigma)
    if (r.finite()) finite.push_back(r);
  return dominance_filter<RaySample>(finite, [](const RaySample& r) { return r.z; });
}

inline void write_front_csv(std::ostream& os, std::span<const RaySample> rows) {
  os.precision(17);
  os << "mu1,theta,z1,z2,t_f_argmin,vartheta_residual\n";
  for (const auto& r : rows) {
    os << r.mu1 << ',';
    if (r.finite())
      os << r.theta << ',' << r.z.z1 << ',' << r.z.z2 << ',' << r.t_f_argmin << ','
         << r.vartheta_residual << '\n';
    else
      os << "inf,,,,\n";
  }
}

}  // namespace phjb

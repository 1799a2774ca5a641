#pragma once

// Uniform tensor-product grid with row-major (last dimension fastest)
// storage, and multilinear interpolation of fields defined on it.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phjb/core.hpp"

namespace phjb {

inline constexpr std::size_t kMaxDims = 7;
inline constexpr std::size_t kGhostWidth = 3;
inline constexpr std::size_t kMinPoints = 7;

class Grid {
 public:
  Grid() = default;

  // For a periodic dimension `upper` is the last grid point and the period
  // is count * spacing.
  Grid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> counts,
       std::vector<bool> periodic = {})
      : lower_(std::move(lower)), upper_(std::move(upper)), counts_(std::move(counts)),
        periodic_(std::move(periodic)) {
    const std::size_t d = lower_.size();
    if (d == 0 || d > kMaxDims) throw ConfigError("grid: dimension count must be 1..7");
    if (upper_.size() != d || counts_.size() != d)
      throw ConfigError("grid: lower/upper/counts size mismatch");
    if (periodic_.empty()) periodic_.assign(d, false);
    if (periodic_.size() != d) throw ConfigError("grid: periodic flag size mismatch");
    spacing_.resize(d);
    strides_.resize(d);
    size_ = 1;
    for (std::size_t i = d; i-- > 0;) {
      if (counts_[i] < kMinPoints)
        throw ConfigError("grid: dimension " + std::to_string(i) + " has fewer than " +
                          std::to_string(kMinPoints) + " points");
      if (!(upper_[i] > lower_[i]))
        throw ConfigError("grid: upper must exceed lower in dimension " + std::to_string(i));
      spacing_[i] = (upper_[i] - lower_[i]) / double(counts_[i] - 1);
      strides_[i] = size_;
      size_ *= counts_[i];
    }
  }

  // Periodic dimension covering [lower, lower + period) with `count` points.
  static Grid with_period(std::vector<double> lower, std::vector<double> upper_or_period,
                          std::vector<std::size_t> counts, std::vector<bool> periodic) {
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (i < periodic.size() && periodic[i])
        upper_or_period[i] =
            lower[i] + upper_or_period[i] * double(counts[i] - 1) / double(counts[i]);
    return Grid(std::move(lower), std::move(upper_or_period), std::move(counts),
                std::move(periodic));
  }

  std::size_t dims() const { return counts_.size(); }
  std::size_t size() const { return size_; }
  std::size_t count(std::size_t d) const { return counts_[d]; }
  double lower(std::size_t d) const { return lower_[d]; }
  double upper(std::size_t d) const { return upper_[d]; }
  double spacing(std::size_t d) const { return spacing_[d]; }
  bool periodic(std::size_t d) const { return periodic_[d]; }
  double period(std::size_t d) const { return spacing_[d] * double(counts_[d]); }
  std::size_t stride(std::size_t d) const { return strides_[d]; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  double coordinate(std::size_t d, std::size_t i) const {
    return lower_[d] + spacing_[d] * double(i);
  }

  std::array<std::size_t, kMaxDims> unravel(std::size_t flat) const {
    std::array<std::size_t, kMaxDims> idx{};
    for (std::size_t d = 0; d < dims(); ++d) {
      idx[d] = flat / strides_[d];
      flat -= idx[d] * strides_[d];
    }
    return idx;
  }

  template <std::size_t N>
  Vec<N> point(std::size_t flat) const {
    Vec<N> p{};
    const auto idx = unravel(flat);
    for (std::size_t d = 0; d < N; ++d) p[d] = coordinate(d, idx[d]);
    return p;
  }

  // True when x lies within the grid box (periodic dimensions always do).
  bool contains(std::span<const double> x) const {
    for (std::size_t d = 0; d < dims(); ++d) {
      if (periodic_[d]) continue;
      const double tol = 1e-12 * spacing_[d];
      if (!(x[d] >= lower_[d] - tol && x[d] <= upper_[d] + tol)) return false;
    }
    return true;
  }

  /// Multilinear interpolation of `field` at x. Throws OutOfRangeError for
  /// points outside the grid box.
  double interpolate(std::span<const double> field, std::span<const double> x) const {
    if (!contains(x)) throw OutOfRangeError("interpolate: point outside the grid");
    return interpolate_unchecked(field, x);
  }

  // Clamps non-periodic coordinates into the grid box.
  double interpolate_clamped(std::span<const double> field, std::span<const double> x) const {
    return interpolate_unchecked(field, x);
  }

  bool same_shape(const Grid& o) const {
    return counts_ == o.counts_ && lower_ == o.lower_ && upper_ == o.upper_ &&
           periodic_ == o.periodic_;
  }

 private:
  double interpolate_unchecked(std::span<const double> field, std::span<const double> x) const {
    const std::size_t nd = dims();
    std::array<std::size_t, kMaxDims> i0{}, i1{};
    std::array<double, kMaxDims> w{};
    for (std::size_t d = 0; d < nd; ++d) {
      const std::size_t n = counts_[d];
      double u = (x[d] - lower_[d]) / spacing_[d];
      if (periodic_[d]) {
        u = std::fmod(u, double(n));
        if (u < 0) u += double(n);
        std::size_t k = std::size_t(std::floor(u));
        if (k >= n) k = n - 1;
        i0[d] = k;
        i1[d] = (k + 1) % n;
        w[d] = u - double(k);
      } else {
        if (u <= 0.0) {
          i0[d] = i1[d] = 0;
          w[d] = 0.0;
        } else if (u >= double(n - 1)) {
          i0[d] = i1[d] = n - 1;
          w[d] = 0.0;
        } else {
          std::size_t k = std::size_t(std::floor(u));
          if (k >= n - 1) k = n - 2;
          i0[d] = k;
          i1[d] = k + 1;
          w[d] = u - double(k);
        }
      }
    }
    double acc = 0.0;
    const std::size_t corners = std::size_t(1) << nd;
    for (std::size_t c = 0; c < corners; ++c) {
      double wt = 1.0;
      std::size_t flat = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        const bool hi = (c >> d) & 1u;
        wt *= hi ? w[d] : 1.0 - w[d];
        flat += (hi ? i1[d] : i0[d]) * strides_[d];
      }
      if (wt != 0.0) acc += wt * field[flat];
    }
    return acc;
  }

  std::vector<double> lower_, upper_;
  std::vector<std::size_t> counts_;
  std::vector<bool> periodic_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

}  // namespace phjb

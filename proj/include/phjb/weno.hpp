#pragma once

// Fifth-order WENO one-sided derivatives along one grid dimension.
// Non-periodic dimensions are padded by linear extrapolation, periodic ones
// by wrap-around.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "phjb/grid.hpp"
#include "phjb/parallel.hpp"

namespace phjb {

namespace detail {

inline double weno5_combine(double v1, double v2, double v3, double v4, double v5) {
  const double p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
  const double p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
  const double p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;
  const double a = v1 - 2.0 * v2 + v3, b = v1 - 4.0 * v2 + 3.0 * v3;
  const double c = v2 - 2.0 * v3 + v4, e = v2 - v4;
  const double f = v3 - 2.0 * v4 + v5, h = 3.0 * v3 - 4.0 * v4 + v5;
  const double s1 = 13.0 / 12.0 * a * a + 0.25 * b * b;
  const double s2 = 13.0 / 12.0 * c * c + 0.25 * e * e;
  const double s3 = 13.0 / 12.0 * f * f + 0.25 * h * h;
  const double vmax = std::max({v1 * v1, v2 * v2, v3 * v3, v4 * v4, v5 * v5});
  const double eps = 1e-6 * vmax + 1e-99;
  const double a1 = 0.1 / ((s1 + eps) * (s1 + eps));
  const double a2 = 0.6 / ((s2 + eps) * (s2 + eps));
  const double a3 = 0.3 / ((s3 + eps) * (s3 + eps));
  return (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3);
}

}  // namespace detail

/// Fills 3 ghost cells on each side of a padded line whose interior is
/// line[3 .. 3+n).
inline void fill_ghosts(std::span<double> line, std::size_t n, bool periodic) {
  const std::size_t g = kGhostWidth;
  for (std::size_t k = 1; k <= g; ++k) {
    if (periodic) {
      line[g - k] = line[g + n - k];
      line[g + n - 1 + k] = line[g + k - 1];
    } else {
      line[g - k] = line[g] + double(k) * (line[g] - line[g + 1]);
      line[g + n - 1 + k] = line[g + n - 1] + double(k) * (line[g + n - 1] - line[g + n - 2]);
    }
  }
}

/// Left- and right-biased derivatives of a padded line. `diff` is scratch of
/// size n + 5.
inline void weno5_line(std::span<const double> padded, std::size_t n, double dx,
                       std::span<double> diff, double* dminus, double* dplus,
                       std::size_t out_stride = 1) {
  // diff[j] = (phi_{j-2} - phi_{j-3}) / dx in interior indexing, so
  // D^- phi_i = diff[i + 2] and D^+ phi_i = diff[i + 3].
  for (std::size_t j = 0; j + 1 < n + 2 * kGhostWidth; ++j)
    diff[j] = (padded[j + 1] - padded[j]) / dx;
  for (std::size_t i = 0; i < n; ++i) {
    const double* d = diff.data() + i;  // d[k] = D^+ phi_{i-3+k}
    dminus[i * out_stride] = detail::weno5_combine(d[0], d[1], d[2], d[3], d[4]);
    dplus[i * out_stride] = detail::weno5_combine(d[5], d[4], d[3], d[2], d[1]);
  }
}

/// One-sided WENO5 derivatives of `field` along dimension `dim`, written to
/// `minus` and `plus` (each of grid.size()).
inline void weno5_derivative(const Grid& grid, std::span<const double> field, std::size_t dim,
                             std::span<double> minus, std::span<double> plus,
                             unsigned threads = 1) {
  const std::size_t n = grid.count(dim);
  if (n < kMinPoints) throw ConfigError("weno5: dimension has fewer than 7 points");
  const std::size_t stride = grid.stride(dim);
  const std::size_t lines = grid.size() / n;
  const double dx = grid.spacing(dim);
  const bool periodic = grid.periodic(dim);
  parallel_for(lines, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> padded(n + 2 * kGhostWidth), diff(n + 2 * kGhostWidth);
    for (std::size_t l = b; l < e; ++l) {
      const std::size_t base = (l / stride) * stride * n + l % stride;
      for (std::size_t j = 0; j < n; ++j) padded[kGhostWidth + j] = field[base + j * stride];
      fill_ghosts(padded, n, periodic);
      weno5_line(padded, n, dx, diff, minus.data() + base, plus.data() + base, stride);
    }
  });
}

}  // namespace phjb

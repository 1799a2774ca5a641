#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace phjb {

inline constexpr double kPi = std::numbers::pi;

// Newtonian constant in km^3 / (kg s^2).
inline constexpr double kGravitationalConstant = 6.67430e-20;

// Force conversion: 1 N = 1 kg m/s^2 = 1e-3 kg km/s^2.
inline constexpr double kNewtonToKgKmPerS2 = 1.0e-3;

// Error hierarchy. The CLI maps each kind onto a stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf, CFL violation, singular geometry.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A query that is well formed but has no admissible answer.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Query point outside the tabulated range (grid or schedule).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
constexpr Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(double s, const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline bool all_finite(const Vec<N>& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r - kPi;
}

}  // namespace phjb

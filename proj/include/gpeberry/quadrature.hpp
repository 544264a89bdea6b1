#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gpeberry::quad {

// Composite Simpson over uniformly spaced samples; needs an odd count >= 3.
template <typename T>
T simpson(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson needs an odd number (>=3) of samples");
  T acc = f[0] + f[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return acc * (h / 3.0);
}

// Simpson of g over [lo, hi] with n_intervals (rounded up to even).
template <typename F>
auto simpson(F&& g, double lo, double hi, std::size_t n_intervals) {
  if (n_intervals % 2 == 1) ++n_intervals;
  if (n_intervals < 2) n_intervals = 2;
  const double h = (hi - lo) / double(n_intervals);
  using T = decltype(g(lo));
  T acc = g(lo) + g(hi);
  for (std::size_t i = 1; i < n_intervals; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * g(lo + double(i) * h);
  return acc * (h / 3.0);
}

// Simpson of g over [0, 1] with n_intervals (rounded up to even), adding
// mirrored nodes s and 1 - s in pairs first. A path traversed backwards
// then integrates to the exact negative.
template <typename F>
double mirrored_simpson(F&& g, std::size_t n_intervals) {
  if (n_intervals % 2 == 1) ++n_intervals;
  if (n_intervals < 2) n_intervals = 2;
  const std::size_t n = n_intervals;
  const double nd = double(n);
  double acc = 0.0;
  for (std::size_t i = 0; 2 * i <= n; ++i) {
    const double w = (i == 0) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double pair = (2 * i == n) ? g(double(i) / nd) : g(double(i) / nd) + g(double(n - i) / nd);
    acc += w * pair;
  }
  return acc / (3.0 * nd);
}

// Running integral I_k = Int_0^{x_k} f on a uniform grid. Even k use
// composite Simpson; odd k add a three-point end correction on the last
// interval, keeping O(h^4) local accuracy.
template <typename T>
std::vector<T> cumulative_simpson(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  std::vector<T> out(n, T{});
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  for (std::size_t k = 2; k < n; k += 2) out[k] = out[k - 2] + (h / 3.0) * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
  out[1] = (h / 12.0) * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  for (std::size_t k = 3; k < n; k += 2) out[k] = out[k - 1] + (h / 12.0) * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
  return out;
}

// Rectangle sum over a uniform grid. For functions that vanish with all
// derivatives at the ends this is the trapezoid rule and converges spectrally.
template <typename T>
T grid_sum(std::span<const T> f, double h) {
  T acc{};
  for (const auto& v : f) acc += v;
  return acc * h;
}

}  // namespace gpeberry::quad

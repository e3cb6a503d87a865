#pragma once
// Shared vocabulary: points, error types and the deterministic thread helper.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace curvlab {

/// A point of the plane read as a complex number x + iy.
using Point = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Value and Cartesian gradient of a scalar field at one point.
struct Jet {
  double u = 0.0;
  double ux = 0.0;
  double uy = 0.0;
};

/// Input outside the mathematical domain of an operation (|z| > 1, masked Φ, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerance used for "on or inside the closed disk" checks; spectral grids
/// put nodes exactly on r = 1.
inline constexpr double boundary_slack = 1e-12;

inline void require_in_closed_disk(Point z, const char* what) {
  if (std::abs(z) > 1.0 + boundary_slack) {
    throw DomainError(std::string(what) + ": point outside the closed unit disk");
  }
}

/// Number of worker threads, capped by CURVLAB_THREADS when set.
inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CURVLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, n) over contiguous chunks. Callers write results by
/// index and reduce serially afterwards, so output never depends on the
/// thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Sum in a fixed left-to-right order.
inline double ordered_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace curvlab

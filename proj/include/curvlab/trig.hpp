#pragma once
// Real trigonometric polynomials on the unit circle and the ring FFT used to
// pass between equispaced samples and cos/sin coefficients.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "curvlab/core.hpp"

namespace curvlab {

/// h(θ) = Σ_k cos[k] cos kθ + sin[k] sin kθ.  sin[0] is ignored and kept at 0.
struct TrigPoly {
  std::vector<double> cos{0.0};
  std::vector<double> sin{0.0};

  static TrigPoly constant(double c) {
    TrigPoly t;
    t.cos[0] = c;
    return t;
  }

  std::size_t degree() const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < std::max(cos.size(), sin.size()); ++k) {
      if (coef_cos(k) != 0.0 || (k > 0 && coef_sin(k) != 0.0)) d = k;
    }
    return d;
  }

  double coef_cos(std::size_t k) const { return k < cos.size() ? cos[k] : 0.0; }
  double coef_sin(std::size_t k) const { return (k > 0 && k < sin.size()) ? sin[k] : 0.0; }

  bool finite() const {
    for (double v : cos) if (!std::isfinite(v)) return false;
    for (double v : sin) if (!std::isfinite(v)) return false;
    return true;
  }

  bool is_constant() const { return degree() == 0; }

  double operator()(double theta) const {
    double s = coef_cos(0);
    const std::size_t n = std::max(cos.size(), sin.size());
    for (std::size_t k = 1; k < n; ++k) {
      const double kt = static_cast<double>(k) * theta;
      s += coef_cos(k) * std::cos(kt) + coef_sin(k) * std::sin(kt);
    }
    return s;
  }

  /// Mode-wise d/dθ.
  TrigPoly derivative() const {
    const std::size_t n = std::max(cos.size(), sin.size());
    TrigPoly d;
    d.cos.assign(n, 0.0);
    d.sin.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      d.cos[k] = static_cast<double>(k) * coef_sin(k);
      d.sin[k] = -static_cast<double>(k) * coef_cos(k);
    }
    return d;
  }

  /// Fourier multiplier |k|.
  TrigPoly half_laplacian() const {
    const std::size_t n = std::max(cos.size(), sin.size());
    TrigPoly d;
    d.cos.assign(n, 0.0);
    d.sin.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      d.cos[k] = static_cast<double>(k) * coef_cos(k);
      d.sin[k] = static_cast<double>(k) * coef_sin(k);
    }
    return d;
  }

  /// θ ↦ h(θ - alpha).
  TrigPoly rotated(double alpha) const {
    const std::size_t n = std::max(cos.size(), sin.size());
    TrigPoly d;
    d.cos.assign(n, 0.0);
    d.sin.assign(n, 0.0);
    d.cos[0] = coef_cos(0);
    for (std::size_t k = 1; k < n; ++k) {
      const double c = std::cos(k * alpha), s = std::sin(k * alpha);
      // cos k(θ-α) = cos kθ cos kα + sin kθ sin kα
      d.cos[k] = coef_cos(k) * c - coef_sin(k) * s;
      d.sin[k] = coef_cos(k) * s + coef_sin(k) * c;
    }
    return d;
  }
};

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

}  // namespace detail

/// Half spectrum c_k = Σ_j f_j e^{-2πi jk/n}, k = 0..n/2.
inline std::vector<std::complex<double>> ring_forward(const double* f, std::size_t n) {
  std::vector<double> in(f, f + n);
  std::vector<std::complex<double>> out;
  detail::fft_engine().fwd(out, in);
  return out;
}

/// Inverse of ring_forward (includes the 1/n).
inline std::vector<double> ring_inverse(const std::vector<std::complex<double>>& c, std::size_t n) {
  std::vector<double> out;
  detail::fft_engine().inv(out, c, static_cast<int>(n));
  return out;
}

/// Equispaced samples θ_j = 2πj/n -> cos/sin coefficients up to n/2.
inline TrigPoly trig_from_samples(const std::vector<double>& f) {
  const std::size_t n = f.size();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("trig_from_samples: sample count must be even");
  const auto c = ring_forward(f.data(), n);
  const std::size_t m = n / 2;
  TrigPoly t;
  t.cos.assign(m + 1, 0.0);
  t.sin.assign(m + 1, 0.0);
  const double dn = static_cast<double>(n);
  t.cos[0] = c[0].real() / dn;
  for (std::size_t k = 1; k < m; ++k) {
    t.cos[k] = 2.0 * c[k].real() / dn;
    t.sin[k] = -2.0 * c[k].imag() / dn;
  }
  t.cos[m] = c[m].real() / dn;
  return t;
}

inline std::vector<double> samples_from_trig(const TrigPoly& t, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = t(two_pi * static_cast<double>(j) / static_cast<double>(n));
  return out;
}

}  // namespace curvlab

#pragma once
// Operators on circle data: harmonic extension into the disk, the
// half-Laplacian (Fourier multiplier |k|), tangential derivative and the
// principal-value kernel integral that realises the half-Laplacian at a
// boundary point.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "curvlab/core.hpp"
#include "curvlab/diskgrid.hpp"
#include "curvlab/trig.hpp"

namespace curvlab {

/// Mode k of h extended by r^k.
inline DiskField harmonic_extension(const TrigPoly& h, const GridPtr& grid) {
  const DiskGrid& g = *grid;
  const std::size_t n = std::max(h.cos.size(), h.sin.size());
  DiskField out(grid);
  for (int i = 0; i < g.n_r(); ++i) {
    const double r = g.r()[i];
    for (int j = 0; j < g.n_theta(); ++j) {
      const double th = g.theta()[j];
      double s = h.coef_cos(0);
      double rk = 1.0;
      for (std::size_t k = 1; k < n; ++k) {
        rk *= r;
        const double kt = static_cast<double>(k) * th;
        s += rk * (h.coef_cos(k) * std::cos(kt) + h.coef_sin(k) * std::sin(kt));
      }
      out[g.index(i, j)] = s;
    }
  }
  return out;
}

inline DiskField harmonic_extension(const BoundaryField& h, const GridPtr& grid) {
  return harmonic_extension(h.coefficients(), grid);
}

/// H(z) at an arbitrary point of the closed disk.
inline double harmonic_extension_at(const TrigPoly& h, Point z) {
  require_in_closed_disk(z, "harmonic_extension_at");
  const double r = std::abs(z), th = std::arg(z);
  const std::size_t n = std::max(h.cos.size(), h.sin.size());
  double s = h.coef_cos(0), rk = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    rk *= r;
    s += rk * (h.coef_cos(k) * std::cos(k * th) + h.coef_sin(k) * std::sin(k * th));
  }
  return s;
}

inline BoundaryField half_laplacian(const BoundaryField& h) {
  return BoundaryField::from_trig(h.coefficients().half_laplacian(), h.size());
}

inline BoundaryField tangential_derivative(const BoundaryField& h) {
  return BoundaryField::from_trig(h.coefficients().derivative(), h.size());
}

/// p.v. ∫_{∂D} (h(p) - h(z)) / (2 (1 - z·p)) dz for a trigonometric polynomial h.
///
/// With g(σ) = h(θ_p + σ) and 2(1 - cos σ) = 4 sin²(σ/2), the linear part
/// g'(0) sin σ is odd and integrates to zero in the principal-value sense, so
/// the integral equals ∫ [g(0) - g(σ) + g'(0) sin σ] / (4 sin²(σ/2)) dσ, whose
/// integrand is a trigonometric polynomial of degree < deg h.  The periodic
/// trapezoid rule with more than 2 deg h nodes is then exact.
inline double pv_blowup_integral(const TrigPoly& h, Point p) {
  if (!h.finite()) throw std::invalid_argument("pv_blowup_integral: non-finite coefficients");
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError("pv_blowup_integral: p must lie on the unit circle");
  const double tp = std::arg(p);
  const TrigPoly dh = h.derivative();
  const TrigPoly d2h = dh.derivative();
  const double g0 = h(tp), g1 = dh(tp), g2 = d2h(tp);
  const std::size_t n = std::max<std::size_t>(64, 4 * h.degree() + 8);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sigma = two_pi * static_cast<double>(j) / static_cast<double>(n);
    if (j == 0) {
      s += -0.5 * g2;
      continue;
    }
    const double half = std::sin(0.5 * sigma);
    s += (g0 - h(tp + sigma) + g1 * std::sin(sigma)) / (4.0 * half * half);
  }
  return s * two_pi / static_cast<double>(n);
}

inline double pv_blowup_integral(const BoundaryField& h, Point p) {
  for (double v : h.values())
    if (!std::isfinite(v)) throw std::invalid_argument("pv_blowup_integral: non-finite boundary data");
  return pv_blowup_integral(h.coefficients(), p);
}

}  // namespace curvlab

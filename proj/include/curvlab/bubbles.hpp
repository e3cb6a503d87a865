#pragma once
// Closed-form solutions of the constant-curvature problems
//   -Δv = 2 K0 e^v,  ∂v/∂ν + 2 = 2 h0 e^{v/2}
// on the disk, together with the entire solutions on R^2 and R^2_+, their
// quantized masses, the kernel of the linearization at the radial profile and
// the limit energy.

#include <cmath>
#include <optional>
#include <utility>

#include "curvlab/core.hpp"
#include "curvlab/quadrature.hpp"

namespace curvlab {

struct BubbleConstants {
  double K0 = 0.0;
  double h0 = 0.0;
  bool admissible = false;
  /// h0^2 + K0 == 0; the boundary mass fraction is undefined there.
  bool degenerate = false;
  std::optional<double> phi0;     // h0 + sqrt(h0^2 + K0)
  std::optional<double> lambda0;  // 2 / (K0 + h0^2)
  std::optional<double> beta;     // 2π h0 / sqrt(h0^2 + K0)

  double phi() const {
    if (!admissible) throw DomainError("bubble constants are not admissible");
    return *phi0;
  }
};

/// Solvability of the constant problem: K0 > 0, or K0 <= 0 and h0 > sqrt(-K0).
inline bool admissible_pair(double K0, double h0) {
  return K0 > 0.0 || h0 > std::sqrt(-K0);
}

inline BubbleConstants bubble_constants(double K0, double h0) {
  BubbleConstants c;
  c.K0 = K0;
  c.h0 = h0;
  const double disc = h0 * h0 + K0;
  c.degenerate = (disc == 0.0);
  c.admissible = admissible_pair(K0, h0);
  if (c.admissible) {
    const double s = std::sqrt(disc);
    c.phi0 = h0 + s;
    c.lambda0 = 2.0 / disc;
    c.beta = two_pi * h0 / s;
  }
  return c;
}

/// v_a(z) = 2 log{ 2 φ0 (1-|a|^2) / (φ0^2 |1 - conj(a) z|^2 + K0 |z - a|^2) }.
class DiskBubble {
 public:
  DiskBubble(BubbleConstants consts, Point a) : c_(std::move(consts)), a_(a) {
    if (!c_.admissible) throw DomainError("DiskBubble: constants not admissible");
    if (!(std::abs(a_) < 1.0)) throw DomainError("DiskBubble: |a| must be < 1");
  }

  const BubbleConstants& constants() const { return c_; }
  Point a() const { return a_; }

  double denominator(Point z) const {
    const double phi = *c_.phi0;
    return phi * phi * std::norm(1.0 - std::conj(a_) * z) + c_.K0 * std::norm(z - a_);
  }

  double operator()(Point z) const {
    const double phi = *c_.phi0;
    return 2.0 * std::log(2.0 * phi * (1.0 - std::norm(a_)) / denominator(z));
  }

  Jet jet(Point z) const {
    const double phi = *c_.phi0;
    const double d = denominator(z);
    // ∇|1 - ā z|^2 = 2|a|^2 z - 2a,  ∇|z - a|^2 = 2(z - a), read as vectors.
    const Point grad_d = phi * phi * (2.0 * std::norm(a_) * z - 2.0 * a_) + 2.0 * c_.K0 * (z - a_);
    const double u = 2.0 * std::log(2.0 * phi * (1.0 - std::norm(a_)) / d);
    return {u, -2.0 * grad_d.real() / d, -2.0 * grad_d.imag() / d};
  }

 private:
  BubbleConstants c_;
  Point a_;
};

inline double disk_bubble_eval(const DiskBubble& b, Point z) {
  require_in_closed_disk(z, "disk_bubble_eval");
  return b(z);
}

/// Entire solution on R^2: 2 log{ 2λ / (K0 λ^2 + |x - x0|^2) }.
inline double plane_bubble_eval(double K0, double lam, Point x0, Point x) {
  if (!(K0 > 0.0)) throw DomainError("plane_bubble_eval: K0 must be positive");
  if (!(lam > 0.0)) throw DomainError("plane_bubble_eval: lambda must be positive");
  return 2.0 * std::log(2.0 * lam / (K0 * lam * lam + std::norm(x - x0)));
}

/// Solution on the upper half-plane:
/// 2 log{ 2λ / (K0 λ^2 + (w1 - w0)^2 + (w2 + λ h0)^2) }.
inline double halfplane_bubble_eval(double K0, double h0, double lam, double w0, Point w) {
  if (!admissible_pair(K0, h0)) throw DomainError("halfplane_bubble_eval: constants not admissible");
  if (!(lam > 0.0)) throw DomainError("halfplane_bubble_eval: lambda must be positive");
  if (w.imag() < -boundary_slack) throw DomainError("halfplane_bubble_eval: point below the real axis");
  const double dx = w.real() - w0;
  const double dy = w.imag() + lam * h0;
  return 2.0 * std::log(2.0 * lam / (K0 * lam * lam + dx * dx + dy * dy));
}

/// K0 ∫_{R^2} e^v for the entire solution.
inline double plane_mass(double K0, double lam, Point x0) {
  const auto rule = quad::plane_rule(x0, lam * std::sqrt(K0));
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    s += rule.w[i] * std::exp(plane_bubble_eval(K0, lam, x0, Point(rule.x[i], rule.y[i])));
  }
  return K0 * s;
}

struct HalfplaneMasses {
  double interior;  // K0 ∫_{R^2_+} e^v
  double boundary;  // h0 ∫_{∂R^2_+} e^{v/2}
};

inline HalfplaneMasses halfplane_masses(double K0, double h0, double lam, double w0) {
  const double length = lam * std::sqrt(std::abs(K0) + h0 * h0);
  const auto area = quad::halfplane_rule(w0, length);
  double si = 0.0;
  for (std::size_t i = 0; i < area.size(); ++i) {
    si += area.w[i] * std::exp(halfplane_bubble_eval(K0, h0, lam, w0, Point(area.x[i], area.y[i])));
  }
  const auto line = quad::line_rule(w0, length);
  double sb = 0.0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    sb += line.w[i] * std::exp(0.5 * halfplane_bubble_eval(K0, h0, lam, w0, Point(line.x[i], 0.0)));
  }
  return {K0 * si, h0 * sb};
}

/// Profile concentrating at the boundary point p as lam -> 1: the disk
/// bubble with centre a = lam p.
inline DiskBubble moving_profile(const BubbleConstants& consts, Point p, double lam) {
  if (std::abs(std::abs(p) - 1.0) > boundary_slack) throw DomainError("moving_profile: p must lie on the unit circle");
  if (!(lam > 0.0 && lam < 1.0)) throw DomainError("moving_profile: lambda must lie in (0, 1)");
  return DiskBubble(consts, lam * p / std::abs(p));
}

inline double moving_profile_eval(const BubbleConstants& consts, Point p, double lam, Point z) {
  require_in_closed_disk(z, "moving_profile_eval");
  return moving_profile(consts, p, lam)(z);
}

/// Kernel of the linearization at the radial profile:
/// ψ1 = x / (φ0^2 + K0|z|^2), ψ2 = y / (φ0^2 + K0|z|^2).
inline std::pair<double, double> kernel_eval(const BubbleConstants& consts, Point z) {
  const double phi = consts.phi();
  const double d = phi * phi + consts.K0 * std::norm(z);
  return {z.real() / d, z.imag() / d};
}

/// Energy of the constant-curvature profiles, independent of the centre:
/// -8π (1 + log(φ0 / 2)).
inline double limit_energy(const BubbleConstants& consts) {
  return -8.0 * pi * (1.0 + std::log(consts.phi() / 2.0));
}

}  // namespace curvlab

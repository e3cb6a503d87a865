#pragma once
// Automorphisms of the unit disk, the Cayley pair between the upper
// half-plane and the disk, and the conformal pullback of a log-density.

#include <cmath>
#include <functional>
#include <utility>

#include "curvlab/core.hpp"

namespace curvlab {

/// z ↦ e^{i rot} (a + z) / (1 + conj(a) z), |a| < 1.
class MoebiusMap {
 public:
  MoebiusMap() = default;
  explicit MoebiusMap(Point a, double rot = 0.0) : a_(a), rot_(std::remainder(rot, two_pi)) {
    if (!(std::abs(a) < 1.0)) throw DomainError("MoebiusMap: |a| must be < 1");
    if (rot_ < 0.0) rot_ += two_pi;
  }

  Point a() const { return a_; }
  double rot() const { return rot_; }

  Point operator()(Point z) const {
    return std::polar(1.0, rot_) * (a_ + z) / (1.0 + std::conj(a_) * z);
  }

  /// |f'(z)| = (1 - |a|^2) / |1 + conj(a) z|^2.
  double derivative_modulus(Point z) const {
    return (1.0 - std::norm(a_)) / std::norm(1.0 + std::conj(a_) * z);
  }

  /// Complex derivative f'(z).
  Point derivative(Point z) const {
    const Point d = 1.0 + std::conj(a_) * z;
    return std::polar(1.0, rot_) * (1.0 - std::norm(a_)) / (d * d);
  }

  MoebiusMap inverse() const {
    // f^{-1}(w) = (e^{-i rot} w - a) / (1 - conj(a) e^{-i rot} w)
    //           = e^{-i rot} (w - a e^{i rot}) / (1 - conj(a e^{i rot}) w)
    return MoebiusMap(-a_ * std::polar(1.0, rot_), -rot_);
  }

  /// (this ∘ other)(z) = this(other(z)).
  MoebiusMap compose(const MoebiusMap& other) const {
    // Recover the normal form from the image of 0 and the argument of f'(0).
    const Point a_new_img = (*this)(other(Point(0.0, 0.0)));
    const Point d0 = derivative(other(Point(0.0, 0.0))) * other.derivative(Point(0.0, 0.0));
    // A map g = e^{it} f_b satisfies g(0) = e^{it} b and g'(0) = e^{it}(1 - |b|^2).
    const double t = std::arg(d0);
    const Point b = a_new_img * std::polar(1.0, -t);
    return MoebiusMap(b, t);
  }

 private:
  Point a_{0.0, 0.0};
  double rot_ = 0.0;
};

struct MoebiusImage {
  Point image;
  double derivative_modulus;
};

inline MoebiusImage moebius_apply(const MoebiusMap& m, Point z) {
  require_in_closed_disk(z, "moebius_apply");
  return {m(z), m.derivative_modulus(z)};
}

enum class CayleyDirection { halfplane_to_disk, disk_to_halfplane };

/// The pair w ↦ (i - w)/(w + i) and its inverse z ↦ i (1 - z)/(1 + z).
inline Point cayley(Point p, CayleyDirection dir) {
  const Point i(0.0, 1.0);
  if (dir == CayleyDirection::halfplane_to_disk) {
    if (p.imag() < -boundary_slack) throw DomainError("cayley: point below the real axis");
    return (i - p) / (p + i);
  }
  require_in_closed_disk(p, "cayley");
  if (std::abs(p + 1.0) < 1e-14) throw DomainError("cayley: z = -1 is the pole of the inverse map");
  return i * (1.0 - p) / (1.0 + p);
}

/// A scalar function of the disk given by value.
using ScalarFn = std::function<double(Point)>;

/// z ↦ u(f(z)) + 2 log |f'(z)|.
inline ScalarFn pullback(ScalarFn u, const MoebiusMap& m) {
  return [u = std::move(u), m](Point z) {
    require_in_closed_disk(z, "pullback");
    return u(m(z)) + 2.0 * std::log(m.derivative_modulus(z));
  };
}

}  // namespace curvlab

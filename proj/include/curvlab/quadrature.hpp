#pragma once
// Composite Gauss-Legendre rules on the disk, the circle, boundary caps and
// (via a tangent substitution) the plane and the upper half-plane.
//
// Concentrating integrands (bubbles at scale eps near a boundary point) are
// handled by geometric grading of the panel breakpoints toward the point of
// concentration, which keeps every panel within a bounded ratio of its
// distance to the near-singularity.

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "curvlab/core.hpp"

namespace curvlab::quad {

struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

/// Nodes (x, y) with weights; the weight already contains any Jacobian.
struct PlanarRule {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
  void push(double px, double py, double pw) {
    x.push_back(px);
    y.push_back(py);
    w.push_back(pw);
  }
};

/// Angles on the unit circle with arc-length weights.
struct CircleRule {
  std::vector<double> theta;
  std::vector<double> w;
  std::size_t size() const { return theta.size(); }
};

inline constexpr int gl_order = 20;

/// 20-point Gauss-Legendre on [-1, 1].
inline const Rule1D& gauss_legendre() {
  static const Rule1D rule = [] {
    using G = boost::math::quadrature::gauss<double, gl_order>;
    Rule1D r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(-a[a.size() - 1 - i]);
      r.w.push_back(w[a.size() - 1 - i]);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
    }
    return r;
  }();
  return rule;
}

/// Gauss-Legendre on every panel [b_k, b_{k+1}] of a sorted breakpoint list.
inline Rule1D panel_rule(const std::vector<double>& breaks) {
  const Rule1D& g = gauss_legendre();
  Rule1D out;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.x.push_back(mid + half * g.x[i]);
      out.w.push_back(half * g.w[i]);
    }
  }
  return out;
}

namespace detail {

inline void dedupe(std::vector<double>& b) {
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double v : b) {
    if (out.empty() || v - out.back() > 1e-15 * std::max(1.0, std::abs(v))) out.push_back(v);
  }
  b.swap(out);
}

/// Splits panels longer than max_len.
inline void refine_long(std::vector<double>& b, double max_len) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    out.push_back(b[k]);
    const double len = b[k + 1] - b[k];
    const int pieces = static_cast<int>(std::ceil(len / max_len));
    for (int p = 1; p < pieces; ++p) out.push_back(b[k] + len * p / pieces);
  }
  out.push_back(b.back());
  b.swap(out);
}

}  // namespace detail

/// Breakpoints on [lo, hi] accumulating geometrically at `anchor` with
/// smallest spacing about scale/8. A scale >= 1 gives plain uniform panels.
inline std::vector<double> graded_breaks(double lo, double hi, double anchor, double scale,
                                         double max_len) {
  std::vector<double> b{lo, hi};
  if (anchor >= lo && anchor <= hi) b.push_back(anchor);
  if (scale < 1.0) {
    for (double d = scale / 8.0; d < (hi - lo); d *= 2.0) {
      if (anchor - d > lo) b.push_back(anchor - d);
      if (anchor + d < hi) b.push_back(anchor + d);
    }
  }
  detail::dedupe(b);
  detail::refine_long(b, max_len);
  return b;
}

/// Tensor polar rule on the unit disk, graded toward the boundary point at
/// angle `focus` with concentration length `scale`.
inline PlanarRule disk_rule(double focus, double scale) {
  const Rule1D rr = panel_rule(graded_breaks(0.0, 1.0, 1.0, scale, 0.25));
  const Rule1D tt = panel_rule(graded_breaks(-pi, pi, 0.0, scale, pi / 4));
  PlanarRule out;
  out.x.reserve(rr.size() * tt.size());
  out.y.reserve(rr.size() * tt.size());
  out.w.reserve(rr.size() * tt.size());
  for (std::size_t i = 0; i < rr.size(); ++i) {
    for (std::size_t j = 0; j < tt.size(); ++j) {
      const double th = focus + tt.x[j];
      out.push(rr.x[i] * std::cos(th), rr.x[i] * std::sin(th), rr.w[i] * tt.w[j] * rr.x[i]);
    }
  }
  return out;
}

/// Circle rule graded toward angle `focus`.
inline CircleRule circle_rule(double focus, double scale) {
  const Rule1D tt = panel_rule(graded_breaks(-pi, pi, 0.0, scale, pi / 4));
  CircleRule out;
  for (std::size_t j = 0; j < tt.size(); ++j) {
    out.theta.push_back(focus + tt.x[j]);
    out.w.push_back(tt.w[j]);
  }
  return out;
}

/// Rule on the lens D ∩ B_radius(p), p = e^{i angle}, written in polar
/// coordinates (s, phi) centred at p. The angular range at distance s is
/// |phi - pi| <= pi/2 - asin(s/2) relative to the direction of p.
inline PlanarRule cap_rule(double angle, double radius, double scale) {
  if (!(radius > 0.0) || radius > 2.0) throw DomainError("cap_rule: radius must lie in (0, 2]");
  const Rule1D ss = panel_rule(graded_breaks(0.0, radius, 0.0, scale, 0.125));
  const Rule1D& g = gauss_legendre();
  PlanarRule out;
  const Point p = std::polar(1.0, angle);
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const double s = ss.x[i];
    const double half = 0.5 * pi - std::asin(0.5 * s);
    // four panels across [pi - half, pi + half]
    for (int panel = 0; panel < 4; ++panel) {
      const double a = pi - half + (2.0 * half) * panel / 4.0;
      const double b = pi - half + (2.0 * half) * (panel + 1) / 4.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double phi = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
        const Point z = p + s * p * std::polar(1.0, phi);
        out.push(z.real(), z.imag(), ss.w[i] * 0.5 * (b - a) * g.w[j] * s);
      }
    }
  }
  return out;
}

/// Rule on the boundary arc ∂D ∩ B_radius(e^{i angle}).
inline CircleRule arc_rule(double angle, double radius, double scale) {
  if (!(radius > 0.0) || radius > 2.0) throw DomainError("arc_rule: radius must lie in (0, 2]");
  const double half = radius >= 2.0 ? pi : 2.0 * std::asin(0.5 * radius);
  const Rule1D tt = panel_rule(graded_breaks(-half, half, 0.0, scale, pi / 4));
  CircleRule out;
  for (std::size_t j = 0; j < tt.size(); ++j) {
    out.theta.push_back(angle + tt.x[j]);
    out.w.push_back(tt.w[j]);
  }
  return out;
}

namespace detail {

/// rho = L tan(s) on [0, pi/2) in s; returns (rho, d rho) pairs.
inline Rule1D tangent_radial(double length) {
  std::vector<double> b;
  for (int k = 0; k <= 16; ++k) b.push_back(0.5 * pi * k / 16.0);
  const Rule1D s = panel_rule(b);
  Rule1D out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = std::cos(s.x[i]);
    out.x.push_back(length * std::tan(s.x[i]));
    out.w.push_back(length * s.w[i] / (c * c));
  }
  return out;
}

}  // namespace detail

/// Polar rule on R^2 about `center`; rho = length * tan(s).
inline PlanarRule plane_rule(Point center, double length) {
  const Rule1D rho = detail::tangent_radial(length);
  const Rule1D tt = panel_rule(graded_breaks(0.0, two_pi, 0.0, 1.0, pi / 8));
  PlanarRule out;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < tt.size(); ++j) {
      const Point z = center + std::polar(rho.x[i], tt.x[j]);
      out.push(z.real(), z.imag(), rho.w[i] * tt.w[j] * rho.x[i]);
    }
  }
  return out;
}

/// Polar rule on the closed upper half-plane about (center, 0).
inline PlanarRule halfplane_rule(double center, double length) {
  const Rule1D rho = detail::tangent_radial(length);
  const Rule1D tt = panel_rule(graded_breaks(0.0, pi, 0.0, 1.0, pi / 8));
  PlanarRule out;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    for (std::size_t j = 0; j < tt.size(); ++j) {
      const Point z = Point(center, 0.0) + std::polar(rho.x[i], tt.x[j]);
      out.push(z.real(), z.imag(), rho.w[i] * tt.w[j] * rho.x[i]);
    }
  }
  return out;
}

/// Rule on the real line through t = center + length * tan(s), s in (-pi/2, pi/2).
inline Rule1D line_rule(double center, double length) {
  const Rule1D half = detail::tangent_radial(length);
  Rule1D out;
  for (std::size_t i = half.size(); i-- > 0;) {
    out.x.push_back(center - half.x[i]);
    out.w.push_back(half.w[i]);
  }
  for (std::size_t i = 0; i < half.size(); ++i) {
    out.x.push_back(center + half.x[i]);
    out.w.push_back(half.w[i]);
  }
  return out;
}

}  // namespace curvlab::quad

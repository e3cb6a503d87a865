#pragma once
// Integral identities satisfied by solutions of
//   -Δu = 2K e^u in D,  ∂u/∂ν + 2 = 2h e^{u/2} on ∂D:
// Gauss-Bonnet, the Pohozaev identity for an arbitrary polynomial vector
// field, the Kazdan-Warner identity (and its rotated variant), the energy
// functional, localized masses, and the boundary/interior integrals whose
// λ -> 1 limits encode the blow-up conditions.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "curvlab/bubbles.hpp"
#include "curvlab/core.hpp"
#include "curvlab/diskgrid.hpp"
#include "curvlab/prescription.hpp"
#include "curvlab/quadrature.hpp"

namespace curvlab {

/// A field known in closed form with value and gradient everywhere, plus a
/// concentration hint (boundary angle and length scale) for quadrature.
struct SmoothField {
  std::function<Jet(Point)> jet;
  double focus = 0.0;
  double scale = 1.0;
};

inline SmoothField smooth_field(const DiskBubble& b) {
  const Point a = b.a();
  const double s = std::abs(a) > 0.0 ? std::max(1e-6, 1.0 - std::abs(a)) : 1.0;
  return {[b](Point z) { return b.jet(z); }, std::arg(a), s};
}

/// u and ∇u on a disk rule and on a circle rule.
struct FieldSample {
  std::vector<double> x, y, w, u, ux, uy;
  std::vector<double> bt, bw, bu, bux, buy;
};

inline FieldSample sample_field(const DiskField& f) {
  const DiskGrid& g = *f.grid();
  const auto [fx, fy] = gradient(f);
  FieldSample s;
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_theta(); ++j) {
      const Point z = g.node(i, j);
      const std::size_t k = g.index(i, j);
      s.x.push_back(z.real());
      s.y.push_back(z.imag());
      s.w.push_back(g.disk_weight(i));
      s.u.push_back(f[k]);
      s.ux.push_back(fx[k]);
      s.uy.push_back(fy[k]);
    }
  }
  for (int j = 0; j < g.n_theta(); ++j) {
    const std::size_t k = g.index(0, j);
    s.bt.push_back(g.theta()[j]);
    s.bw.push_back(g.circle_weight());
    s.bu.push_back(f[k]);
    s.bux.push_back(fx[k]);
    s.buy.push_back(fy[k]);
  }
  return s;
}

inline FieldSample sample_field(const SmoothField& f) {
  const auto disk = quad::disk_rule(f.focus, f.scale);
  const auto circ = quad::circle_rule(f.focus, f.scale);
  FieldSample s;
  s.x = disk.x;
  s.y = disk.y;
  s.w = disk.w;
  s.u.resize(disk.size());
  s.ux.resize(disk.size());
  s.uy.resize(disk.size());
  parallel_for(disk.size(), [&](std::size_t k) {
    const Jet J = f.jet(Point(disk.x[k], disk.y[k]));
    s.u[k] = J.u;
    s.ux[k] = J.ux;
    s.uy[k] = J.uy;
  });
  for (std::size_t k = 0; k < circ.size(); ++k) {
    const Jet J = f.jet(std::polar(1.0, circ.theta[k]));
    s.bt.push_back(circ.theta[k]);
    s.bw.push_back(circ.w[k]);
    s.bu.push_back(J.u);
    s.bux.push_back(J.ux);
    s.buy.push_back(J.uy);
  }
  return s;
}

// ---------------------------------------------------------------------------

/// ∫_D K e^u + ∫_∂D h e^{u/2} - 2π.
inline double gauss_bonnet_residual(const FieldSample& s, const CurvatureData& data) {
  double interior = 0.0, boundary = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) interior += s.w[k] * data.K(s.x[k], s.y[k]) * std::exp(s.u[k]);
  for (std::size_t k = 0; k < s.bu.size(); ++k) boundary += s.bw[k] * data.h(s.bt[k]) * std::exp(0.5 * s.bu[k]);
  return interior + boundary - two_pi;
}

inline double gauss_bonnet_residual(const DiskField& u, const CurvatureData& data) {
  return gauss_bonnet_residual(sample_field(u), data);
}

/// I(u) = ∫_D ½|∇u|² - 2K e^u + ∫_∂D 2u - 4h e^{u/2}.
inline double energy(const FieldSample& s, const CurvatureData& data) {
  double interior = 0.0, boundary = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const double g2 = s.ux[k] * s.ux[k] + s.uy[k] * s.uy[k];
    interior += s.w[k] * (0.5 * g2 - 2.0 * data.K(s.x[k], s.y[k]) * std::exp(s.u[k]));
  }
  for (std::size_t k = 0; k < s.bu.size(); ++k)
    boundary += s.bw[k] * (2.0 * s.bu[k] - 4.0 * data.h(s.bt[k]) * std::exp(0.5 * s.bu[k]));
  return interior + boundary;
}

inline double energy(const DiskField& u, const CurvatureData& data) { return energy(sample_field(u), data); }

struct VectorFieldPoly {
  Poly2 F1, F2;

  /// (1 - x² + y², -2xy), i.e. F(z) = 1 - z².
  static VectorFieldPoly conformal_x() { return {Poly2({{0, 0, 1.0}, {2, 0, -1.0}, {0, 2, 1.0}}), Poly2({{1, 1, -2.0}})}; }
  /// (-2xy, 1 + x² - y²), i.e. F(z) = i(1 + z²).
  static VectorFieldPoly conformal_y() { return {Poly2({{1, 1, -2.0}}), Poly2({{0, 0, 1.0}, {2, 0, 1.0}, {0, 2, -1.0}})}; }
  /// (-y, x), the rotation field.
  static VectorFieldPoly rotation() { return {Poly2({{0, 1, -1.0}}), Poly2({{1, 0, 1.0}})}; }
  /// (x, y), the dilation field.
  static VectorFieldPoly dilation() { return {Poly2({{1, 0, 1.0}}), Poly2({{0, 1, 1.0}})}; }
};

struct PohozaevTerms {
  double boundary;  // ∫_∂D [2K e^u F·ν + (2h e^{u/2} - 2) ∇u·F - ½|∇u|² F·ν]
  double interior;  // ∫_D [2e^u (∇K·F + K div F) + DF(∇u,∇u) - ½ div F |∇u|²]
  double residual() const { return boundary - interior; }
};

inline PohozaevTerms pohozaev_terms(const FieldSample& s, const CurvatureData& data, const VectorFieldPoly& F) {
  const Poly2 Kx = data.K.dx(), Ky = data.K.dy();
  const Poly2 a11 = F.F1.dx(), a12 = F.F1.dy(), a21 = F.F2.dx(), a22 = F.F2.dy();
  double interior = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const double x = s.x[k], y = s.y[k];
    const double f1 = F.F1(x, y), f2 = F.F2(x, y);
    const double div = a11(x, y) + a22(x, y);
    const double gx = s.ux[k], gy = s.uy[k];
    // DF(a, a) = Σ a_i ∂_i F_j a_j
    const double dfa = gx * (a11(x, y) * gx + a21(x, y) * gy) + gy * (a12(x, y) * gx + a22(x, y) * gy);
    const double t = 2.0 * std::exp(s.u[k]) * (Kx(x, y) * f1 + Ky(x, y) * f2 + data.K(x, y) * div) + dfa -
                     0.5 * div * (gx * gx + gy * gy);
    interior += s.w[k] * t;
  }
  double boundary = 0.0;
  for (std::size_t k = 0; k < s.bu.size(); ++k) {
    const double c = std::cos(s.bt[k]), sn = std::sin(s.bt[k]);
    const double f1 = F.F1(c, sn), f2 = F.F2(c, sn);
    const double fn = f1 * c + f2 * sn;
    const double gx = s.bux[k], gy = s.buy[k];
    const double t = 2.0 * data.K(c, sn) * std::exp(s.bu[k]) * fn +
                     (2.0 * data.h(s.bt[k]) * std::exp(0.5 * s.bu[k]) - 2.0) * (gx * f1 + gy * f2) -
                     0.5 * (gx * gx + gy * gy) * fn;
    boundary += s.bw[k] * t;
  }
  return {boundary, interior};
}

inline double pohozaev_residual(const FieldSample& s, const CurvatureData& data, const VectorFieldPoly& F) {
  return pohozaev_terms(s, data, F).residual();
}

inline double pohozaev_residual(const DiskField& u, const CurvatureData& data, const VectorFieldPoly& F) {
  return pohozaev_residual(sample_field(u), data, F);
}

enum class KWDirection { x, y };

struct KWTerms {
  double lhs;  // ∫_D e^u ∇K·F
  double rhs;  // x: 4∫ h_τ e^{u/2} y;  y: -4∫ h_τ e^{u/2} x
  double residual() const { return lhs - rhs; }
};

/// Kazdan-Warner identity: F = (1 - x² + y², -2xy) against 4∫ h_τ e^{u/2} y,
/// or the variant with x and y interchanged and τ -> -τ.
inline KWTerms kazdan_warner_terms(const FieldSample& s, const CurvatureData& data, KWDirection dir = KWDirection::x) {
  const VectorFieldPoly F = dir == KWDirection::x ? VectorFieldPoly::conformal_x() : VectorFieldPoly::conformal_y();
  const Poly2 Kx = data.K.dx(), Ky = data.K.dy();
  const TrigPoly ht = data.h.derivative();
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const double x = s.x[k], y = s.y[k];
    lhs += s.w[k] * std::exp(s.u[k]) * (Kx(x, y) * F.F1(x, y) + Ky(x, y) * F.F2(x, y));
  }
  for (std::size_t k = 0; k < s.bu.size(); ++k) {
    const double th = s.bt[k];
    const double weight = dir == KWDirection::x ? 4.0 * std::sin(th) : -4.0 * std::cos(th);
    rhs += s.bw[k] * ht(th) * std::exp(0.5 * s.bu[k]) * weight;
  }
  return {lhs, rhs};
}

inline double kazdan_warner_residual(const FieldSample& s, const CurvatureData& data, KWDirection dir = KWDirection::x) {
  return kazdan_warner_terms(s, data, dir).residual();
}

inline double kazdan_warner_residual(const DiskField& u, const CurvatureData& data, KWDirection dir = KWDirection::x) {
  return kazdan_warner_residual(sample_field(u), data, dir);
}

// ---------------------------------------------------------------------------

struct MassReport {
  double interior_mass = 0.0;  // ∫_D K e^u
  double boundary_mass = 0.0;  // ∫_∂D h e^{u/2}
  double cap_interior_mass = 0.0;  // over D ∩ B_r(p)
  double cap_boundary_mass = 0.0;  // over ∂D ∩ B_r(p)
  std::optional<double> beta_expected;  // 2π h(p) / sqrt(h(p)² + K(p))
  bool beta_degenerate = false;
};

/// Masses of e^u for a field given pointwise; `scale` is the concentration
/// length near p used to grade the quadrature.
inline MassReport mass_report(const std::function<double(Point)>& u, const CurvatureData& data, Point p,
                              double cap_radius, double scale = 1.0) {
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError("mass_report: p must lie on the unit circle");
  const double tp = std::arg(p);
  MassReport m;
  const auto disk = quad::disk_rule(tp, scale);
  std::vector<double> terms(disk.size());
  parallel_for(disk.size(), [&](std::size_t k) {
    const Point z(disk.x[k], disk.y[k]);
    terms[k] = disk.w[k] * data.K(z) * std::exp(u(z));
  });
  m.interior_mass = ordered_sum(terms);
  const auto circ = quad::circle_rule(tp, scale);
  for (std::size_t k = 0; k < circ.size(); ++k)
    m.boundary_mass += circ.w[k] * data.h(circ.theta[k]) * std::exp(0.5 * u(std::polar(1.0, circ.theta[k])));

  const auto cap = quad::cap_rule(tp, cap_radius, scale);
  terms.assign(cap.size(), 0.0);
  parallel_for(cap.size(), [&](std::size_t k) {
    Point z(cap.x[k], cap.y[k]);
    if (std::abs(z) > 1.0) z /= std::abs(z);  // round-off at the rim
    terms[k] = cap.w[k] * data.K(z) * std::exp(u(z));
  });
  m.cap_interior_mass = ordered_sum(terms);
  const auto arc = quad::arc_rule(tp, cap_radius, scale);
  for (std::size_t k = 0; k < arc.size(); ++k)
    m.cap_boundary_mass += arc.w[k] * data.h(arc.theta[k]) * std::exp(0.5 * u(std::polar(1.0, arc.theta[k])));

  const double hp = data.h(tp), Kp = data.K(p);
  const double disc = hp * hp + Kp;
  if (disc > 0.0) {
    m.beta_expected = two_pi * hp / std::sqrt(disc);
  } else {
    m.beta_degenerate = true;
  }
  return m;
}

inline MassReport mass_report(const DiskField& u, const CurvatureData& data, Point p, double cap_radius) {
  const FieldInterpolant f(u);
  return mass_report([&f](Point z) { return f(z); }, data, p, cap_radius);
}

// ---------------------------------------------------------------------------

struct Section5Values {
  double I_n = 0.0;
  double II_n = 0.0;
  /// -2(1+λ) φ̂ (φ̂² + k̂)² II_n, the right-hand side of the limit identity.
  double scaled_II = 0.0;
  /// I_n + 2(1+λ) φ̂ (φ̂² + k̂)² II_n; tends to (π/2)(2(-Δ)^{1/2}h(p) + K_ν(p)/Φ(p)).
  double combined = 0.0;
};

/// The boundary and interior integrals built from the profile concentrating
/// at p with parameter λ, written in the frame where p = (1, 0); φ̂ = Φ(p),
/// k̂ = K(p).
inline Section5Values section5_limits(const CurvatureData& data, Point p, double lam) {
  if (!(lam > 0.0 && lam < 1.0)) throw DomainError("section5_limits: lambda must lie in (0, 1)");
  const double tp = std::arg(p);
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError("section5_limits: p must lie on the unit circle");
  const BoundaryValue bv = PreparedData(data).boundary(tp);
  const PhiPoint ph = phi_boundary(bv);
  if (!ph.defined || !(ph.Phi > 0.0)) throw DomainError("section5_limits: Φ is not defined and positive at p");
  const double phi = ph.Phi, k = bv.K, hp = bv.h;
  const double e = 1.0 - lam;
  const Point pu = std::polar(1.0, tp);

  Section5Values out;
  const auto circ = quad::circle_rule(tp, e);
  for (std::size_t j = 0; j < circ.size(); ++j) {
    const double th = circ.theta[j];
    const double x = std::cos(th - tp);
    const double num = x * e * e + 2.0 * lam * (x - 1.0);
    const double den = e * e - 2.0 * lam * (x - 1.0);
    out.I_n += circ.w[j] * (data.h(th) - hp) * num / (den * den);
  }

  const auto disk = quad::disk_rule(tp, e);
  std::vector<double> terms(disk.size());
  parallel_for(disk.size(), [&](std::size_t j) {
    const Point z(disk.x[j], disk.y[j]);
    const Point zr = z * std::conj(pu);  // frame with p = (1, 0)
    const double x = zr.real(), y = zr.imag();
    const double num = -lam * ((1.0 - x) * (1.0 - x) + y * y) + e * e * x;
    const double D = phi * phi * (1.0 - lam * x) * (1.0 - lam * x) + phi * phi * lam * lam * y * y +
                     k * (x - lam) * (x - lam) + k * y * y;
    terms[j] = disk.w[j] * (data.K(z) - k) * num / (D * D * D);
  });
  out.II_n = e * ordered_sum(terms);
  const double factor = 2.0 * (1.0 + lam) * phi * (phi * phi + k) * (phi * phi + k);
  out.scaled_II = -factor * out.II_n;
  out.combined = out.I_n + factor * out.II_n;
  return out;
}

/// Two-level Richardson extrapolation for an O(t) error when t is halved:
/// 2 S(t/2) - S(t).
inline double richardson(double coarse, double fine) { return 2.0 * fine - coarse; }

/// Value at t = 0 of the line through (t0, s0) and (t1, s1).
inline double extrapolate_linear(double t0, double s0, double t1, double s1) {
  if (t0 == t1) throw std::invalid_argument("extrapolate_linear: abscissae coincide");
  return s1 - t1 * (s0 - s1) / (t0 - t1);
}

}  // namespace curvlab

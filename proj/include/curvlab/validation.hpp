#pragma once
// Quantitative checks of the Möbius L^q estimates and of the explicit
// half-plane integral behind the normal blow-up condition.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/conformal.hpp"
#include "curvlab/core.hpp"
#include "curvlab/quadrature.hpp"

namespace curvlab {

enum class LqDomain { disk, boundary };

/// ∫ |f_a(z) - f_a(a/|a|)|^q over D or ∂D, f_a(z) = (a + z)/(1 + ā z).
///
/// For |a| -> 1 the map sends everything except a neighbourhood of -a/|a| of
/// size 1-|a| close to a/|a|, so the rules are graded toward -a/|a|.
inline double moebius_lq(Point a, double q, LqDomain domain) {
  if (!(q > 1.0 && q < 2.0)) throw DomainError("moebius_lq: q must lie in (1, 2)");
  const double ra = std::abs(a);
  if (!(ra > 0.5 && ra < 1.0)) throw DomainError("moebius_lq: |a| must lie in (0.5, 1)");
  const MoebiusMap f(a);
  const Point p = a / ra;
  const double focus = std::arg(-a), scale = 1.0 - ra;
  if (domain == LqDomain::boundary) {
    const auto rule = quad::circle_rule(focus, scale);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k)
      s += rule.w[k] * std::pow(std::abs(f(std::polar(1.0, rule.theta[k])) - p), q);
    return s;
  }
  const auto rule = quad::disk_rule(focus, scale);
  std::vector<double> terms(rule.size());
  parallel_for(rule.size(), [&](std::size_t k) {
    terms[k] = rule.w[k] * std::pow(std::abs(f(Point(rule.x[k], rule.y[k])) - p), q);
  });
  return ordered_sum(terms);
}

/// Least-squares slope of log(value) against log(t).
inline double scaling_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 4) throw std::invalid_argument("scaling_fit: need at least 4 pairs");
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!(pairs[k].first > 0.0) || !(pairs[k].second > 0.0))
      throw std::invalid_argument("scaling_fit: values must be positive");
    if (k > 0 && !(pairs[k].first < pairs[k - 1].first))
      throw std::invalid_argument("scaling_fit: 1-|a| must decrease");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(pairs.size());
  for (const auto& [t, v] : pairs) {
    const double x = std::log(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct HalfplaneIntegral {
  double numeric = 0.0;
  double closed_form = 0.0;
  double relative_gap() const { return std::abs(numeric - closed_form) / std::abs(closed_form); }
};

/// ∫_{x>0} ∫_R x (x² + y² - 1) / (Φ²(1+x)² + (Φ²+K) y² + K(1-x)²)³ dy dx
/// against π / (8 Φ² (K + Φ²)²).  Polar coordinates about the origin with
/// ρ = tan σ, so the ρ^{-2} tail becomes a bounded integrand on [0, π/2).
inline HalfplaneIntegral halfplane_integral_check(double Phi, double K) {
  if (!(Phi > 0.0)) throw DomainError("halfplane_integral_check: Φ must be positive");
  if (!(Phi * Phi + K > 0.0)) throw DomainError("halfplane_integral_check: Φ² + K must be positive");
  std::vector<double> bs, bp;
  for (int k = 0; k <= 32; ++k) bs.push_back(0.5 * pi * k / 32.0);
  for (int k = 0; k <= 16; ++k) bp.push_back(-0.5 * pi + pi * k / 16.0);
  const auto S = quad::panel_rule(bs), A = quad::panel_rule(bp);
  const double P2 = Phi * Phi;
  std::vector<double> rows(S.size());
  parallel_for(S.size(), [&](std::size_t i) {
    const double cs = std::cos(S.x[i]);
    const double rho = std::tan(S.x[i]);
    const double jac = rho / (cs * cs);
    double row = 0.0;
    for (std::size_t j = 0; j < A.size(); ++j) {
      const double x = rho * std::cos(A.x[j]), y = rho * std::sin(A.x[j]);
      const double den = P2 * (1.0 + x) * (1.0 + x) + (P2 + K) * y * y + K * (1.0 - x) * (1.0 - x);
      row += A.w[j] * x * (rho * rho - 1.0) / (den * den * den);
    }
    rows[i] = S.w[i] * jac * row;
  });
  HalfplaneIntegral out;
  out.numeric = ordered_sum(rows);
  out.closed_form = pi / (8.0 * P2 * (K + P2) * (K + P2));
  return out;
}

// ---------------------------------------------------------------------------

/// One pass/fail line of a report.
struct Check {
  std::string name;
  std::string tag;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct LqSeries {
  double q = 0.0;
  LqDomain domain = LqDomain::disk;
  std::vector<std::pair<double, double>> pairs;  // (1-|a|, value)
  double slope = 0.0;
  double expected_slope = 0.0;
  /// C in value <= C t^{expected}: the Aitken limit of value / t^{expected}
  /// over the last three points.
  double calibration = 0.0;
  /// Largest sampled value / t^{expected}.
  double max_ratio = 0.0;
  /// The ratios increase with contracting increments and stay below C.
  bool bound_holds = false;
};

/// L^q values at |a| = 1 - 2^{-j}, j = j_lo..j_hi, with the fitted slope.
inline LqSeries lq_series(double q, LqDomain domain, int j_lo = 8, int j_hi = 15) {
  if (j_hi - j_lo < 3) throw std::invalid_argument("lq_series: need at least 4 points");
  LqSeries s;
  s.q = q;
  s.domain = domain;
  s.expected_slope = domain == LqDomain::disk ? q : 1.0;
  std::vector<double> ratio;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double t = std::ldexp(1.0, -j);
    s.pairs.emplace_back(t, moebius_lq(Point(1.0 - t, 0.0), q, domain));
    ratio.push_back(s.pairs.back().second / std::pow(t, s.expected_slope));
  }
  s.slope = scaling_fit(s.pairs);
  const std::size_t n = ratio.size();
  const double d1 = ratio[n - 2] - ratio[n - 3], d2 = ratio[n - 1] - ratio[n - 2];
  const double c = d1 != 0.0 ? d2 / d1 : 0.0;
  const bool contracting = c >= 0.0 && c < 1.0;
  s.calibration = contracting ? ratio[n - 1] + d2 * c / (1.0 - c) : ratio[n - 1];
  s.bound_holds = contracting;
  for (double r : ratio) {
    s.max_ratio = std::max(s.max_ratio, r);
    if (!(r <= s.calibration * (1.0 + 1e-12))) s.bound_holds = false;
  }
  return s;
}

struct HalfplaneCase {
  double Phi = 0.0;
  double K = 0.0;
  HalfplaneIntegral integral;
};

struct ValidationReport {
  std::vector<LqSeries> series;
  std::vector<HalfplaneCase> halfplane;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Everything behind the `validate` command: L^q slopes and bounds for
/// q in {1.2, 1.5, 1.8} on the disk and the circle, and the half-plane
/// integral on a 5 x 5 admissible (Φ, K) grid.
inline ValidationReport validation_suite() {
  ValidationReport rep;
  for (double q : {1.2, 1.5, 1.8}) {
    for (LqDomain dom : {LqDomain::disk, LqDomain::boundary}) {
      const LqSeries s = lq_series(q, dom);
      const std::string where = dom == LqDomain::disk ? "disk" : "boundary";
      char qs[16];
      std::snprintf(qs, sizeof qs, "%.1f", q);
      rep.checks.push_back({"lq_slope_" + where + "_q" + qs, "lq-scaling", s.slope, s.expected_slope, 0.1,
                            std::abs(s.slope - s.expected_slope) <= 0.1});
      rep.checks.push_back({"lq_bound_" + where + "_q" + qs, "lq-scaling", s.max_ratio, s.calibration, 0.0,
                            s.bound_holds});
      rep.series.push_back(s);
    }
  }
  const double phis[] = {0.5, 1.0, 2.0, 3.0, 5.0};
  const double ks[] = {-0.2, 0.0, 0.5, 1.0, 3.0};
  for (double P : phis)
    for (double K : ks) {
      if (!(P * P + K > 0.0)) continue;
      const auto r = halfplane_integral_check(P, K);
      char name[64];
      std::snprintf(name, sizeof name, "halfplane_integral_phi%g_k%g", P, K);
      rep.checks.push_back({name, "halfplane-integral", r.relative_gap(), 0.0, 1e-6, r.relative_gap() <= 1e-6});
      rep.halfplane.push_back({P, K, r});
    }
  return rep;
}

}  // namespace curvlab

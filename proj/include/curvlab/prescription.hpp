#pragma once
// The prescribed pair (K, h): K a polynomial in (x, y), h a trigonometric
// polynomial on the circle.  On top of exact evaluation this header builds
// Φ = H + sqrt(H^2 + K) (H the harmonic extension of h), the two boundary
// blow-up conditions
//   tangential: 2 h_τ + K_τ / Φ = 0,   normal: 2 (-Δ)^{1/2} h + K_ν / Φ = 0,
// which together say ∇Φ(p) = 0, the candidate locator, the compactness verdict
// and the Kazdan-Warner sign obstruction.

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/boundary_calculus.hpp"
#include "curvlab/core.hpp"
#include "curvlab/diskgrid.hpp"
#include "curvlab/trig.hpp"

namespace curvlab {

/// Σ c x^i y^j.
struct Poly2 {
  struct Term {
    int i = 0;
    int j = 0;
    double c = 0.0;
  };
  std::vector<Term> terms;

  Poly2() = default;
  explicit Poly2(std::vector<Term> t) : terms(std::move(t)) {
    for (const auto& s : terms) {
      if (s.i < 0 || s.j < 0) throw std::invalid_argument("Poly2: negative exponent");
      if (!std::isfinite(s.c)) throw std::invalid_argument("Poly2: non-finite coefficient");
    }
  }
  static Poly2 constant(double c) { return Poly2({{0, 0, c}}); }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.c * ipow(x, t.i) * ipow(y, t.j);
    return s;
  }
  double operator()(Point z) const { return (*this)(z.real(), z.imag()); }

  Poly2 dx() const {
    Poly2 d;
    for (const auto& t : terms)
      if (t.i > 0) d.terms.push_back({t.i - 1, t.j, t.c * t.i});
    return d;
  }
  Poly2 dy() const {
    Poly2 d;
    for (const auto& t : terms)
      if (t.j > 0) d.terms.push_back({t.i, t.j - 1, t.c * t.j});
    return d;
  }

  /// Like terms merged, zeros dropped, sorted by (i, j).
  Poly2 normalized() const {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& t : terms) acc[{t.i, t.j}] += t.c;
    Poly2 out;
    for (const auto& [k, c] : acc)
      if (c != 0.0) out.terms.push_back({k.first, k.second, c});
    return out;
  }

  bool is_constant() const {
    for (const auto& t : normalized().terms)
      if (t.i + t.j > 0) return false;
    return true;
  }

  /// z ↦ P(e^{-iα} z): the polynomial carried along by a rotation of angle α.
  Poly2 rotated(double alpha) const {
    const double c = std::cos(alpha), s = std::sin(alpha);
    // x' = c x + s y, y' = -s x + c y
    std::map<std::pair<int, int>, double> acc;
    for (const auto& t : terms) {
      std::map<std::pair<int, int>, double> cur{{{0, 0}, t.c}};
      auto mul = [&](double a, double b, int times) {
        for (int m = 0; m < times; ++m) {
          std::map<std::pair<int, int>, double> nxt;
          for (const auto& [k, v] : cur) {
            nxt[{k.first + 1, k.second}] += v * a;
            nxt[{k.first, k.second + 1}] += v * b;
          }
          cur.swap(nxt);
        }
      };
      mul(c, s, t.i);
      mul(-s, c, t.j);
      for (const auto& [k, v] : cur) acc[k] += v;
    }
    Poly2 out;
    for (const auto& [k, v] : acc)
      if (v != 0.0) out.terms.push_back({k.first, k.second, v});
    return out;
  }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
  }
};

struct CurvatureData {
  Poly2 K = Poly2::constant(0.0);
  TrigPoly h;

  /// Data carried along by the rotation z ↦ e^{iα} z.
  CurvatureData rotated(double alpha) const { return {K.rotated(alpha), h.rotated(alpha)}; }
  bool is_constant() const { return K.is_constant() && h.is_constant(); }
};

struct CurvatureValue {
  double K, Kx, Ky;
};

struct BoundaryValue {
  double h;
  double h_tau;
  double K;
  double K_tau;
  double K_nu;
  double H_nu;  // (-Δ)^{1/2} h = normal derivative of the harmonic extension
};

/// Derivatives prepared once for repeated evaluation.
class PreparedData {
 public:
  explicit PreparedData(CurvatureData d)
      : data_(std::move(d)), Kx_(data_.K.dx()), Ky_(data_.K.dy()), ht_(data_.h.derivative()),
        hn_(data_.h.half_laplacian()) {}

  const CurvatureData& data() const { return data_; }

  CurvatureValue at(Point z) const { return {data_.K(z), Kx_(z), Ky_(z)}; }

  BoundaryValue boundary(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const double kx = Kx_(c, s), ky = Ky_(c, s);
    // τ = i z (counter-clockwise), ν = z.
    return {data_.h(theta), ht_(theta), data_.K(c, s), -s * kx + c * ky, c * kx + s * ky, hn_(theta)};
  }

 private:
  CurvatureData data_;
  Poly2 Kx_, Ky_;
  TrigPoly ht_, hn_;
};

inline CurvatureValue eval_curvatures(const CurvatureData& data, Point z) { return PreparedData(data).at(z); }
inline BoundaryValue eval_boundary(const CurvatureData& data, double theta) {
  return PreparedData(data).boundary(theta);
}

// ---------------------------------------------------------------------------
// Φ on the boundary

struct PhiPoint {
  bool defined = false;  // h^2 + K >= 0
  double H = 0.0;
  double root = 0.0;  // sqrt(h^2 + K)
  double Phi = 0.0;
  double Phi_tau = 0.0;
  double Phi_nu = 0.0;
};

/// Φ = h + sqrt(h^2+K) on ∂D with
///   Φ_τ = h_τ Φ / sqrt + K_τ / (2 sqrt),  Φ_ν = H_ν Φ / sqrt + K_ν / (2 sqrt).
inline PhiPoint phi_boundary(const BoundaryValue& b) {
  PhiPoint out;
  out.H = b.h;
  const double disc = b.h * b.h + b.K;
  if (!(disc >= 0.0)) return out;
  out.defined = true;
  out.root = std::sqrt(disc);
  out.Phi = b.h + out.root;
  if (out.root > 0.0) {
    out.Phi_tau = b.h_tau * out.Phi / out.root + b.K_tau / (2.0 * out.root);
    out.Phi_nu = b.H_nu * out.Phi / out.root + b.K_nu / (2.0 * out.root);
  }
  return out;
}

struct PhiReport {
  std::vector<double> theta;
  std::vector<double> H, Phi, Phi_tau, Phi_nu;
  std::vector<bool> mask;  // boundary: h^2 + K >= 0
  DiskField H_interior;
  DiskField Phi_interior;          // 0 where masked
  std::vector<bool> mask_interior;  // H^2 + K >= 0
};

inline PhiReport phi_field(const CurvatureData& data, const GridPtr& grid) {
  const PreparedData pd(data);
  const DiskGrid& g = *grid;
  PhiReport rep;
  for (int j = 0; j < g.n_theta(); ++j) {
    const double th = g.theta()[j];
    const PhiPoint p = phi_boundary(pd.boundary(th));
    rep.theta.push_back(th);
    rep.H.push_back(p.H);
    rep.mask.push_back(p.defined);
    rep.Phi.push_back(p.defined ? p.Phi : 0.0);
    rep.Phi_tau.push_back(p.defined ? p.Phi_tau : 0.0);
    rep.Phi_nu.push_back(p.defined ? p.Phi_nu : 0.0);
  }
  rep.H_interior = harmonic_extension(data.h, grid);
  rep.Phi_interior = DiskField(grid);
  rep.mask_interior.assign(g.size(), false);
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      const double H = rep.H_interior[k];
      const double disc = H * H + data.K(g.node(i, j));
      if (disc >= 0.0) {
        rep.mask_interior[k] = true;
        rep.Phi_interior[k] = H + std::sqrt(disc);
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Blow-up conditions

struct ConditionResiduals {
  double tangential;
  double normal;
};

namespace detail {

inline std::optional<ConditionResiduals> residuals_at(const PreparedData& pd, double theta) {
  const BoundaryValue b = pd.boundary(theta);
  const double disc = b.h * b.h + b.K;
  if (!(disc >= 0.0)) return std::nullopt;
  const double Phi = b.h + std::sqrt(disc);
  if (!(Phi > 0.0)) return std::nullopt;
  return ConditionResiduals{2.0 * b.h_tau + b.K_tau / Phi, 2.0 * b.H_nu + b.K_nu / Phi};
}

inline double boundary_angle(Point p, const char* what) {
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError(std::string(what) + ": p must lie on the unit circle");
  return std::arg(p);
}

}  // namespace detail

inline ConditionResiduals condition_residuals(const CurvatureData& data, Point p) {
  const double th = detail::boundary_angle(p, "condition_residuals");
  const auto r = detail::residuals_at(PreparedData(data), th);
  if (!r) throw DomainError("condition_residuals: Φ is not defined and positive at p (h^2 + K < 0 or Φ <= 0)");
  return *r;
}

struct BlowupCandidate {
  Point p;
  double theta = 0.0;
  double phi_at_p = 0.0;
  double tangential_residual = 0.0;
  double normal_residual = 0.0;
  bool admissible = false;
  std::optional<double> beta;  // unset when h^2 + K = 0
  bool beta_degenerate = false;
};

struct CandidateReport {
  std::vector<BlowupCandidate> candidates;
  /// Residuals vanish on the whole circle (e.g. constant data): blow-up
  /// points are not isolated and the criterion is inconclusive.
  bool degenerate_family = false;
  double max_scan_residual = 0.0;
};

inline constexpr int candidate_scan_samples = 4096;

namespace detail {

inline BlowupCandidate make_candidate(const PreparedData& pd, double theta) {
  BlowupCandidate c;
  c.theta = std::remainder(theta, two_pi);
  c.p = std::polar(1.0, c.theta);
  const BoundaryValue b = pd.boundary(c.theta);
  const PhiPoint ph = phi_boundary(b);
  c.phi_at_p = ph.Phi;
  const auto r = residuals_at(pd, c.theta);
  c.tangential_residual = r->tangential;
  c.normal_residual = r->normal;
  c.admissible = b.K > 0.0 || b.h > std::sqrt(-b.K);
  const double disc = b.h * b.h + b.K;
  if (disc > 0.0) {
    c.beta = two_pi * b.h / std::sqrt(disc);
  } else {
    c.beta_degenerate = true;
  }
  return c;
}

}  // namespace detail

/// Dense scan of max(|tangential|, |normal|) for local minima, Brent polish,
/// a root refinement on whichever residual changes sign, and finally the
/// centre of the sub-level interval {residual <= tol}.  The centre is far more
/// accurate than the raw minimiser for the flat, higher-order zeros typical of
/// critical points of Φ.
inline CandidateReport find_blowup_candidates(const CurvatureData& data, double tol = 1e-10) {
  const PreparedData pd(data);
  const int n = candidate_scan_samples;
  const double h = two_pi / n;
  auto r = [&](double th) {
    const auto v = detail::residuals_at(pd, th);
    return v ? std::max(std::abs(v->tangential), std::abs(v->normal)) : INFINITY;
  };

  std::vector<double> rs(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) { rs[k] = r(h * static_cast<double>(k)); });

  CandidateReport rep;
  bool any_defined = false;
  for (double v : rs) {
    if (std::isfinite(v)) {
      any_defined = true;
      rep.max_scan_residual = std::max(rep.max_scan_residual, v);
    }
  }
  if (any_defined && rep.max_scan_residual <= 1e-12) {
    rep.degenerate_family = true;
    return rep;
  }

  auto bisect_root = [&](auto f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200 && b - a > 0.0; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double fm = f(m);
      if (fm == 0.0) return m;
      if ((fm > 0.0) == (fa > 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<double> found;
  for (int k = 0; k < n; ++k) {
    const double prev = rs[(k + n - 1) % n], cur = rs[k], next = rs[(k + 1) % n];
    if (!std::isfinite(cur) || cur > prev || cur > next) continue;
    const double a = h * (k - 1), b = h * (k + 1);
    auto [tmin, rmin] = boost::math::tools::brent_find_minima(r, a, b, 50);

    // Sign-change refinements of either residual inside the bracket.
    double best = tmin, rbest = rmin;
    for (int which = 0; which < 2; ++which) {
      auto comp = [&](double th) {
        const auto v = detail::residuals_at(pd, th);
        return v ? (which == 0 ? v->tangential : v->normal) : 0.0;
      };
      for (auto [lo, hi] : {std::pair{a, tmin}, std::pair{tmin, b}}) {
        const double flo = comp(lo), fhi = comp(hi);
        if (flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0)) continue;
        const double root = bisect_root(comp, lo, hi);
        const double rr = r(root);
        if (rr < rbest) {
          best = root;
          rbest = rr;
        }
      }
    }
    if (!(rbest <= tol)) continue;

    // Centre of the sub-level interval around `best`.
    auto edge = [&](double dir) {
      double step = 1e-14;
      while (step < h && r(best + dir * step) <= tol) step *= 2.0;
      if (step >= h) return best + dir * h;
      double in = step / 2.0, out = step;
      if (in < 1e-14) in = 0.0;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (in + out);
        if (m <= in || m >= out) break;
        (r(best + dir * m) <= tol ? in : out) = m;
      }
      return best + dir * in;
    };
    const double centre = 0.5 * (edge(-1.0) + edge(1.0));
    found.push_back(r(centre) <= tol ? centre : best);
  }

  // Deduplicate on the circle at 1e-6 spacing.
  for (double& t : found) {
    t = std::fmod(t, two_pi);
    if (t < 0.0) t += two_pi;
  }
  std::sort(found.begin(), found.end());
  std::vector<double> uniq;
  for (double t : found) {
    if (uniq.empty() || t - uniq.back() > 1e-6) uniq.push_back(t);
  }
  if (uniq.size() > 1 && uniq.front() + two_pi - uniq.back() <= 1e-6) uniq.pop_back();
  for (double t : uniq) rep.candidates.push_back(detail::make_candidate(pd, t));
  return rep;
}

enum class Verdict { compact, blowup_possible, degenerate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::compact: return "compact";
    case Verdict::blowup_possible: return "blow-up possible";
    case Verdict::degenerate: return "degenerate";
  }
  return "?";
}

struct CompactnessVerdict {
  Verdict verdict = Verdict::compact;
  /// Admissible candidates only: non-admissible points cannot carry blow-up.
  std::vector<BlowupCandidate> points;
  CandidateReport scan;

  std::string describe() const {
    std::ostringstream os;
    os << to_string(verdict);
    if (verdict == Verdict::blowup_possible) {
      os << " at";
      for (const auto& c : points) {
        os << " (" << c.p.real() << ", " << c.p.imag() << ")";
        if (c.beta) os << " beta=" << *c.beta;
      }
    }
    return os.str();
  }
};

/// Necessary conditions only: "blow-up possible" does not mean blow-up occurs.
inline CompactnessVerdict compactness_verdict(const CurvatureData& data, double tol = 1e-10) {
  CompactnessVerdict v;
  v.scan = find_blowup_candidates(data, tol);
  if (v.scan.degenerate_family) {
    v.verdict = Verdict::degenerate;
    return v;
  }
  for (const auto& c : v.scan.candidates)
    if (c.admissible) v.points.push_back(c);
  v.verdict = v.points.empty() ? Verdict::compact : Verdict::blowup_possible;
  return v;
}

// ---------------------------------------------------------------------------
// Kazdan-Warner sign obstruction with T(x, y) = x / (1 + x^2 + y^2):
//   ∫_D e^u (1+|z|^2)^2 ∇K·∇T = -8 ∫_∂D h_τ T_τ e^{u/2}.
// If ∇K·∇T and h_τ T_τ share a weak sign and are not both identically zero,
// the two sides have opposite strict signs and no solution exists.

struct KWObstruction {
  bool obstructed = false;
  double disk_min = 0.0, disk_max = 0.0;
  double boundary_min = 0.0, boundary_max = 0.0;
  std::string reason;
};

inline KWObstruction kw_obstruction_check(const CurvatureData& data, int samples = 64) {
  if (samples < 4) throw std::invalid_argument("kw_obstruction_check: need at least 4 samples");
  const PreparedData pd(data);
  KWObstruction rep;
  rep.disk_min = rep.boundary_min = INFINITY;
  rep.disk_max = rep.boundary_max = -INFINITY;
  const int nth = 4 * samples;
  for (int i = 1; i <= samples; ++i) {
    const double rad = static_cast<double>(i) / samples;
    for (int j = 0; j < nth; ++j) {
      const Point z = std::polar(rad, two_pi * j / nth);
      const double x = z.real(), y = z.imag();
      const double q = 1.0 + x * x + y * y;
      const CurvatureValue kv = pd.at(z);
      const double s = (kv.Kx * (1.0 + y * y - x * x) - kv.Ky * 2.0 * x * y) / (q * q);
      rep.disk_min = std::min(rep.disk_min, s);
      rep.disk_max = std::max(rep.disk_max, s);
    }
  }
  for (int j = 0; j < nth; ++j) {
    const double th = two_pi * j / nth;
    const double s = pd.boundary(th).h_tau * (-0.5 * std::sin(th));
    rep.boundary_min = std::min(rep.boundary_min, s);
    rep.boundary_max = std::max(rep.boundary_max, s);
  }
  constexpr double zero = 1e-13;
  const bool d_nonneg = rep.disk_min >= -zero, d_nonpos = rep.disk_max <= zero;
  const bool b_nonneg = rep.boundary_min >= -zero, b_nonpos = rep.boundary_max <= zero;
  const bool both_zero = d_nonneg && d_nonpos && b_nonneg && b_nonpos;
  if (both_zero) {
    rep.reason = "both sign quantities vanish identically";
  } else if (d_nonneg && b_nonneg) {
    rep.obstructed = true;
    rep.reason = "grad K . grad T >= 0 and h_tau T_tau >= 0";
  } else if (d_nonpos && b_nonpos) {
    rep.obstructed = true;
    rep.reason = "grad K . grad T <= 0 and h_tau T_tau <= 0";
  } else {
    rep.reason = "no common sign";
  }
  return rep;
}

}  // namespace curvlab

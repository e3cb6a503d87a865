// Curvature data, the Φ field and blow-up candidates, and the integral
// identities (Gauss-Bonnet, Pohozaev, Kazdan-Warner, energy, masses, the
// λ -> 1 integrals).

#include <gtest/gtest.h>

#include <cmath>

#include "curvlab/bubbles.hpp"
#include "curvlab/boundary_calculus.hpp"
#include "curvlab/identities.hpp"
#include "curvlab/prescription.hpp"

using namespace curvlab;

namespace {

CurvatureData sample_data() {
  TrigPoly h;
  h.cos = {1.0, 0.3};
  h.sin = {0.0, 0.0, 0.2};
  return {Poly2({{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, 0.3}}), h};
}

// K = 1 - ((x-1)² + y²)², expanded.
CurvatureData peaked_data() {
  return {Poly2({{4, 0, -1.0}, {3, 0, 4.0}, {2, 2, -2.0}, {2, 0, -6.0}, {1, 2, 4.0}, {1, 0, 4.0}, {0, 4, -1.0},
                 {0, 2, -2.0}}),
          TrigPoly::constant(1.0)};
}

CurvatureData constant_data(double K0, double h0) { return {Poly2::constant(K0), TrigPoly::constant(h0)}; }

}  // namespace

// ---------------------------------------------------------------------------
// prescription

TEST(Poly2, EvaluationDerivativesAndRotation) {
  const Poly2 P({{2, 1, 3.0}, {0, 3, -1.0}, {0, 0, 2.0}});
  auto f = [](double x, double y) { return 3 * x * x * y - y * y * y + 2; };
  const double x = 0.3, y = -0.7;
  EXPECT_NEAR(P(x, y), f(x, y), 1e-15);
  EXPECT_NEAR(P.dx()(x, y), 6 * x * y, 1e-15);
  EXPECT_NEAR(P.dy()(x, y), 3 * x * x - 3 * y * y, 1e-15);
  const double a = 0.9;
  const Point z(x, y), rz = std::polar(1.0, a) * z;
  EXPECT_NEAR(P.rotated(a)(rz), P(z), 1e-14);
  EXPECT_FALSE(P.is_constant());
  EXPECT_TRUE(Poly2({{1, 0, 1.0}, {1, 0, -1.0}, {0, 0, 5.0}}).is_constant());
  EXPECT_THROW(Poly2({{-1, 0, 1.0}}), std::invalid_argument);
}

TEST(PreparedData, BoundaryValuesFromDirectFormulas) {
  const auto d = sample_data();
  for (double th : {0.0, 0.8, 2.9, 5.0}) {
    const auto b = eval_boundary(d, th);
    const double c = std::cos(th), s = std::sin(th);
    EXPECT_NEAR(b.h, 1 + 0.3 * c + 0.2 * std::sin(2 * th), 1e-15);
    EXPECT_NEAR(b.h_tau, -0.3 * s + 0.4 * std::cos(2 * th), 1e-15);
    EXPECT_NEAR(b.K, 1 + c + 0.3 * s, 1e-15);
    EXPECT_NEAR(b.K_tau, -s + 0.3 * c, 1e-15);
    EXPECT_NEAR(b.K_nu, c + 0.3 * s, 1e-15);
    EXPECT_NEAR(b.H_nu, 0.3 * c + 0.4 * std::sin(2 * th), 1e-15);
  }
}

TEST(Phi, DerivativesMatchDifferenceQuotients) {
  const auto d = sample_data();
  auto Phi = [&](Point z) {
    const double H = harmonic_extension_at(d.h, z);
    return H + std::sqrt(H * H + d.K(z));
  };
  for (double th : {0.3, 1.7, 4.4}) {
    const PhiPoint p = phi_boundary(eval_boundary(d, th));
    ASSERT_TRUE(p.defined);
    EXPECT_NEAR(p.Phi, Phi(std::polar(1.0, th)), 1e-14);
    const double e = 1e-5;
    const double dt = (Phi(std::polar(1.0, th + e)) - Phi(std::polar(1.0, th - e))) / (2 * e);
    const double dn = (3 * Phi(std::polar(1.0, th)) - 4 * Phi(std::polar(1 - e, th)) + Phi(std::polar(1 - 2 * e, th))) / (2 * e);
    EXPECT_NEAR(p.Phi_tau, dt, 1e-8);
    EXPECT_NEAR(p.Phi_nu, dn, 1e-7);
  }
}

TEST(Phi, FieldMasksWhereUndefined) {
  const CurvatureData d{Poly2({{0, 0, -1.0}, {1, 0, -2.0}}), TrigPoly::constant(0.5)};
  const PhiReport rep = phi_field(d, build_grid(8, 32));
  for (std::size_t j = 0; j < rep.theta.size(); ++j) {
    const double disc = 0.25 - 1.0 - 2.0 * std::cos(rep.theta[j]);
    EXPECT_EQ(static_cast<bool>(rep.mask[j]), disc >= 0.0);
    if (rep.mask[j]) {
      EXPECT_GE(rep.Phi[j], rep.H[j]);
    }
  }
}

TEST(Conditions, ResidualsAreTheTwoBlowupConditions) {
  const auto d = sample_data();
  const double th = 1.1;
  const auto b = eval_boundary(d, th);
  const double Phi = b.h + std::sqrt(b.h * b.h + b.K);
  const auto r = condition_residuals(d, std::polar(1.0, th));
  EXPECT_NEAR(r.tangential, 2 * b.h_tau + b.K_tau / Phi, 1e-15);
  EXPECT_NEAR(r.normal, 2 * b.H_nu + b.K_nu / Phi, 1e-15);
  EXPECT_THROW(condition_residuals(d, Point(0.5, 0.0)), DomainError);
}

TEST(Candidates, PeakedCurvatureHasCandidateAtOne) {
  const auto rep = find_blowup_candidates(peaked_data(), 1e-10);
  ASSERT_FALSE(rep.degenerate_family);
  const BlowupCandidate* hit = nullptr;
  for (const auto& c : rep.candidates)
    if (std::abs(c.p - Point(1.0, 0.0)) < 1e-6) hit = &c;
  ASSERT_NE(hit, nullptr);
  EXPECT_LT(std::abs(hit->p - Point(1.0, 0.0)), 1e-8);
  EXPECT_LE(std::abs(hit->tangential_residual), 1e-10);
  EXPECT_LE(std::abs(hit->normal_residual), 1e-10);
  EXPECT_TRUE(hit->admissible);
  // K(p) = 1, h(p) = 1: β = 2π / √2.
  ASSERT_TRUE(hit->beta.has_value());
  EXPECT_NEAR(*hit->beta, two_pi / std::sqrt(2.0), 1e-12);
}

TEST(Candidates, CompactVerdictAgreesWithResidualScan) {
  // K = 0, h = 2 + cos θ: tangential residual -2 sin θ vanishes only at 0, π,
  // where the normal residual 2 cos θ is ±2.
  const CurvatureData d{Poly2::constant(0.0), TrigPoly{{2.0, 1.0}, {0.0}}};
  double min_r = INFINITY;
  for (int k = 0; k < 20000; ++k) {
    const double th = two_pi * k / 20000.0;
    min_r = std::min(min_r, std::max(std::abs(2 * std::sin(th)), std::abs(2 * std::cos(th))));
  }
  ASSERT_GT(min_r, 1.0);
  const auto v = compactness_verdict(d);
  EXPECT_EQ(v.verdict, Verdict::compact);
  EXPECT_TRUE(v.points.empty());
  EXPECT_EQ(std::string(to_string(v.verdict)), "compact");
}

TEST(Candidates, ConstantDataIsDegenerate) {
  EXPECT_EQ(compactness_verdict(constant_data(3.0, 1.0)).verdict, Verdict::degenerate);
  EXPECT_TRUE(find_blowup_candidates(constant_data(1.0, 0.0)).degenerate_family);
}

TEST(Candidates, RotationCarriesCandidates) {
  const double a = 0.7;
  const auto rep = find_blowup_candidates(peaked_data().rotated(a), 1e-10);
  bool found = false;
  for (const auto& c : rep.candidates) found = found || std::abs(c.p - std::polar(1.0, a)) < 1e-8;
  EXPECT_TRUE(found);
}

TEST(KazdanWarner, ObstructionMatchesSampledSigns) {
  // Oracle: the signs of ∇K·∇T and h_τ T_τ, T = x/(1+|z|²), sampled on a
  // polar mesh independent of the library's.
  auto oracle = [](const CurvatureData& d) {
    const Poly2 Kx = d.K.dx(), Ky = d.K.dy();
    const TrigPoly ht = d.h.derivative();
    double dmin = INFINITY, dmax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
    for (int i = 1; i <= 50; ++i)
      for (int j = 0; j < 173; ++j) {
        const Point z = std::polar(i / 50.0, two_pi * j / 173.0);
        const double x = z.real(), y = z.imag(), q = 1 + x * x + y * y;
        const double Tx = (1 + y * y - x * x) / (q * q), Ty = -2 * x * y / (q * q);
        const double s = Kx(z) * Tx + Ky(z) * Ty;
        dmin = std::min(dmin, s);
        dmax = std::max(dmax, s);
      }
    for (int j = 0; j < 997; ++j) {
      const double th = two_pi * j / 997.0;
      const double s = ht(th) * (-0.5 * std::sin(th));
      bmin = std::min(bmin, s);
      bmax = std::max(bmax, s);
    }
    const double z = 1e-13;
    const bool all0 = dmin >= -z && dmax <= z && bmin >= -z && bmax <= z;
    return !all0 && ((dmin >= -z && bmin >= -z) || (dmax <= z && bmax <= z));
  };
  const CurvatureData cases[] = {
      {Poly2({{0, 0, 1.0}, {1, 0, 0.1}}), TrigPoly::constant(0.1)},
      {Poly2({{1, 0, 1.0}}), TrigPoly{{0.0}, {0.0, 0.01}}},
      {Poly2({{1, 0, 1.0}}), TrigPoly{{0.0, 0.01}, {0.0}}},
      {Poly2({{0, 0, 2.0}, {2, 0, 0.5}}), TrigPoly{{1.0, 0.0, 0.3}, {0.0}}},
      constant_data(1.0, 0.0)};
  for (const auto& d : cases) EXPECT_EQ(kw_obstruction_check(d).obstructed, oracle(d));
  EXPECT_TRUE(kw_obstruction_check(cases[0]).obstructed);
  EXPECT_FALSE(kw_obstruction_check(cases[1]).obstructed);
}

// ---------------------------------------------------------------------------
// identities

TEST(GaussBonnet, ExactBubblesOnGradedQuadrature) {
  const struct {
    double K0, h0;
    Point a;
  } cases[] = {{1.0, 0.0, 0.0},  {3.0, 1.0, 0.3},  {-1.0, 2.0, Point(0.0, 0.5)}, {0.0, 1.0, 0.7},
               {1.0, 0.0, 0.9},  {3.0, 1.0, Point(0.0, -0.9)}, {0.0, 1.0, std::polar(0.9, 2.0)}};
  for (const auto& c : cases) {
    const DiskBubble b(bubble_constants(c.K0, c.h0), c.a);
    EXPECT_LE(std::abs(gauss_bonnet_residual(sample_field(smooth_field(b)), constant_data(c.K0, c.h0))), 1e-8);
  }
}

TEST(GaussBonnet, GridQuadratureNeedsAngularResolutionNearBoundary) {
  const DiskBubble b(bubble_constants(3.0, 1.0), 0.9);
  const DiskField u = DiskField::sample(build_grid(48, 384), [&](Point z) { return b(z); });
  EXPECT_LE(std::abs(gauss_bonnet_residual(u, constant_data(3.0, 1.0))), 1e-8);
}

TEST(Energy, MovingProfileEqualsLimitEnergy) {
  for (auto [K0, h0] : {std::pair{0.0, 1.0}, {3.0, 1.0}, {1.0, 0.0}}) {
    const auto c = bubble_constants(K0, h0);
    const double phi0 = h0 + std::sqrt(h0 * h0 + K0);
    const double closed = -8.0 * pi * (1.0 + std::log(phi0 / 2.0));
    const DiskBubble b = moving_profile(c, Point(1.0, 0.0), 0.9);
    EXPECT_NEAR(energy(sample_field(smooth_field(b)), constant_data(K0, h0)), closed, 1e-6);
  }
}

TEST(Pohozaev, VanishesOnExactBubbles) {
  const DiskBubble b(bubble_constants(3.0, 1.0), Point(0.0, 0.7));
  const auto d = constant_data(3.0, 1.0);
  const FieldSample s = sample_field(smooth_field(b));
  const VectorFieldPoly quartic{Poly2({{4, 0, 1.0}, {1, 2, -0.5}}), Poly2({{0, 3, 2.0}, {2, 1, 0.3}})};
  for (const auto& F : {VectorFieldPoly::conformal_x(), VectorFieldPoly::conformal_y(), VectorFieldPoly::rotation(),
                        VectorFieldPoly::dilation(), quartic})
    EXPECT_LE(std::abs(pohozaev_residual(s, d, F)), 1e-10);
}

TEST(Pohozaev, DetectsNonSolutions) {
  const DiskBubble b(bubble_constants(3.0, 1.0), 0.3);
  SmoothField f = smooth_field(b);
  f.jet = [b](Point z) {
    Jet J = b.jet(z);
    J.u += 0.1 * z.real() * z.real();
    J.ux += 0.2 * z.real();
    return J;
  };
  EXPECT_GT(std::abs(pohozaev_residual(sample_field(f), constant_data(3.0, 1.0), VectorFieldPoly::dilation())), 1e-3);
}

TEST(KazdanWarner, ResidualVanishesOnBubbleAndNotOnPerturbation) {
  const DiskBubble b(bubble_constants(3.0, 1.0), Point(0.2, 0.4));
  const FieldSample s = sample_field(smooth_field(b));
  const CurvatureData d = constant_data(3.0, 1.0);
  EXPECT_LE(std::abs(kazdan_warner_residual(s, d, KWDirection::x)), 1e-12);
  // Same field against K = 3 + x: ∫ e^u (1 - x² + y²) > 0 while the boundary side is 0.
  const CurvatureData tilted{Poly2({{0, 0, 3.0}, {1, 0, 1.0}}), TrigPoly::constant(1.0)};
  const KWTerms t = kazdan_warner_terms(s, tilted, KWDirection::x);
  EXPECT_GT(t.lhs, 0.1);
  EXPECT_EQ(t.rhs, 0.0);
}

TEST(Masses, CapMassesAgainstPoissonKernelClosedForm) {
  // On ∂D, e^{v_a/2} = P_a / sqrt(h0² + K0) with P_a the Poisson kernel, so
  // h0 ∫_arc e^{v/2} = (β/2π) ∫_arc P_a, and the total interior mass is 2π - β.
  const auto c = bubble_constants(3.0, 1.0);
  const CurvatureData d = constant_data(3.0, 1.0);
  const double radius = 0.3, alpha = 2.0 * std::asin(0.5 * radius);
  for (double lam : {0.9, 0.99, 0.999}) {
    const DiskBubble b = moving_profile(c, Point(1.0, 0.0), lam);
    const MassReport m = mass_report([&](Point z) { return b(z); }, d, Point(1.0, 0.0), radius, 1.0 - lam);
    const double arc = 4.0 * std::atan((1 + lam) / (1 - lam) * std::tan(0.5 * alpha));
    EXPECT_NEAR(m.cap_boundary_mass, (pi / two_pi) * arc, 1e-9);
    EXPECT_NEAR(m.boundary_mass, pi, 1e-9);
    EXPECT_NEAR(m.interior_mass, pi, 1e-9);
    EXPECT_LT(m.cap_interior_mass, m.interior_mass);
    ASSERT_TRUE(m.beta_expected.has_value());
    EXPECT_NEAR(*m.beta_expected, pi, 1e-15);
  }
  // u ≡ 0: the cap mass is K0 times the lens area of D ∩ B_r(p).
  const double r = 0.5;
  const double lens = r * r * std::acos(r / 2) + std::acos(1 - r * r / 2) - 0.5 * r * std::sqrt(4 - r * r);
  EXPECT_NEAR(mass_report([](Point) { return 0.0; }, d, Point(0.0, 1.0), r).cap_interior_mass, 3.0 * lens, 1e-10);
}

TEST(LimitIntegrals, TrivialCasesVanish) {
  const auto hc = CurvatureData{Poly2({{0, 0, 1.0}, {1, 0, 1.0}}), TrigPoly::constant(1.0)};
  const auto kc = CurvatureData{Poly2::constant(2.0), TrigPoly{{1.0, 0.3}, {0.0}}};
  EXPECT_EQ(section5_limits(hc, Point(1.0, 0.0), 0.99).I_n, 0.0);
  EXPECT_EQ(section5_limits(kc, Point(1.0, 0.0), 0.99).II_n, 0.0);
  EXPECT_THROW(section5_limits(hc, Point(1.0, 0.0), 1.0), DomainError);
}

TEST(LimitIntegrals, LimitsForLinearCurvature) {
  // K = 1 + x, h ≡ 1, p = (1, 0): Φ(p) = 1 + √3, K_x(p) = 1.
  const auto d = CurvatureData{Poly2({{0, 0, 1.0}, {1, 0, 1.0}}), TrigPoly::constant(1.0)};
  const double target = -pi / (2.0 * (1.0 + std::sqrt(3.0)));
  const auto a = section5_limits(d, Point(1.0, 0.0), 1.0 - std::ldexp(1.0, -10));
  const auto b = section5_limits(d, Point(1.0, 0.0), 1.0 - std::ldexp(1.0, -11));
  EXPECT_NEAR(richardson(a.scaled_II, b.scaled_II), target, 1e-6);
  EXPECT_NEAR(richardson(a.combined, b.combined), -target, 1e-6);
}

TEST(LimitIntegrals, RotationCovariance) {
  const auto d = sample_data();
  const double a = 1.3;
  const auto s0 = section5_limits(d, Point(1.0, 0.0), 0.95);
  const auto s1 = section5_limits(d.rotated(a), std::polar(1.0, a), 0.95);
  EXPECT_NEAR(s0.I_n, s1.I_n, 1e-11);
  EXPECT_NEAR(s0.II_n, s1.II_n, 1e-11);
}

TEST(Extrapolation, LinearDataIsExact) {
  auto S = [](double t) { return 2.5 - 3.0 * t; };
  EXPECT_NEAR(richardson(S(0.1), S(0.05)), 2.5, 1e-15);
  EXPECT_NEAR(extrapolate_linear(0.1, S(0.1), 0.01, S(0.01)), 2.5, 1e-14);
  EXPECT_THROW(extrapolate_linear(0.1, 1.0, 0.1, 2.0), std::invalid_argument);
}

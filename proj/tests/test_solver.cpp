#include <gtest/gtest.h>

#include <cmath>

#include "curvlab/identities.hpp"
#include "curvlab/solver.hpp"

using namespace curvlab;

namespace {

CurvatureData constant_data(double K0, double h0) { return {Poly2::constant(K0), TrigPoly::constant(h0)}; }

double sup_diff(const DiskField& a, const std::function<double(Point)>& f) {
  const DiskGrid& g = *a.grid();
  double m = 0.0;
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, std::abs(a.at(i, j) - f(g.node(i, j))));
  return m;
}

// Least-squares fit of r ≈ μ1 x e^{v0} + μ2 y e^{v0} over the interior rows;
// returns the sup of what is left.
double outside_span(const DiskField& r, const DiskBubble& v0) {
  const DiskGrid& g = *r.grid();
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Point z = g.node(i, j);
      const double e = std::exp(v0(z)), p = z.real() * e, q = z.imag() * e, f = r.at(i, j);
      a11 += p * p, a12 += p * q, a22 += q * q, b1 += p * f, b2 += q * f;
    }
  const double det = a11 * a22 - a12 * a12;
  const double m1 = (a22 * b1 - a12 * b2) / det, m2 = (a11 * b2 - a12 * b1) / det;
  double m = 0.0;
  for (int i = 1; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Point z = g.node(i, j);
      const double e = std::exp(v0(z));
      m = std::max(m, std::abs(r.at(i, j) - m1 * z.real() * e - m2 * z.imag() * e));
    }
  return m;
}

}  // namespace

TEST(PdeResidual, ExactBubblesAreSpectrallyAccurate) {
  const auto g = build_grid(48, 192);
  for (auto [K0, h0, a] : {std::tuple{1.0, 0.0, Point(0.0)}, {3.0, 1.0, Point(0.3, 0.0)}, {0.0, 1.0, Point(0.0, -0.4)},
                           {-1.0, 2.0, Point(0.2, 0.2)}}) {
    const DiskBubble b(bubble_constants(K0, h0), a);
    const auto r = pde_residual(DiskField::sample(g, [&](Point z) { return b(z); }), constant_data(K0, h0));
    EXPECT_LE(r.interior, 1e-8) << K0 << " " << h0;
    EXPECT_LE(r.boundary, 1e-7) << K0 << " " << h0;
  }
}

TEST(PdeResidual, DetectsWrongData) {
  const auto g = build_grid(24, 96);
  const DiskBubble b(bubble_constants(1.0, 0.0), 0.0);
  const auto r = pde_residual(DiskField::sample(g, [&](Point z) { return b(z); }), constant_data(1.0, 0.5));
  EXPECT_LE(r.interior, 1e-8);
  EXPECT_GT(r.boundary, 0.1);
}

TEST(Linearized, KernelFunctionsSatisfyHomogeneousProblem) {
  const auto g = build_grid(32, 128);
  for (auto [K0, h0] : {std::pair{1.0, 0.0}, {3.0, 1.0}, {0.0, 1.0}}) {
    const auto c = bubble_constants(K0, h0);
    const auto psi1 = DiskField::sample(g, [&](Point z) { return kernel_eval(c, z).first; });
    const auto psi2 = DiskField::sample(g, [&](Point z) { return kernel_eval(c, z).second; });
    for (const auto& psi : {psi1, psi2}) {
      const auto r = linearized_residual(c, psi);
      EXPECT_LE(r.interior, 1e-9);
      EXPECT_LE(r.boundary, 1e-9);
    }
  }
}

TEST(Linearized, ZeroDataGivesZero) {
  const auto g = build_grid(24, 96);
  const auto c = bubble_constants(3.0, 1.0);
  const auto sol = linearized_solve(c, DiskField(g), BoundaryField(std::vector<double>(96, 0.0)));
  EXPECT_LE(sup_diff(sol.psi, [](Point) { return 0.0; }), 1e-10);
}

TEST(Linearized, ConstraintsLinearityAndRange) {
  const auto g = build_grid(32, 128);
  const auto c = bubble_constants(3.0, 1.0);
  const DiskBubble v0(c, 0.0);
  const auto rhs = DiskField::sample(g, [&](Point z) { return std::exp(v0(z)) * (z.real() + 0.5 * z.real() * z.imag()); });
  BoundaryField d(std::vector<double>(128));
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = 0.3 * std::cos(2 * d.theta(j)) + 0.1 * std::sin(d.theta(j));
  const auto sol = linearized_solve(c, rhs, d);

  const auto wx = DiskField::sample(g, [&](Point z) { return z.real() * std::exp(v0(z)); });
  const auto wy = DiskField::sample(g, [&](Point z) { return z.imag() * std::exp(v0(z)); });
  DiskField px(g), py(g);
  for (std::size_t k = 0; k < g->size(); ++k) px[k] = wx[k] * sol.psi[k], py[k] = wy[k] * sol.psi[k];
  EXPECT_LE(std::abs(integrate_disk(px)), 1e-10);
  EXPECT_LE(std::abs(integrate_disk(py)), 1e-10);

  // The equation holds up to a combination of x e^{v0}, y e^{v0}.
  const auto res = linearized_residual(c, sol.psi);
  DiskField r(g);
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_theta(); ++j) {
      const std::size_t k = g->index(i, j);
      r[k] = res.F[k] - (i == 0 ? d[j] : rhs[k]);
      if (i == 0) {
        EXPECT_NEAR(r[k], 0.0, 1e-8);
      }
    }
  EXPECT_LE(outside_span(r, v0), 1e-8);
  EXPECT_GT(std::abs(sol.multipliers[0]) + std::abs(sol.multipliers[1]), 1e-3);

  DiskField half = rhs;
  for (auto& x : half.values()) x *= 0.5;
  BoundaryField dh = d;
  for (auto& x : dh.values()) x *= 0.5;
  const auto sh = linearized_solve(c, half, dh);
  const FieldInterpolant full(sol.psi);
  EXPECT_LE(sup_diff(sh.psi, [&](Point z) { return 0.5 * full(z); }), 1e-9);
}

TEST(Newton, RecoversRadialBubbleAfterNormalization) {
  const auto g = build_grid(32, 128);
  const auto c = bubble_constants(1.0, 0.0);
  const DiskBubble v0(c, 0.0);
  const auto guess = DiskField::sample(g, [&](Point z) { return v0(z) + 0.2 * z.real() * (1 - std::norm(z)) + 0.1; });
  SolverOptions opt;
  opt.tol_interior = 1e-10;
  const auto s = newton_solve(constant_data(1.0, 0.0), guess, opt);
  ASSERT_TRUE(s.converged) << s.message;
  EXPECT_LE(std::abs(gauss_bonnet_residual(s.u, constant_data(1.0, 0.0))), 1e-8);
  const auto nb = normalize_barycenter(s.u);
  EXPECT_LE(nb.gamma_norm, 1e-10);
  EXPECT_LE(sup_diff(nb.v, [&](Point z) { return v0(z); }), 1e-8);
}

TEST(Newton, ZeroCurvatureFromZero) {
  const auto g = build_grid(32, 128);
  const auto s = newton_solve(constant_data(0.0, 1.0), DiskField(g));
  ASSERT_TRUE(s.converged) << s.message;
  EXPECT_LE(std::abs(gauss_bonnet_residual(s.u, constant_data(0.0, 1.0))), 1e-8);
  EXPECT_FALSE(s.residual_history.empty());
}

TEST(Newton, NonConstantDataSatisfiesKazdanWarner) {
  const auto g = build_grid(32, 128);
  TrigPoly h;
  h.cos = {1.0, 0.0, 0.3};
  h.sin = {0.0, 0.1};
  const CurvatureData d{Poly2({{0, 0, 2.0}, {2, 0, 0.5}, {1, 0, 0.2}}), h};
  const DiskBubble b(bubble_constants(2.0, 1.0), 0.0);
  SolverOptions opt;
  opt.augment_barycenter = Augment::off;
  const auto s = newton_solve(d, DiskField::sample(g, [&](Point z) { return b(z); }), opt);
  ASSERT_TRUE(s.converged) << s.message;
  EXPECT_LE(s.interior_residual, 1e-8);
  EXPECT_LE(std::abs(gauss_bonnet_residual(s.u, d)), 1e-8);
  EXPECT_LE(std::abs(kazdan_warner_residual(s.u, d, KWDirection::x)), 1e-6);
  EXPECT_LE(std::abs(kazdan_warner_residual(s.u, d, KWDirection::y)), 1e-6);
}

TEST(Newton, ObstructedDataDoesNotConverge) {
  const auto g = build_grid(24, 96);
  const CurvatureData d{Poly2({{0, 0, 1.0}, {1, 0, 0.1}}), TrigPoly::constant(0.1)};
  const DiskBubble b(bubble_constants(1.0, 0.1), 0.0);
  SolverOptions opt;
  opt.max_iter = 25;
  const auto s = newton_solve(d, DiskField::sample(g, [&](Point z) { return b(z); }), opt);
  EXPECT_FALSE(s.converged);
  EXPECT_GT(std::max(s.interior_residual, s.boundary_residual), 1e-6);
}

TEST(Newton, RejectsNonFiniteGuess) {
  DiskField u(build_grid(8, 16));
  u[3] = NAN;
  EXPECT_THROW(newton_solve(constant_data(1.0, 0.0), u), std::invalid_argument);
}

TEST(Barycenter, MovedBubbleIsRecentred) {
  const auto g = build_grid(48, 192);
  const auto c = bubble_constants(3.0, 1.0);
  const DiskBubble va(c, Point(0.3, -0.2)), v0(c, 0.0);
  const auto nb = normalize_barycenter(DiskField::sample(g, [&](Point z) { return va(z); }));
  EXPECT_LE(nb.gamma_norm, 1e-10);
  EXPECT_LE(sup_diff(nb.v, [&](Point z) { return v0(z); }), 1e-7);
  EXPECT_NEAR(std::abs(nb.a), std::abs(Point(0.3, -0.2)), 1e-7);
}

TEST(Sequence, SupIncreasesAndMassesConcentrate) {
  const CurvatureData d{Poly2({{0, 0, 1.0}, {1, 0, 1.0}}), TrigPoly::constant(1.0)};
  SequenceOptions opt;
  opt.remainder = false;
  const auto s = synthetic_sequence(d, Point(1.0, 0.0), {0.9, 0.99, 0.999}, opt);
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_TRUE(s.sup_increasing());
  EXPECT_NEAR(s.phi_hat, 1.0 + std::sqrt(3.0), 1e-14);
  EXPECT_EQ(s.k_hat, 2.0);
  for (std::size_t k = 1; k < 3; ++k)
    EXPECT_GT(s.records[k].masses.cap_boundary_mass, s.records[k - 1].masses.cap_boundary_mass);
  EXPECT_THROW(synthetic_sequence(d, Point(0.5, 0.0), {0.9}, opt), DomainError);
  EXPECT_THROW(synthetic_sequence(d, Point(1.0, 0.0), {0.99, 0.9}, opt), std::exception);
}

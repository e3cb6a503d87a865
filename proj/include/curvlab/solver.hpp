#pragma once
// Newton solution of  -Δu = 2K e^u in D,  ∂u/∂ν + 2 = 2h e^{u/2} on ∂D  on a
// DiskGrid, the constrained linearized problem at the radial profile,
// barycenter normalisation and synthetic blow-up sequences.
//
// Linear systems are solved matrix-free by restarted GMRES, right-
// preconditioned with the exact inverse of the operator whose coefficients are
// replaced by their ring averages (one n_r x n_r solve per Fourier mode).  The
// conformal near-kernel lives in mode 1; when the barycenter constraints are
// added, that mode's block is bordered by them so the preconditioner stays
// well-conditioned.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/bubbles.hpp"
#include "curvlab/conformal.hpp"
#include "curvlab/core.hpp"
#include "curvlab/diskgrid.hpp"
#include "curvlab/identities.hpp"
#include "curvlab/prescription.hpp"

namespace curvlab {

namespace detail {

/// -Δ v + cK v on rings r < 1, ∂_r v + b v on r = 1, optionally bordered by
///   + μ1 x w + μ2 y w  (interior rows)  and the rows  Σ W x w v,  Σ W y w v.
/// Vectors are laid out as the grid values followed by (μ1, μ2) if bordered.
class BoundaryValueOperator {
 public:
  BoundaryValueOperator(GridPtr g, std::vector<double> cK, std::vector<double> b, std::vector<double> w,
                        bool bordered)
      : g_(std::move(g)), cK_(std::move(cK)), b_(std::move(b)), w_(std::move(w)), bordered_(bordered) {}

  const GridPtr& grid() const { return g_; }
  bool bordered() const { return bordered_; }
  std::size_t n_field() const { return g_->size(); }
  std::size_t size() const { return n_field() + (bordered_ ? 2 : 0); }
  const std::vector<double>& cK() const { return cK_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& w() const { return w_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const DiskGrid& g = *g_;
    const std::size_t n = n_field();
    DiskField v(g_, std::vector<double>(x.data(), x.data() + n));
    const DiskField ang = detail::angular_multiplier(v, 2);
    std::vector<double> fr(n), frr(n);
    g.radial_derivatives(v.values().data(), fr.data(), frr.data());
    Eigen::VectorXd y(size());
    const double mu1 = bordered_ ? x[n] : 0.0, mu2 = bordered_ ? x[n + 1] : 0.0;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < g.n_r(); ++i) {
      const double r = g.r()[i];
      for (int j = 0; j < g.n_theta(); ++j) {
        const std::size_t k = g.index(i, j);
        if (i == 0) {
          y[k] = fr[k] + b_[j] * v[k];
        } else {
          y[k] = -(frr[k] + fr[k] / r + ang[k] / (r * r)) + cK_[k] * v[k];
          if (bordered_) {
            const Point z = g.node(i, j);
            y[k] += w_[k] * (mu1 * z.real() + mu2 * z.imag());
          }
        }
        if (bordered_) {
          const Point z = g.node(i, j);
          s1 += g.disk_weight(i) * z.real() * w_[k] * v[k];
          s2 += g.disk_weight(i) * z.imag() * w_[k] * v[k];
        }
      }
    }
    if (bordered_) {
      y[n] = s1;
      y[n + 1] = s2;
    }
    return y;
  }

 private:
  GridPtr g_;
  std::vector<double> cK_;  // per node (interior rows)
  std::vector<double> b_;   // per boundary angle
  std::vector<double> w_;   // per node, weight of the barycenter constraint
  bool bordered_;
};

/// Exact inverse of the ring-averaged operator, mode by mode.
class ModePreconditioner {
 public:
  explicit ModePreconditioner(const BoundaryValueOperator& op) : g_(op.grid()), bordered_(op.bordered()) {
    const DiskGrid& g = *g_;
    const int nr = g.n_r(), nt = g.n_theta();
    std::vector<double> cbar(nr, 0.0), wbar(nr, 0.0);
    double bbar = 0.0;
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nt; ++j) {
        cbar[i] += op.cK()[g.index(i, j)];
        wbar[i] += op.w()[g.index(i, j)];
      }
      cbar[i] /= nt;
      wbar[i] /= nt;
    }
    for (int j = 0; j < nt; ++j) bbar += op.b()[j];
    bbar /= nt;

    const int modes = nt / 2 + 1;
    lu_.reserve(modes);
    for (int k = 0; k < modes; ++k) {
      Eigen::MatrixXd A(nr, nr);
      const Eigen::MatrixXd& D1 = g.d1(k);
      const Eigen::MatrixXd& D2 = g.d2(k);
      for (int i = 0; i < nr; ++i) {
        if (i == 0) {
          A.row(0) = D1.row(0);
          A(0, 0) += bbar;
          continue;
        }
        const double r = g.r()[i];
        A.row(i) = -(D2.row(i) + D1.row(i) / r);
        if (g.mode_active(k, i)) A(i, i) += static_cast<double>(k) * k / (r * r);
        A(i, i) += cbar[i];
      }
      if (k == 1) {
        condition_ = condition_number(A);
        if (bordered_) {
          Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nr + 1, nr + 1);
          B.topLeftCorner(nr, nr) = A;
          for (int i = 1; i < nr; ++i) B(i, nr) = 0.5 * nt * g.r()[i] * wbar[i];
          for (int i = 0; i < nr; ++i) B(nr, i) = g.disk_weight(i) * g.r()[i] * wbar[i];
          A = B;
        }
      }
      lu_.emplace_back(A);
    }
  }

  /// 2-norm condition number of the unbordered mode-1 block.
  double mode1_condition() const { return condition_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const DiskGrid& g = *g_;
    const std::size_t n = g.size();
    const int nr = g.n_r();
    DiskField f(g_, std::vector<double>(x.data(), x.data() + n));
    ModeData modes = to_modes(f);
    std::complex<double> m{};
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const bool border = bordered_ && k == 1;
      const int sz = nr + (border ? 1 : 0);
      Eigen::VectorXd re(sz), im(sz);
      for (int i = 0; i < nr; ++i) {
        re[i] = modes[k][i].real();
        im[i] = modes[k][i].imag();
      }
      if (border) {
        // Σ_i ω_i δ̂_1(i) = s1 - i s2 for the constraints Σ W x w δ = s1, Σ W y w δ = s2.
        re[nr] = x[n];
        im[nr] = -x[n + 1];
      }
      const Eigen::VectorXd sr = lu_[k].solve(re), si = lu_[k].solve(im);
      for (int i = 0; i < nr; ++i) modes[k][i] = {sr[i], si[i]};
      if (border) m = {sr[nr], si[nr]};
    }
    const DiskField out = from_modes(g_, modes);
    Eigen::VectorXd y(x.size());
    for (std::size_t k = 0; k < n; ++k) y[k] = out[k];
    if (bordered_) {
      // Mode 1 of μ1 x w + μ2 y w is (n_θ / 2) r w̄ (μ1 - i μ2).
      y[n] = m.real();
      y[n + 1] = -m.imag();
    }
    return y;
  }

 private:
  static double condition_number(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
  }

  GridPtr g_;
  bool bordered_;
  double condition_ = 0.0;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning, x0 = 0.
template <class Op, class Prec>
GmresResult gmres(const Op& A, const Prec& M, const Eigen::VectorXd& b, double rtol, int restart, int max_iter) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r = b;
  double beta = bnorm;
  while (res.iterations < max_iter) {
    const int m = std::min(restart, max_iter - res.iterations);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), gvec = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    gvec[0] = beta;
    int j = 0;
    for (; j < m; ++j) {
      Eigen::VectorXd w = A.apply(M.apply(V.col(j)));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = den > 0.0 ? H(j, j) / den : 1.0;
      sn[j] = den > 0.0 ? H(j + 1, j) / den : 0.0;
      H(j, j) = den;
      H(j + 1, j) = 0.0;
      gvec[j + 1] = -sn[j] * gvec[j];
      gvec[j] = cs[j] * gvec[j];
      ++res.iterations;
      if (std::abs(gvec[j + 1]) <= rtol * bnorm || H(j, j) == 0.0) {
        ++j;
        break;
      }
    }
    Eigen::VectorXd yv = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(gvec.head(j));
    res.x += M.apply(V.leftCols(j) * yv);
    r = b - A.apply(res.x);
    beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= rtol * 10.0) {
      res.converged = res.relative_residual <= rtol * 10.0;
      break;
    }
  }
  return res;
}

/// Node values of K and boundary values of h.
struct NodeData {
  std::vector<double> K;  // per node
  std::vector<double> h;  // per boundary angle
};

inline NodeData node_data(const CurvatureData& data, const DiskGrid& g) {
  NodeData nd;
  nd.K.resize(g.size());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) nd.K[g.index(i, j)] = data.K(g.node(i, j));
  nd.h.resize(g.n_theta());
  for (int j = 0; j < g.n_theta(); ++j) nd.h[j] = data.h(g.theta()[j]);
  return nd;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Collocation residual of the nonlinear problem: -Δu - 2K e^u on rings r < 1,
/// ∂u/∂r + 2 - 2h e^{u/2} on r = 1.
struct PdeResidual {
  DiskField F;
  double interior = 0.0;  // sup over r < 1
  double boundary = 0.0;  // sup over r = 1
};

inline PdeResidual pde_residual(const DiskField& u, const CurvatureData& data) {
  const GridPtr& gp = u.grid();
  const DiskGrid& g = *gp;
  const auto nd = detail::node_data(data, g);
  const DiskField lap = laplacian(u);
  const DiskField ur = radial_derivative(u);
  PdeResidual res;
  res.F = DiskField(gp);
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      if (i == 0) {
        res.F[k] = ur[k] + 2.0 - 2.0 * nd.h[j] * std::exp(0.5 * u[k]);
        res.boundary = std::max(res.boundary, std::abs(res.F[k]));
      } else {
        res.F[k] = -lap[k] - 2.0 * nd.K[k] * std::exp(u[k]);
        res.interior = std::max(res.interior, std::abs(res.F[k]));
      }
      if (!std::isfinite(res.F[k])) {
        res.interior = res.boundary = std::numeric_limits<double>::infinity();
      }
    }
  }
  return res;
}

enum class Augment { off, on, automatic };

struct SolverOptions {
  int max_iter = 50;
  bool damping = true;
  Augment augment_barycenter = Augment::automatic;
  double tol_interior = 1e-8;
  double tol_boundary = 1e-7;
  /// Condition estimate of the mode-1 block above which augmentation turns on.
  double augment_condition = 1e10;
  int gmres_restart = 60;
  int gmres_max_iter = 600;
  /// Extra Newton steps once the tolerances are met, kept only while they at
  /// least halve the residual; pushes converged fields to the round-off floor.
  int polish_steps = 3;
};

struct SolveResult {
  DiskField u;
  int iterations = 0;
  double interior_residual = 0.0;
  double boundary_residual = 0.0;
  bool converged = false;
  bool augmented = false;
  double condition_estimate = 0.0;
  std::array<double, 2> multipliers{0.0, 0.0};
  std::vector<double> residual_history;  // sup-norm residual per iterate
  std::string message;
};

/// Damped Newton-GMRES for the discretized boundary-value problem.
inline SolveResult newton_solve(const CurvatureData& data, const DiskField& initial,
                                const SolverOptions& opt = {}) {
  if (!initial.finite()) throw std::invalid_argument("newton_solve: initial guess is not finite");
  const GridPtr gp = initial.grid();
  const DiskGrid& g = *gp;
  const std::size_t n = g.size();
  const auto nd = detail::node_data(data, g);

  SolveResult out;
  out.u = initial;
  auto merit = [&](const PdeResidual& r) { return std::max(r.interior, r.boundary); };

  auto linear_operator = [&](const DiskField& u, bool bordered) {
    std::vector<double> cK(n), b(g.n_theta()), w(n);
    for (std::size_t k = 0; k < n; ++k) {
      cK[k] = -2.0 * nd.K[k] * std::exp(u[k]);
      w[k] = std::exp(u[k]);
    }
    for (int j = 0; j < g.n_theta(); ++j) b[j] = -nd.h[j] * std::exp(0.5 * u[g.index(0, j)]);
    return detail::BoundaryValueOperator(gp, std::move(cK), std::move(b), std::move(w), bordered);
  };

  {
    const auto op = linear_operator(initial, false);
    out.condition_estimate = detail::ModePreconditioner(op).mode1_condition();
  }
  switch (opt.augment_barycenter) {
    case Augment::on: out.augmented = true; break;
    case Augment::off: out.augmented = false; break;
    case Augment::automatic:
      out.augmented = data.is_constant() || out.condition_estimate > opt.augment_condition;
      break;
  }

  DiskField u = initial;
  PdeResidual res = pde_residual(u, data);
  out.residual_history.push_back(merit(res));
  std::array<double, 2> mu{0.0, 0.0};

  int polished = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const bool polishing = res.interior <= opt.tol_interior && res.boundary <= opt.tol_boundary;
    if (polishing) {
      out.converged = true;
      if (polished++ >= opt.polish_steps || merit(res) == 0.0) break;
    }
    const auto op = linear_operator(u, out.augmented);
    const detail::ModePreconditioner M(op);
    Eigen::VectorXd rhs(op.size());
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -res.F[k];
    if (out.augmented) {
      // The multipliers enter the residual: F + μ1 x e^u + μ2 y e^u.
      double G1 = 0.0, G2 = 0.0;
      for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
          const std::size_t k = g.index(i, j);
          const Point z = g.node(i, j);
          if (i > 0) rhs[k] -= op.w()[k] * (mu[0] * z.real() + mu[1] * z.imag());
          G1 += g.disk_weight(i) * z.real() * op.w()[k];
          G2 += g.disk_weight(i) * z.imag() * op.w()[k];
        }
      rhs[n] = -G1;
      rhs[n + 1] = -G2;
    }
    const double eta = std::clamp(0.1 * merit(res), 1e-10, 1e-3);
    const auto lin = detail::gmres(op, M, rhs, eta, opt.gmres_restart, opt.gmres_max_iter);
    if (polishing && !lin.converged) break;
    if (!lin.converged && lin.relative_residual > 0.5) {
      out.message = "linear solve stalled (relative residual " + std::to_string(lin.relative_residual) + ")";
      break;
    }

    double t = 1.0;
    DiskField trial = u;
    PdeResidual tres;
    const double before = merit(res);
    bool accepted = false;
    for (;;) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + t * lin.x[k];
      tres = pde_residual(trial, data);
      if (!opt.damping || merit(tres) < before) {
        accepted = std::isfinite(merit(tres));
        break;
      }
      if (t <= std::ldexp(1.0, -10)) break;
      t *= 0.5;
    }
    if (polishing) {
      if (!accepted || !(merit(tres) <= 0.5 * before)) break;
    }
    ++out.iterations;
    if (!accepted) {
      // No decrease along the Newton direction: either at the round-off floor
      // of the residual evaluation or genuinely stuck.
      out.message = "line search failed at step 2^-10";
      break;
    }
    u = trial;
    res = tres;
    if (out.augmented) {
      mu[0] += t * lin.x[n];
      mu[1] += t * lin.x[n + 1];
    }
    out.residual_history.push_back(merit(res));
  }
  if (!out.converged && res.interior <= opt.tol_interior && res.boundary <= opt.tol_boundary) out.converged = true;
  if (!out.converged && out.message.empty()) out.message = "no convergence within max_iter";
  if (out.converged) out.message = "converged";
  out.u = u;
  out.interior_residual = res.interior;
  out.boundary_residual = res.boundary;
  out.multipliers = mu;
  return out;
}

// ---------------------------------------------------------------------------

struct LinearizedSolution {
  DiskField psi;
  std::array<double, 2> multipliers{0.0, 0.0};
  int gmres_iterations = 0;
  double relative_residual = 0.0;
};

/// Collocation residual of the homogeneous linearized problem at the radial
/// profile: -Δψ - 2K0 e^{v0} ψ on rings r < 1, ∂ψ/∂r - h0 e^{v0/2} ψ on r = 1.
inline PdeResidual linearized_residual(const BubbleConstants& consts, const DiskField& psi) {
  if (!consts.admissible) throw DomainError("linearized_residual: constants are not admissible");
  const GridPtr& gp = psi.grid();
  const DiskGrid& g = *gp;
  const DiskBubble v0(consts, 0.0);
  const DiskField lap = laplacian(psi);
  const DiskField pr = radial_derivative(psi);
  PdeResidual res;
  res.F = DiskField(gp);
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      const double v = v0(g.node(i, j));
      if (i == 0) {
        res.F[k] = pr[k] - consts.h0 * std::exp(0.5 * v) * psi[k];
        res.boundary = std::max(res.boundary, std::abs(res.F[k]));
      } else {
        res.F[k] = -lap[k] - 2.0 * consts.K0 * std::exp(v) * psi[k];
        res.interior = std::max(res.interior, std::abs(res.F[k]));
      }
    }
  return res;
}

/// Solves -Δψ = 2K0 e^{v0} ψ + c (r < 1), ∂ψ/∂ν = h0 e^{v0/2} ψ + d (r = 1),
/// ∫ x e^{v0} ψ = ∫ y e^{v0} ψ = 0, with two Lagrange multipliers along
/// x e^{v0}, y e^{v0} that absorb the component of (c, d) not in the range.
inline LinearizedSolution linearized_solve(const BubbleConstants& consts, const DiskField& c, const BoundaryField& d) {
  if (!consts.admissible) throw DomainError("linearized_solve: constants are not admissible");
  const GridPtr gp = c.grid();
  const DiskGrid& g = *gp;
  if (d.size() != static_cast<std::size_t>(g.n_theta()))
    throw std::invalid_argument("linearized_solve: boundary data size does not match the grid");
  const std::size_t n = g.size();
  const DiskBubble v0(consts, 0.0);
  std::vector<double> cK(n), b(g.n_theta()), w(n);
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      const double e = std::exp(v0(g.node(i, j)));
      cK[k] = -2.0 * consts.K0 * e;
      w[k] = e;
    }
  for (int j = 0; j < g.n_theta(); ++j) b[j] = -consts.h0 * std::exp(0.5 * v0(std::polar(1.0, g.theta()[j])));
  const detail::BoundaryValueOperator op(gp, std::move(cK), std::move(b), std::move(w), true);
  const detail::ModePreconditioner M(op);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(op.size());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) rhs[g.index(i, j)] = i == 0 ? d[j] : c.at(i, j);
  const auto lin = detail::gmres(op, M, rhs, 1e-14, 60, 600);
  if (!lin.converged && lin.relative_residual > 1e-8)
    throw NumericFailure("linearized_solve: augmented system could not be solved (relative residual " +
                         std::to_string(lin.relative_residual) + ")");
  LinearizedSolution out;
  out.psi = DiskField(gp, std::vector<double>(lin.x.data(), lin.x.data() + n));
  out.multipliers = {lin.x[n], lin.x[n + 1]};
  out.gmres_iterations = lin.iterations;
  out.relative_residual = lin.relative_residual;
  return out;
}

// ---------------------------------------------------------------------------

struct BarycenterResult {
  Point a;
  DiskField v;
  double gamma_norm = 0.0;
  int iterations = 0;
  std::vector<double> gamma_trace;
};

namespace detail {

/// Γ(a) = ∫ z e^{v_a},  v_a = u∘f_a + 2 log|f_a'|, written as ∫ f_{-a}(z) e^{u(z)} dz,
/// with its real Jacobian in (Re a, Im a).
struct GammaEval {
  Point value;
  Eigen::Matrix2d jac;
};

inline GammaEval barycenter_map(const DiskField& u, Point a) {
  const DiskGrid& g = *u.grid();
  GammaEval out{0.0, Eigen::Matrix2d::Zero()};
  Point da{0.0}, dab{0.0};
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Point z = g.node(i, j);
      const double w = g.disk_weight(i) * std::exp(u.at(i, j));
      const Point den = 1.0 - std::conj(a) * z;
      out.value += w * (z - a) / den;
      da += w * (-1.0 / den);             // ∂/∂a
      dab += w * (z - a) * z / (den * den);  // ∂/∂ā
    }
  // a = a1 + i a2: ∂/∂a1 = ∂_a + ∂_ā, ∂/∂a2 = i (∂_a - ∂_ā).
  const Point d1 = da + dab, d2 = Point(0.0, 1.0) * (da - dab);
  out.jac << d1.real(), d2.real(), d1.imag(), d2.imag();
  return out;
}

}  // namespace detail

/// Finds a with ∫ z e^{v} = 0 for v = u∘f_a + 2 log|f_a'| and returns v on the grid.
inline BarycenterResult normalize_barycenter(const DiskField& u, double tol = 1e-10) {
  if (!u.finite()) throw std::invalid_argument("normalize_barycenter: field is not finite");
  BarycenterResult out;
  out.v = DiskField(u.grid());

  auto newton = [&](Point a, int max_it) {
    auto ev = detail::barycenter_map(u, a);
    for (int it = 0; it < max_it; ++it) {
      out.gamma_trace.push_back(std::abs(ev.value));
      if (std::abs(ev.value) <= tol) break;
      const Eigen::Vector2d step = ev.jac.partialPivLu().solve(Eigen::Vector2d(-ev.value.real(), -ev.value.imag()));
      if (!step.allFinite()) break;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        const Point trial = a + t * Point(step[0], step[1]);
        if (std::abs(trial) >= 1.0) continue;
        const auto tev = detail::barycenter_map(u, trial);
        if (std::abs(tev.value) < std::abs(ev.value)) {
          a = trial;
          ev = tev;
          moved = true;
          break;
        }
      }
      ++out.iterations;
      if (!moved) break;
    }
    return std::pair{a, std::abs(ev.value)};
  };

  auto [a, gn] = newton(0.0, 40);
  if (gn > tol) {
    // Restart from the best point of a polar scan of |Γ|.
    Point best = 0.0;
    double bestv = std::abs(detail::barycenter_map(u, 0.0).value);
    for (int ri = 1; ri <= 19; ++ri)
      for (int ti = 0; ti < 32; ++ti) {
        const Point z = std::polar(0.05 * ri, two_pi * ti / 32.0);
        const double v = std::abs(detail::barycenter_map(u, z).value);
        if (v < bestv) {
          bestv = v;
          best = z;
        }
      }
    std::tie(a, gn) = newton(best, 60);
  }
  if (gn > tol) {
    std::ostringstream os;
    os << "normalize_barycenter: no zero of the barycenter map found; |Γ| trace:";
    for (double v : out.gamma_trace) os << ' ' << v;
    throw NumericFailure(os.str());
  }
  out.a = a;
  out.gamma_norm = gn;
  const MoebiusMap f(a);
  const FieldInterpolant ui(u);
  const DiskGrid& g = *u.grid();
  parallel_for(g.size(), [&](std::size_t k) {
    const int i = static_cast<int>(k / g.n_theta()), j = static_cast<int>(k % g.n_theta());
    const Point z = g.node(i, j);
    Point fz = f(z);
    if (std::abs(fz) > 1.0) fz /= std::abs(fz);
    out.v[k] = ui(fz) + 2.0 * std::log(f.derivative_modulus(z));
  });
  return out;
}

// ---------------------------------------------------------------------------

struct SequenceRecord {
  double lambda = 0.0;
  double sup_u = 0.0;
  MassReport masses;
  double energy = 0.0;
  Section5Values section5;
  /// Remainder statistics: sup and C^{0,α} seminorm of ξ (normalised frame)
  /// and the Hölder quotient of ψ = ξ∘f_{-a} against (1-λ)^{1-2α}.
  double xi_sup = 0.0;
  double xi_holder = 0.0;
  double psi_holder = 0.0;
  double psi_bound_shape = 0.0;
};

struct SequenceDiagnostics {
  Point p;
  double phi_hat = 0.0;
  double k_hat = 0.0;
  double alpha = 0.25;
  std::vector<SequenceRecord> records;
  bool sup_increasing() const {
    for (std::size_t k = 1; k < records.size(); ++k)
      if (!(records[k].sup_u > records[k - 1].sup_u)) return false;
    return true;
  }
};

struct SequenceOptions {
  double cap_radius = 0.3;
  double alpha = 0.25;
  int n_r = 32;
  int n_theta = 128;
  bool remainder = true;
};

namespace detail {

/// Largest value of the bubble over the closed disk: its critical point if
/// inside, the boundary point a/|a|, and a graded node set.
inline double bubble_sup(const DiskBubble& b) {
  const auto& c = b.constants();
  const Point a = b.a();
  const double phi2 = c.phi() * c.phi();
  double best = b(std::abs(a) > 0.0 ? a / std::abs(a) : Point(1.0, 0.0));
  const double den = phi2 * std::norm(a) + c.K0;
  if (den != 0.0) {
    const Point zc = a * (phi2 + c.K0) / den;
    if (std::abs(zc) <= 1.0) best = std::max(best, b(zc));
  }
  const double s = std::max(1e-6, 1.0 - std::abs(a));
  const auto rule = quad::disk_rule(std::arg(a), s);
  for (std::size_t k = 0; k < rule.size(); ++k) best = std::max(best, b(Point(rule.x[k], rule.y[k])));
  return best;
}

inline double holder_quotient(const std::vector<Point>& z, const std::vector<double>& f, double alpha) {
  double q = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double d = std::abs(z[i] - z[j]);
      if (d > 0.0) q = std::max(q, std::abs(f[i] - f[j]) / std::pow(d, alpha));
    }
  return q;
}

}  // namespace detail

/// Synthetic blow-up sequence u_λ = v_{λp} with (φ̂, k̂) = (Φ(p), K(p)).
inline SequenceDiagnostics synthetic_sequence(const CurvatureData& data, Point p, const std::vector<double>& lams,
                                              const SequenceOptions& opt = {}) {
  if (std::abs(std::abs(p) - 1.0) > 1e-12) throw DomainError("synthetic_sequence: p must lie on the unit circle");
  const double tp = std::arg(p);
  const BoundaryValue bv = eval_boundary(data, tp);
  const PhiPoint ph = phi_boundary(bv);
  if (!ph.defined || !(ph.Phi > 0.0)) throw DomainError("synthetic_sequence: Φ is not defined and positive at p");
  for (std::size_t k = 0; k < lams.size(); ++k) {
    if (!(lams[k] > 0.0 && lams[k] < 1.0)) throw DomainError("synthetic_sequence: lambda must lie in (0, 1)");
    if (k > 0 && !(lams[k] > lams[k - 1])) throw DomainError("synthetic_sequence: lambdas must increase");
  }
  const BubbleConstants consts = bubble_constants(bv.K, bv.h);
  if (!consts.admissible) throw DomainError("synthetic_sequence: (K(p), h(p)) is not admissible");

  SequenceDiagnostics out;
  out.p = std::polar(1.0, tp);
  out.phi_hat = consts.phi();
  out.k_hat = consts.K0;
  out.alpha = opt.alpha;
  const GridPtr grid = opt.remainder ? build_grid(opt.n_r, opt.n_theta) : nullptr;

  for (double lam : lams) {
    SequenceRecord rec;
    rec.lambda = lam;
    const DiskBubble b = moving_profile(consts, out.p, lam);
    rec.sup_u = detail::bubble_sup(b);
    rec.masses = mass_report([&b](Point z) { return b(z); }, data, out.p, opt.cap_radius, 1.0 - lam);
    rec.energy = energy(sample_field(smooth_field(b)), data);
    rec.section5 = section5_limits(data, out.p, lam);
    rec.psi_bound_shape = std::pow(1.0 - lam, 1.0 - 2.0 * opt.alpha);

    if (opt.remainder) {
      // Forcing of the remainder in the frame where the bubble is radial.
      const DiskGrid& g = *grid;
      const MoebiusMap f(b.a());
      const DiskBubble v0(consts, 0.0);
      DiskField c(grid);
      std::vector<double> d(g.n_theta());
      for (int i = 0; i < g.n_r(); ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
          const Point z = g.node(i, j);
          Point fz = f(z);
          if (std::abs(fz) > 1.0) fz /= std::abs(fz);
          c[g.index(i, j)] = 2.0 * (data.K(fz) - bv.K) * std::exp(v0(z));
        }
      for (int j = 0; j < g.n_theta(); ++j) {
        const Point z = std::polar(1.0, g.theta()[j]);
        d[j] = 2.0 * (data.h(std::arg(f(z))) - bv.h) * std::exp(0.5 * v0(z));
      }
      const auto xi = linearized_solve(consts, c, BoundaryField(d)).psi;
      rec.xi_sup = xi.sup_abs();
      std::vector<Point> zs, ws;
      std::vector<double> vals;
      for (int i = 0; i < g.n_r(); i += 2)
        for (int j = 0; j < g.n_theta(); j += 4) {
          const Point w = g.node(i, j);
          ws.push_back(w);
          Point z = f(w);
          if (std::abs(z) > 1.0) z /= std::abs(z);
          zs.push_back(z);
          vals.push_back(xi.at(i, j));
        }
      rec.xi_holder = detail::holder_quotient(ws, vals, opt.alpha);
      rec.psi_holder = detail::holder_quotient(zs, vals, opt.alpha);
    }
    out.records.push_back(rec);
  }
  return out;
}

}  // namespace curvlab

#pragma once
// Spectral collocation on the closed unit disk.
//
// Angular direction: n_theta equispaced nodes, trigonometric differentiation
// through a real FFT on every ring.  Radial direction: the positive half of
// the Chebyshev-Lobatto nodes of N = 2 n_r - 1 on [-1, 1].  N is odd, so the
// origin is never a node; a Fourier mode k of a smooth field has parity
// (-1)^k in r, which folds the full differentiation matrix onto the n_r
// positive nodes and removes any pole condition at the centre.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvlab/core.hpp"
#include "curvlab/trig.hpp"

namespace curvlab {

class DiskGrid;
using GridPtr = std::shared_ptr<const DiskGrid>;

class DiskGrid {
 public:
  DiskGrid(int n_r, int n_theta) : nr_(n_r), nt_(n_theta) {
    if (n_r < 8) throw std::invalid_argument("build_grid: n_r must be >= 8");
    if (n_theta < 16) throw std::invalid_argument("build_grid: n_theta must be >= 16");
    if (n_theta % 2 != 0) throw std::invalid_argument("build_grid: n_theta must be even");
    build_radial();
    build_angular();
  }

  int n_r() const { return nr_; }
  int n_theta() const { return nt_; }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * nt_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nt_ + j; }

  /// Radial nodes, r[0] = 1 descending toward the centre.
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& theta() const { return theta_; }
  Point node(int i, int j) const { return std::polar(r_[i], theta_[j]); }

  /// ∫_0^1 g(r) r dr ≈ Σ_i radial_weight[i] g(r_i), exact for even polynomials g.
  const std::vector<double>& radial_weights() const { return wr_; }
  double disk_weight(int i) const { return wr_[i] * two_pi / nt_; }
  double circle_weight() const { return two_pi / nt_; }

  /// Folded first/second radial derivative for Fourier modes of parity (-1)^k.
  const Eigen::MatrixXd& d1(int k) const { return (k % 2 == 0) ? d1_even_ : d1_odd_; }
  const Eigen::MatrixXd& d2(int k) const { return (k % 2 == 0) ? d2_even_ : d2_odd_; }

  /// Radial Laplacian for mode k: D2 + R^{-1} D1 - k^2 R^{-2}.
  Eigen::MatrixXd mode_laplacian(int k) const {
    Eigen::MatrixXd L = d2(k);
    for (int i = 0; i < nr_; ++i) {
      L.row(i) += d1(k).row(i) / r_[i];
      L(i, i) -= static_cast<double>(k) * k / (r_[i] * r_[i]);
    }
    return L;
  }

  /// Mode k is carried on ring i only while r_i^k >= 1e-15.  Below that its
  /// content in any field analytic on the closed disk is beneath round-off,
  /// while the k^2 / r^2 factor of the Laplacian would amplify FFT noise
  /// near the centre.  The mask is fixed, so operators stay linear.
  bool mode_active(int k, int i) const { return k == 0 || std::pow(r_[i], k) >= 1e-15; }

  /// First and second radial derivatives at every node, differentiating along
  /// the diameters θ_j, θ_j + π in physical space.  Sums are centred,
  /// Σ_m D_im (F_m - F_i), using the exact zero row sums; this keeps
  /// round-off proportional to the variation of the data.
  void radial_derivatives(const double* v, double* fr, double* frr) const {
    const int N = 2 * nr_ - 1;
    const int half = nt_ / 2;
    std::vector<double> F(N + 1);
    for (int j = 0; j < half; ++j) {
      for (int m = 0; m < nr_; ++m) {
        F[m] = v[index(m, j)];
        F[N - m] = v[index(m, j + half)];
      }
      for (int i = 0; i <= N; ++i) {
        double s1 = 0.0, s2 = 0.0;
        for (int m = 0; m <= N; ++m) {
          if (m == i) continue;
          const double d = F[m] - F[i];
          s1 += dfull_(i, m) * d;
          if (frr) s2 += d2full_(i, m) * d;
        }
        // On the far half of the diameter x = -r, so d/dr = -d/dx.
        const std::size_t k = i < nr_ ? index(i, j) : index(N - i, j + half);
        if (fr) fr[k] = i < nr_ ? s1 : -s1;
        if (frr) frr[k] = s2;
      }
    }
  }

  /// Value at radius x in [-1, 1] of the polynomial interpolating mode data
  /// (given on the positive nodes) after parity extension.
  template <class T>
  T radial_interpolate(const std::vector<T>& vals, int k, double x) const {
    const int N = 2 * nr_ - 1;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    T num{};
    double den = 0.0;
    for (int j = 0; j <= N; ++j) {
      const T fj = j < nr_ ? vals[j] : sign * vals[N - j];
      const double diff = x - xfull_[j];
      if (diff == 0.0) return fj;
      const double w = bary_[j] / diff;
      num += w * fj;
      den += w;
    }
    return num / den;
  }

 private:
  void build_radial() {
    const int N = 2 * nr_ - 1;
    xfull_.resize(N + 1);
    for (int j = 0; j <= N; ++j) xfull_[j] = std::cos(pi * j / N);
    r_.assign(xfull_.begin(), xfull_.begin() + nr_);

    bary_.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
      bary_[j] = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == N) bary_[j] *= 0.5;
    }

    // Chebyshev differentiation matrices on the full node set.  Node
    // differences use the product-of-sines form and diagonals the
    // negative-sum trick, which keeps round-off in D2 near r = 1 small.
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N + 1, N + 1);
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(N + 1, N + 1);
    auto c = [N](int j) { return (j == 0 || j == N) ? 2.0 : 1.0; };
    auto dx = [N](int i, int j) {
      return -2.0 * std::sin((i + j) * pi / (2.0 * N)) * std::sin((i - j) * pi / (2.0 * N));
    };
    for (int i = 0; i <= N; ++i) {
      double row = 0.0;
      for (int j = 0; j <= N; ++j) {
        if (i == j) continue;
        const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        D(i, j) = c(i) / c(j) * sgn / dx(i, j);
        row += D(i, j);
      }
      D(i, i) = -row;
    }
    for (int i = 0; i <= N; ++i) {
      double row = 0.0;
      for (int j = 0; j <= N; ++j) {
        if (i == j) continue;
        D2(i, j) = 2.0 * D(i, j) * (D(i, i) - 1.0 / dx(i, j));
        row += D2(i, j);
      }
      D2(i, i) = -row;
    }

    auto fold = [&](const Eigen::MatrixXd& M, double sign) {
      Eigen::MatrixXd F(nr_, nr_);
      for (int i = 0; i < nr_; ++i)
        for (int m = 0; m < nr_; ++m) F(i, m) = M(i, m) + sign * M(i, N - m);
      return F;
    };
    dfull_ = D;
    d2full_ = D2;
    d1_even_ = fold(D, 1.0);
    d1_odd_ = fold(D, -1.0);
    d2_even_ = fold(D2, 1.0);
    d2_odd_ = fold(D2, -1.0);

    // Interpolatory weights for ∫_0^1 x g(x) dx on the full Lobatto set, using
    // M_k = ∫_0^1 x T_k(x) dx = (S(2+k) + S(2-k)) / 4, S(m) = (1 - cos(mπ/2)) / m.
    auto S = [](int m) { return m == 0 ? 0.0 : (1.0 - std::cos(m * pi / 2.0)) / m; };
    std::vector<double> M(N + 1);
    for (int k = 0; k <= N; ++k) M[k] = 0.25 * (S(2 + k) + S(2 - k));
    std::vector<double> w(N + 1);
    for (int j = 0; j <= N; ++j) {
      double s = 0.0;
      for (int k = 0; k <= N; ++k) {
        const double half = (k == 0 || k == N) ? 0.5 : 1.0;
        s += half * M[k] * std::cos(pi * static_cast<double>(k) * j / N);
      }
      const double cj = (j == 0 || j == N) ? 0.5 : 1.0;
      w[j] = 2.0 / N * cj * s;
    }
    wr_.resize(nr_);
    for (int i = 0; i < nr_; ++i) wr_[i] = w[i] + w[N - i];
  }

  void build_angular() {
    theta_.resize(nt_);
    for (int j = 0; j < nt_; ++j) theta_[j] = two_pi * j / nt_;
  }

  int nr_;
  int nt_;
  std::vector<double> xfull_, bary_, r_, theta_, wr_;
  Eigen::MatrixXd dfull_, d2full_, d1_even_, d1_odd_, d2_even_, d2_odd_;
};

inline GridPtr build_grid(int n_r, int n_theta) { return std::make_shared<const DiskGrid>(n_r, n_theta); }

/// Scalar data at the n_theta equispaced boundary angles.
class BoundaryField {
 public:
  BoundaryField() = default;
  explicit BoundaryField(std::vector<double> values) : v_(std::move(values)) {
    if (v_.size() < 2 || v_.size() % 2 != 0) throw std::invalid_argument("BoundaryField: size must be even");
  }
  static BoundaryField from_trig(const TrigPoly& t, std::size_t n) { return BoundaryField(samples_from_trig(t, n)); }

  std::size_t size() const { return v_.size(); }
  double theta(std::size_t j) const { return two_pi * static_cast<double>(j) / static_cast<double>(v_.size()); }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double operator[](std::size_t j) const { return v_[j]; }
  double& operator[](std::size_t j) { return v_[j]; }

  TrigPoly coefficients() const { return trig_from_samples(v_); }

 private:
  std::vector<double> v_;
};

/// Scalar field on the grid nodes, stored as values[i * n_theta + j].
class DiskField {
 public:
  DiskField() = default;
  explicit DiskField(GridPtr g) : g_(std::move(g)), v_(g_->size(), 0.0) {}
  DiskField(GridPtr g, std::vector<double> values) : g_(std::move(g)), v_(std::move(values)) {
    if (v_.size() != g_->size()) throw std::invalid_argument("DiskField: value count does not match grid");
  }

  static DiskField sample(GridPtr g, const std::function<double(Point)>& f) {
    DiskField out(g);
    for (int i = 0; i < g->n_r(); ++i)
      for (int j = 0; j < g->n_theta(); ++j) out.v_[g->index(i, j)] = f(g->node(i, j));
    return out;
  }

  const GridPtr& grid() const { return g_; }
  std::size_t size() const { return v_.size(); }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double operator[](std::size_t k) const { return v_[k]; }
  double& operator[](std::size_t k) { return v_[k]; }
  double at(int i, int j) const { return v_[g_->index(i, j)]; }

  bool finite() const {
    for (double x : v_) if (!std::isfinite(x)) return false;
    return true;
  }

  BoundaryField trace() const {
    return BoundaryField(std::vector<double>(v_.begin(), v_.begin() + g_->n_theta()));
  }

  DiskField map(const std::function<double(double)>& f) const {
    DiskField out(g_);
    for (std::size_t k = 0; k < v_.size(); ++k) out.v_[k] = f(v_[k]);
    return out;
  }

  double sup() const {
    double m = -INFINITY;
    for (double x : v_) m = std::max(m, x);
    return m;
  }
  double sup_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  DiskField& operator+=(const DiskField& o) { for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k]; return *this; }
  DiskField& operator-=(const DiskField& o) { for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k]; return *this; }
  DiskField& operator*=(double s) { for (double& x : v_) x *= s; return *this; }
  friend DiskField operator+(DiskField a, const DiskField& b) { return a += b; }
  friend DiskField operator-(DiskField a, const DiskField& b) { return a -= b; }
  friend DiskField operator*(double s, DiskField a) { return a *= s; }
  friend DiskField operator*(DiskField a, const DiskField& b) {
    for (std::size_t k = 0; k < a.v_.size(); ++k) a.v_[k] *= b.v_[k];
    return a;
  }

 private:
  GridPtr g_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Mode-space helpers

/// Half-spectrum coefficients per ring: modes[k][i].
using ModeData = std::vector<std::vector<std::complex<double>>>;

inline ModeData to_modes(const DiskField& f) {
  const DiskGrid& g = *f.grid();
  const int nt = g.n_theta();
  ModeData modes(nt / 2 + 1, std::vector<std::complex<double>>(g.n_r()));
  for (int i = 0; i < g.n_r(); ++i) {
    const auto c = ring_forward(f.values().data() + g.index(i, 0), nt);
    for (int k = 0; k <= nt / 2; ++k) modes[k][i] = c[k];
  }
  return modes;
}

inline DiskField from_modes(const GridPtr& gp, const ModeData& modes) {
  const DiskGrid& g = *gp;
  const int nt = g.n_theta();
  DiskField out(gp);
  std::vector<std::complex<double>> c(nt / 2 + 1);
  for (int i = 0; i < g.n_r(); ++i) {
    for (int k = 0; k <= nt / 2; ++k) c[k] = modes[k][i];
    // The Nyquist coefficient of a real signal is real.
    c[nt / 2] = std::complex<double>(c[nt / 2].real(), 0.0);
    const auto row = ring_inverse(c, nt);
    for (int j = 0; j < nt; ++j) out[g.index(i, j)] = row[j];
  }
  return out;
}

namespace detail {

/// Applies the angular multiplier (ik)^order ring by ring, honouring the mode
/// mask; the Nyquist mode is dropped for odd orders.
inline DiskField angular_multiplier(const DiskField& f, int order) {
  const DiskGrid& g = *f.grid();
  ModeData modes = to_modes(f);
  const std::size_t m = modes.size() - 1;
  for (std::size_t k = 0; k <= m; ++k) {
    std::complex<double> mult = 1.0;
    for (int o = 0; o < order; ++o) mult *= std::complex<double>(0.0, static_cast<double>(k));
    if (k == m && order % 2 == 1) mult = 0.0;
    for (int i = 0; i < g.n_r(); ++i) modes[k][i] = g.mode_active(static_cast<int>(k), i) ? mult * modes[k][i] : 0.0;
  }
  return from_modes(f.grid(), modes);
}

}  // namespace detail

/// ∂f/∂θ on every ring; the Nyquist mode is dropped.
inline DiskField angular_derivative(const DiskField& f) { return detail::angular_multiplier(f, 1); }

/// ∂f/∂r on every ring.
inline DiskField radial_derivative(const DiskField& f) {
  DiskField out(f.grid());
  f.grid()->radial_derivatives(f.values().data(), out.values().data(), nullptr);
  return out;
}

/// Polar Laplacian f_rr + f_r / r + f_θθ / r^2.
inline DiskField laplacian(const DiskField& f) {
  const DiskGrid& g = *f.grid();
  DiskField out = detail::angular_multiplier(f, 2);
  std::vector<double> fr(f.size()), frr(f.size());
  g.radial_derivatives(f.values().data(), fr.data(), frr.data());
  for (int i = 0; i < g.n_r(); ++i) {
    const double r = g.r()[i];
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      out[k] = frr[k] + fr[k] / r + out[k] / (r * r);
    }
  }
  return out;
}

inline BoundaryField normal_derivative(const DiskField& f) { return radial_derivative(f).trace(); }

/// Cartesian gradient (f_x, f_y).
inline std::pair<DiskField, DiskField> gradient(const DiskField& f) {
  const DiskGrid& g = *f.grid();
  const DiskField fr = radial_derivative(f);
  const DiskField ft = angular_derivative(f);
  DiskField fx(f.grid()), fy(f.grid());
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_theta(); ++j) {
      const std::size_t k = g.index(i, j);
      const double c = std::cos(g.theta()[j]), s = std::sin(g.theta()[j]);
      fx[k] = c * fr[k] - s * ft[k] / g.r()[i];
      fy[k] = s * fr[k] + c * ft[k] / g.r()[i];
    }
  }
  return {fx, fy};
}

/// ∂/∂θ of boundary data (Nyquist mode dropped).
inline BoundaryField tangential_derivative_samples(const BoundaryField& b) {
  const std::size_t n = b.size();
  auto c = ring_forward(b.values().data(), n);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::complex<double>(0.0, (k == n / 2) ? 0.0 : static_cast<double>(k));
  return BoundaryField(ring_inverse(c, n));
}

inline double integrate_disk(const DiskField& f) {
  const DiskGrid& g = *f.grid();
  double s = 0.0;
  for (int i = 0; i < g.n_r(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) ring += f.at(i, j);
    s += g.disk_weight(i) * ring;
  }
  return s;
}

inline double integrate_boundary(const BoundaryField& b) {
  double s = 0.0;
  for (double v : b.values()) s += v;
  return s * two_pi / static_cast<double>(b.size());
}

/// Spectral interpolation at an arbitrary point of the closed disk.
class FieldInterpolant {
 public:
  explicit FieldInterpolant(const DiskField& f) : g_(f.grid()), modes_(to_modes(f)) {}

  double operator()(Point z) const {
    require_in_closed_disk(z, "DiskField::eval");
    const double r = std::min(1.0, std::abs(z));
    const double th = std::arg(z);
    const int nt = g_->n_theta();
    const std::size_t m = modes_.size() - 1;
    double s = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      const std::complex<double> ck = g_->radial_interpolate(modes_[k], static_cast<int>(k), r);
      const double kt = static_cast<double>(k) * th;
      if (k == 0) {
        s += ck.real();
      } else if (k == m) {
        s += ck.real() * std::cos(kt);
      } else {
        s += 2.0 * (ck.real() * std::cos(kt) - ck.imag() * std::sin(kt));
      }
    }
    return s / nt;
  }

 private:
  GridPtr g_;
  ModeData modes_;
};

inline double eval(const DiskField& f, Point z) { return FieldInterpolant(f)(z); }

/// CSV rows r,theta,x,y,value with 17 significant digits.
inline void write_csv(std::ostream& os, const DiskField& f) {
  const DiskGrid& g = *f.grid();
  os << "r,theta,x,y,value\n";
  char buf[160];
  for (int i = 0; i < g.n_r(); ++i) {
    for (int j = 0; j < g.n_theta(); ++j) {
      const Point z = g.node(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.r()[i], g.theta()[j], z.real(), z.imag(),
                    f.at(i, j));
      os << buf;
    }
  }
}

}  // namespace curvlab

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <vector>

#include "specmdp/detail/fft.hpp"
#include "specmdp/errors.hpp"
#include "specmdp/innovations.hpp"
#include "specmdp/spectral.hpp"

namespace specmdp {

/// Simulated window X_1 .. X_{n + lag_extension}. The extension carries the
/// future values needed by lagged products X_k X_{k+l} up to k = n.
class SamplePath {
 public:
  SamplePath(Eigen::VectorXd values, Eigen::Index n, Eigen::Index lag_extension)
      : values_(std::move(values)), n_(n), lag_ext_(lag_extension) {
    if (values_.size() != n_ + lag_ext_)
      throw ValidationError("SamplePath: length != n + lag_extension");
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index lag_extension() const { return lag_ext_; }
  const Eigen::VectorXd& values() const { return values_; }
  double x(Eigen::Index k) const { return values_[k - 1]; }  // 1-based, as in X_k

 private:
  Eigen::VectorXd values_;
  Eigen::Index n_;
  Eigen::Index lag_ext_;
};

/// X_k = sum_j a_j xi_{k+j}, k = 1 .. n + lag_extension, computed exactly from
/// innovations drawn over the window [1 + support_lo, n + lag_extension + support_hi].
inline SamplePath simulate_path(const MACoefficients<double>& coeffs,
                                const InnovationLaw& law, Eigen::Index n,
                                Eigen::Index lag_extension, RandomStream& rng) {
  if (n < 1) throw ValidationError("simulate_path: n must be >= 1");
  if (lag_extension < 0) throw ValidationError("simulate_path: negative lag extension");
  const Eigen::Index total = n + lag_extension;
  const int lo = coeffs.support_lo(), hi = coeffs.support_hi();
  const Eigen::Index innov_count = total + (hi - lo);
  Eigen::VectorXd xi(innov_count);  // xi[i] = innovation at index 1 + lo + i
  for (Eigen::Index i = 0; i < innov_count; ++i) xi[i] = law.draw(rng);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(total);
  const auto& a = coeffs.values();
  for (Eigen::Index k = 0; k < total; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) acc += a[j] * xi[k + j];
    x[k] = acc;  // innovation index of xi[k+j] is (k+1) + (lo+j)
  }
  return SamplePath(std::move(x), n, lag_extension);
}

/// I_n(theta) = (1/n) |sum_{k=1}^n X_k e^{ik theta}|^2 on the uniform grid.
/// Goes through the FFT when grid_size is a power of two, otherwise evaluates
/// the double sum directly.
inline TorusFunction<double> periodogram(const SamplePath& path,
                                         Eigen::Index grid_size = kDefaultGridSize) {
  const Eigen::Index n = path.n();
  if (grid_size < n) throw ValidationError("periodogram: grid_size must be >= n");
  Eigen::VectorXd I(grid_size);
  if (detail::is_power_of_two(grid_size)) {
    // theta_m = -pi + 2 pi m / G, so e^{ik theta_m} = (-1)^k e^{2 pi i k m / G};
    // the modulus of the forward transform of b_k = (-1)^k X_k is what we need.
    Eigen::VectorXcd buf = Eigen::VectorXcd::Zero(grid_size);
    for (Eigen::Index k = 1; k <= n; ++k)
      buf[k] = (k & 1) ? -path.x(k) : path.x(k);
    detail::fft_pow2(buf);
    for (Eigen::Index m = 0; m < grid_size; ++m) I[m] = std::norm(buf[m]) / double(n);
  } else {
    for (Eigen::Index m = 0; m < grid_size; ++m) {
      const double theta = grid_theta<double>(grid_size, m);
      std::complex<double> acc(0, 0);
      for (Eigen::Index k = 1; k <= n; ++k)
        acc += path.x(k) * std::complex<double>(std::cos(k * theta), std::sin(k * theta));
      I[m] = std::norm(acc) / double(n);
    }
  }
  return TorusFunction<double>::from_grid(std::move(I));
}

/// s_l = sum_{k=1}^n X_k X_{k+l}, l = 0..m (full sums into the extension).
inline Eigen::VectorXd autocorrelation_sums(const SamplePath& path, int m) {
  if (m < 0) throw ValidationError("autocorrelation_sums: m must be >= 0");
  if (path.lag_extension() < m)
    throw ValidationError("autocorrelation_sums: lag_extension < m");
  const Eigen::Index n = path.n();
  const auto& x = path.values();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m + 1);
  for (int l = 0; l <= m; ++l) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += x[k] * x[k + l];
    s[l] = acc;
  }
  return s;
}

/// E X_k X_{k+l} = r_l(f), independent of k.
template <typename Scalar>
Scalar expected_autocovariance(const TorusFunction<Scalar>& f, int l) {
  return f.fourier(l);
}

/// E (1/2pi) int h I_n = sum_{|k| <= n-1} (1 - |k|/n) r_k(f) r_k(h).
template <typename Scalar>
Scalar expected_periodogram_functional(const TorusFunction<Scalar>& f,
                                       const TorusFunction<Scalar>& h,
                                       Eigen::Index n) {
  if (n < 1) throw ValidationError("expected_periodogram_functional: n >= 1");
  Scalar acc(0);
  const int lo = std::max<int>(f.min_lag(), -static_cast<int>(n - 1));
  const int hi = std::min<int>(f.max_lag(), static_cast<int>(n - 1));
  for (int k = lo; k <= hi; ++k)
    acc += (Scalar(1) - Scalar(std::abs(k)) / Scalar(n)) * f.fourier(k) * h.fourier(k);
  return acc;
}

namespace detail {

/// (1/n) <X, T_n(h) X> for banded T_n(h), first n path values only.
inline double toeplitz_quadratic_form(const SamplePath& path,
                                      const TorusFunction<double>& h) {
  const Eigen::Index n = path.n();
  const auto& x = path.values();
  const int d = std::min<int>(h.degree(), static_cast<int>(n - 1));
  double acc = h.fourier(0) * x.head(n).squaredNorm();
  for (int k = 1; k <= d; ++k) {
    const double rk = h.fourier(k);
    if (rk == 0.0) continue;
    double lagsum = 0.0;
    for (Eigen::Index t = 0; t < n - k; ++t) lagsum += x[t] * x[t + k];
    acc += 2.0 * rk * lagsum;
  }
  return acc / double(n);
}

}  // namespace detail

/// I_n(h) = (1/2pi) int h I_n d theta for even trig-polynomial h.
///
/// Evaluated twice: by grid quadrature of h * I_n on a grid fine enough to be
/// exact, and as the Toeplitz quadratic form (1/n)<X, T_n(h) X>. The two
/// routes must agree to 1e-9 relative to the Parseval scale
/// (1/n) sum X^2 * sum |r_k(h)|; a larger gap throws.
inline double periodogram_functional(const SamplePath& path,
                                     const TorusFunction<double>& h) {
  if (!h.has_fourier() || !h.even())
    throw ValidationError("periodogram_functional: h must be an even trig polynomial");
  const Eigen::Index n = path.n();

  const double quad = detail::toeplitz_quadratic_form(path, h);

  Eigen::Index G = 64;
  while (G < n + h.degree() + 1) G <<= 1;
  const auto I = periodogram(path, G).grid(G);
  const auto hg = h.grid(G);
  const double by_quadrature = I.dot(hg) / double(G);

  double coeff_l1 = 0.0;
  for (int k = h.min_lag(); k <= h.max_lag(); ++k) coeff_l1 += std::abs(h.fourier(k));
  const double scale =
      path.values().head(n).squaredNorm() / double(n) * coeff_l1 + 1e-300;
  if (std::abs(quad - by_quadrature) >
      1e-9 * std::max({scale, std::abs(quad), std::abs(by_quadrature)}))
    throw ConsistencyError("periodogram_functional: quadrature and quadratic form disagree");
  return quad;
}

// ---------------------------------------------------------------------------
// nonlinear functionals F(X_k, ..., X_{k+l})
// ---------------------------------------------------------------------------

enum class FunctionalKind { identity, product_lags, quadratic_smooth };

/// Fixed catalog of functionals with Lipschitz partial derivatives:
///   identity          F(x_0) = x_0
///   product_lags(l)   F(x_0..x_l) = (x_0 x_0, x_0 x_1, ..., x_0 x_l)
///   quadratic_smooth  F(x_0) = x_0^2
class FunctionalDescriptor {
 public:
  static FunctionalDescriptor identity() {
    return FunctionalDescriptor(FunctionalKind::identity, 0, 1, {0.0});
  }
  static FunctionalDescriptor product_lags(int l) {
    if (l < 0) throw ValidationError("product_lags: l must be >= 0");
    std::vector<double> lip(l + 1, 1.0);
    lip[0] = 2.0;
    return FunctionalDescriptor(FunctionalKind::product_lags, l, l + 1, std::move(lip));
  }
  static FunctionalDescriptor quadratic_smooth() {
    return FunctionalDescriptor(FunctionalKind::quadratic_smooth, 0, 1, {2.0});
  }

  FunctionalKind kind() const { return kind_; }
  int lags() const { return l_; }
  int arity() const { return l_ + 1; }
  int output_dim() const { return m_; }

  /// Lipschitz constant of d F / d x_i, in l2 norms over outputs.
  const std::vector<double>& partial_lipschitz() const { return lip_; }

  void evaluate(const double* w, double* out) const {
    switch (kind_) {
      case FunctionalKind::identity:
        out[0] = w[0];
        return;
      case FunctionalKind::product_lags:
        for (int j = 0; j <= l_; ++j) out[j] = w[0] * w[j];
        return;
      case FunctionalKind::quadratic_smooth:
        out[0] = w[0] * w[0];
        return;
    }
  }

  /// d F / d x_i evaluated at the window, one entry per output coordinate.
  void partial(int i, const double* w, double* out) const {
    switch (kind_) {
      case FunctionalKind::identity:
        out[0] = (i == 0) ? 1.0 : 0.0;
        return;
      case FunctionalKind::product_lags:
        for (int j = 0; j <= l_; ++j) {
          double d = 0.0;
          if (j == 0) {
            if (i == 0) d = 2.0 * w[0];
          } else {
            if (i == 0) d = w[j];
            if (i == j) d += w[0];
          }
          out[j] = d;
        }
        return;
      case FunctionalKind::quadratic_smooth:
        out[0] = (i == 0) ? 2.0 * w[0] : 0.0;
        return;
    }
  }

 private:
  FunctionalDescriptor(FunctionalKind kind, int l, int m, std::vector<double> lip)
      : kind_(kind), l_(l), m_(m), lip_(std::move(lip)) {}
  FunctionalKind kind_;
  int l_;
  int m_;
  std::vector<double> lip_;
};

/// sum_{k=1}^n F(X_k, ..., X_{k+l}) componentwise; centering is the caller's
/// business.
inline Eigen::VectorXd nonlinear_functional_sum(const SamplePath& path,
                                                const FunctionalDescriptor& F) {
  const int l = F.lags();
  if (path.lag_extension() < l)
    throw ValidationError("nonlinear_functional_sum: arity exceeds lag extension");
  const Eigen::Index n = path.n();
  const auto& x = path.values();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(F.output_dim());
  std::vector<double> out(F.output_dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    F.evaluate(x.data() + k, out.data());
    for (int j = 0; j < F.output_dim(); ++j) acc[j] += out[j];
  }
  return acc;
}

}  // namespace specmdp

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "specmdp/detail/fft.hpp"
#include "specmdp/errors.hpp"

namespace specmdp {

/// Default uniform grid on the torus [-pi, pi); power of two so periodogram
/// evaluation can go through the FFT.
inline constexpr Eigen::Index kDefaultGridSize = 4096;

template <typename Scalar = double>
Scalar grid_theta(Eigen::Index grid_size, Eigen::Index m) {
  return Scalar(-1) * std::numbers::pi_v<Scalar> +
         Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(m) / Scalar(grid_size);
}

/// Finite-support real coefficient sequence (a_j), j in [support_lo, support_hi].
/// Infinite sequences enter as truncations; the stored squared l2 norm is
/// fixed at construction.
template <typename Scalar = double>
class MACoefficients {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MACoefficients(int support_lo, Vector values)
      : lo_(support_lo), values_(std::move(values)) {
    if (values_.size() == 0)
      throw ValidationError("MACoefficients: empty support");
    l2_sq_ = values_.squaredNorm();
  }

  /// a_0 = 1 (identity filter).
  static MACoefficients delta() {
    Vector v(1);
    v[0] = Scalar(1);
    return MACoefficients(0, std::move(v));
  }

  /// a_0 = 1, a_1 = b.
  static MACoefficients ma1(Scalar b) {
    Vector v(2);
    v[0] = Scalar(1);
    v[1] = b;
    return MACoefficients(0, std::move(v));
  }

  /// a_j = rho^j for j = 0..truncation.
  static MACoefficients geometric(Scalar rho, int truncation) {
    Vector v(truncation + 1);
    Scalar p = Scalar(1);
    for (int j = 0; j <= truncation; ++j, p *= rho) v[j] = p;
    return MACoefficients(0, std::move(v));
  }

  int support_lo() const { return lo_; }
  int support_hi() const { return lo_ + static_cast<int>(values_.size()) - 1; }
  int max_abs_lag() const { return std::max(std::abs(support_lo()), std::abs(support_hi())); }
  const Vector& values() const { return values_; }
  Scalar l2_norm_sq() const { return l2_sq_; }

  Scalar at(int j) const {
    if (j < support_lo() || j > support_hi()) return Scalar(0);
    return values_[j - lo_];
  }

 private:
  int lo_;
  Vector values_;
  Scalar l2_sq_;
};

/// Real function on the torus, carried as Fourier coefficients
/// r_k = (1/2pi) int e^{ik theta} h(theta) d theta (finite support) and/or
/// as samples on the uniform grid theta_m = -pi + 2 pi m / G.
///
/// Synthesis from coefficients is only defined for even-symmetric maps
/// (r_k == r_{-k}), which is every function this library constructs.
template <typename Scalar = double>
class TorusFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static TorusFunction constant(Scalar c) {
    Vector v(1);
    v[0] = c;
    return from_fourier(0, std::move(v));
  }

  /// coeffs[i] = r_{min_lag + i}.
  static TorusFunction from_fourier(int min_lag, Vector coeffs) {
    if (coeffs.size() == 0) throw ValidationError("TorusFunction: empty coefficients");
    TorusFunction h;
    h.min_lag_ = min_lag;
    h.fourier_ = std::move(coeffs);
    h.trim();
    return h;
  }

  /// sum_k c_k cos(k theta)  ->  r_0 = c_0, r_{+-k} = c_k / 2.
  static TorusFunction from_cosines(const Vector& c) {
    const int d = static_cast<int>(c.size()) - 1;
    Vector r = Vector::Zero(2 * d + 1);
    r[d] = c[0];
    for (int k = 1; k <= d; ++k) r[d + k] = r[d - k] = c[k] / Scalar(2);
    return from_fourier(-d, std::move(r));
  }

  static TorusFunction from_grid(Vector grid_values) {
    if (grid_values.size() < 2) throw ValidationError("TorusFunction: grid too small");
    TorusFunction h;
    h.grid_ = std::move(grid_values);
    return h;
  }

  bool has_fourier() const { return fourier_.has_value(); }
  bool has_grid() const { return grid_.has_value(); }

  int min_lag() const {
    require_fourier();
    return min_lag_;
  }
  int max_lag() const {
    require_fourier();
    return min_lag_ + static_cast<int>(fourier_->size()) - 1;
  }
  int degree() const { return std::max(std::abs(min_lag()), std::abs(max_lag())); }

  Scalar fourier(int k) const {
    require_fourier();
    if (k < min_lag_ || k > min_lag_ + static_cast<int>(fourier_->size()) - 1)
      return Scalar(0);
    return (*fourier_)[k - min_lag_];
  }

  /// r_0, i.e. (1/2pi) int h; falls back to the grid average.
  Scalar mean() const {
    if (has_fourier()) return fourier(0);
    return grid_->sum() / Scalar(grid_->size());
  }

  bool even(Scalar tol = Scalar(1e-12)) const {
    if (has_fourier()) {
      Scalar scale = fourier_->template lpNorm<Eigen::Infinity>();
      if (scale == Scalar(0)) return true;
      const int d = degree();
      for (int k = 1; k <= d; ++k)
        if (std::abs(fourier(k) - fourier(-k)) > tol * scale) return false;
      return true;
    }
    const auto& g = *grid_;
    const Eigen::Index n = g.size();
    const Scalar scale = std::max(Scalar(1), g.template lpNorm<Eigen::Infinity>());
    for (Eigen::Index m = 1; m < n; ++m)
      if (std::abs(g[m] - g[n - m]) > tol * scale) return false;
    return true;
  }

  Eigen::Index stored_grid_size() const { return has_grid() ? grid_->size() : 0; }

  /// Samples on the uniform grid. Returns the stored grid when the size
  /// matches, otherwise synthesizes from the coefficients.
  Vector grid(Eigen::Index grid_size) const {
    if (has_grid() && grid_->size() == grid_size) return *grid_;
    if (!has_fourier())
      throw ValidationError(
          "TorusFunction: no Fourier side and stored grid size differs from request");
    if (!even())
      throw ValidationError("TorusFunction: synthesis requires even-symmetric coefficients");
    Vector out = Vector::Constant(grid_size, fourier(0));
    const int d = degree();
    for (int k = 1; k <= d; ++k) {
      const Scalar c = fourier(k) + fourier(-k);
      if (c == Scalar(0)) continue;
      for (Eigen::Index m = 0; m < grid_size; ++m)
        out[m] += c * std::cos(Scalar(k) * grid_theta<Scalar>(grid_size, m));
    }
    return out;
  }

  /// Point evaluation from the coefficients (even maps only).
  Scalar value_at(Scalar theta) const {
    require_fourier();
    Scalar v = fourier(0);
    const int d = degree();
    for (int k = 1; k <= d; ++k)
      v += (fourier(k) + fourier(-k)) * std::cos(Scalar(k) * theta);
    return v;
  }

  /// Copy with a synthesized grid attached.
  TorusFunction with_grid(Eigen::Index grid_size = kDefaultGridSize) const {
    TorusFunction h = *this;
    h.grid_ = grid(grid_size);
    return h;
  }

 private:
  TorusFunction() = default;

  void require_fourier() const {
    if (!fourier_) throw ValidationError("TorusFunction: Fourier coefficients required");
  }

  // drop exact-zero edges so supports stay minimal after convolutions
  void trim() {
    Eigen::Index lo = 0, hi = fourier_->size() - 1;
    while (lo < hi && (*fourier_)[lo] == Scalar(0)) ++lo;
    while (hi > lo && (*fourier_)[hi] == Scalar(0)) --hi;
    if (lo != 0 || hi != fourier_->size() - 1) {
      Vector v = fourier_->segment(lo, hi - lo + 1);
      min_lag_ += static_cast<int>(lo);
      fourier_ = std::move(v);
    }
  }

  int min_lag_ = 0;
  std::optional<Vector> fourier_;
  std::optional<Vector> grid_;
};

// ---------------------------------------------------------------------------
// free functions
// ---------------------------------------------------------------------------

/// g(theta_m) = sum_j a_j e^{i j theta_m} on the uniform grid.
/// grid_size must resolve the highest frequency present.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> transfer_function(
    const MACoefficients<Scalar>& coeffs, Eigen::Index grid_size) {
  if (grid_size < 2 * coeffs.max_abs_lag() + 1)
    throw ValidationError("transfer_function: grid too coarse, frequencies alias");
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> g(grid_size);
  for (Eigen::Index m = 0; m < grid_size; ++m) {
    const Scalar theta = grid_theta<Scalar>(grid_size, m);
    std::complex<Scalar> acc(0, 0);
    for (int j = coeffs.support_lo(); j <= coeffs.support_hi(); ++j)
      acc += coeffs.at(j) * std::complex<Scalar>(std::cos(Scalar(j) * theta),
                                                 std::sin(Scalar(j) * theta));
    g[m] = acc;
  }
  return g;
}

/// Spectral density f = variance * |g|^2 as a trig polynomial:
/// r_k(f) = variance * sum_j a_j a_{j+k}.
template <typename Scalar>
TorusFunction<Scalar> spectral_density(const MACoefficients<Scalar>& coeffs,
                                       Scalar variance) {
  if (!(variance > Scalar(0)))
    throw ValidationError("spectral_density: variance must be positive");
  const int span = coeffs.support_hi() - coeffs.support_lo();
  typename TorusFunction<Scalar>::Vector r =
      TorusFunction<Scalar>::Vector::Zero(2 * span + 1);
  for (int k = -span; k <= span; ++k) {
    Scalar acc(0);
    for (int j = coeffs.support_lo(); j <= coeffs.support_hi(); ++j)
      acc += coeffs.at(j) * coeffs.at(j + k);
    r[k + span] = variance * acc;
  }
  return TorusFunction<Scalar>::from_fourier(-span, std::move(r));
}

/// Fejer damping a_j (1 - |j|/N) for |j| <= N, zero beyond.
template <typename Scalar>
MACoefficients<Scalar> fejer_truncate(const MACoefficients<Scalar>& coeffs, int N) {
  if (N < 1) throw ValidationError("fejer_truncate: N must be >= 1");
  const int lo = std::max(coeffs.support_lo(), -N);
  const int hi = std::min(coeffs.support_hi(), N);
  if (lo > hi) {
    typename MACoefficients<Scalar>::Vector v =
        MACoefficients<Scalar>::Vector::Zero(1);
    return MACoefficients<Scalar>(0, std::move(v));
  }
  typename MACoefficients<Scalar>::Vector v(hi - lo + 1);
  for (int j = lo; j <= hi; ++j)
    v[j - lo] = coeffs.at(j) * (Scalar(1) - Scalar(std::abs(j)) / Scalar(N));
  // a trailing |j| == N entry is exactly zero; keep the vector as built
  return MACoefficients<Scalar>(lo, std::move(v));
}

/// Pointwise product via coefficient convolution (exact for trig polynomials).
template <typename Scalar>
TorusFunction<Scalar> multiply(const TorusFunction<Scalar>& a,
                               const TorusFunction<Scalar>& b) {
  const int lo = a.min_lag() + b.min_lag();
  const int hi = a.max_lag() + b.max_lag();
  typename TorusFunction<Scalar>::Vector out =
      TorusFunction<Scalar>::Vector::Zero(hi - lo + 1);
  for (int j = a.min_lag(); j <= a.max_lag(); ++j) {
    const Scalar aj = a.fourier(j);
    if (aj == Scalar(0)) continue;
    for (int k = b.min_lag(); k <= b.max_lag(); ++k)
      out[j + k - lo] += aj * b.fourier(k);
  }
  return TorusFunction<Scalar>::from_fourier(lo, std::move(out));
}

/// r_k of the pointwise product of trig polynomials.
template <typename Scalar>
Scalar product_fourier_coefficient(const std::vector<TorusFunction<Scalar>>& fs,
                                   int k) {
  if (fs.empty()) throw ValidationError("product_fourier_coefficient: empty list");
  TorusFunction<Scalar> p = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) p = multiply(p, fs[i]);
  return p.fourier(k);
}

/// ||h||_q = (int |h|^q d theta)^{1/q} by grid quadrature; the integral is
/// against d theta (no 1/2pi). q = infinity returns the grid max of |h|.
template <typename Scalar>
Scalar lq_norm(const TorusFunction<Scalar>& h, Scalar q,
               Eigen::Index grid_size = kDefaultGridSize) {
  if (!(q >= Scalar(1))) throw ValidationError("lq_norm: q must be >= 1");
  const Eigen::Index G =
      (!h.has_fourier() && h.has_grid()) ? h.stored_grid_size() : grid_size;
  const auto g = h.grid(G);
  if (std::isinf(q)) return g.array().abs().maxCoeff();
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar s = (g.array().abs().pow(q)).sum() * two_pi / Scalar(G);
  return std::pow(s, Scalar(1) / q);
}

}  // namespace specmdp

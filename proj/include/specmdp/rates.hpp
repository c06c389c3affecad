#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "specmdp/errors.hpp"
#include "specmdp/extended_real.hpp"
#include "specmdp/innovations.hpp"
#include "specmdp/process.hpp"
#include "specmdp/spectral.hpp"

namespace specmdp {

enum class RateBranch {
  closed_form,
  not_absolutely_continuous,
  ratio_not_square_integrable,
  degenerate_kappa,
};

inline const char* rate_branch_name(RateBranch b) {
  switch (b) {
    case RateBranch::closed_form: return "closed_form";
    case RateBranch::not_absolutely_continuous: return "not_absolutely_continuous";
    case RateBranch::ratio_not_square_integrable: return "ratio_not_square_integrable";
    case RateBranch::degenerate_kappa: return "degenerate_kappa";
  }
  return "?";
}

template <typename Scalar = double>
struct RateEvaluation {
  ExtendedReal<Scalar> value;
  RateBranch branch;
};

/// Symmetric positive-semidefinite limit covariance, validated at
/// construction (symmetry to 1e-12, minimal eigenvalue >= -1e-10, both
/// relative to the matrix scale).
template <typename Scalar = double>
class CovarianceMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit CovarianceMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw ValidationError("CovarianceMatrix: not square");
    const Scalar scale = std::max(Scalar(1), m_.template lpNorm<Eigen::Infinity>());
    if ((m_ - m_.transpose()).template lpNorm<Eigen::Infinity>() > Scalar(1e-12) * scale)
      throw ValidationError("CovarianceMatrix: not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < Scalar(-1e-10) * scale)
      throw ValidationError("CovarianceMatrix: not positive semidefinite");
  }

  Eigen::Index order() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Scalar entry(Eigen::Index k, Eigen::Index l) const { return m_(k, l); }

 private:
  Matrix m_;
};

/// Sigma^2_{k,l} = r_{k-l}(f^2) + r_{k+l}(f^2) + kappa4 r_k(f) r_l(f),
/// 0 <= k,l <= m, by exact coefficient convolution.
template <typename Scalar>
CovarianceMatrix<Scalar> sigma_matrix(const TorusFunction<Scalar>& f,
                                      Scalar kappa4, int m) {
  if (m < 0) throw ValidationError("sigma_matrix: m must be >= 0");
  const TorusFunction<Scalar> f2 = multiply(f, f);
  typename CovarianceMatrix<Scalar>::Matrix S(m + 1, m + 1);
  for (int k = 0; k <= m; ++k)
    for (int l = 0; l <= m; ++l)
      S(k, l) = f2.fourier(k - l) + f2.fourier(k + l) +
                kappa4 * f.fourier(k) * f.fourier(l);
  return CovarianceMatrix<Scalar>(std::move(S));
}

/// Cov(X_0 X_a, X_k X_{k+b}) for the linear process, via the fourth-moment
/// expansion of products of moving averages:
///   r(k) r(k+b-a) + r(k+b) r(k-a)
///     + kappa4 sigma^4 sum_i a_i a_{i-a} a_{i-k} a_{i-k-b}.
inline double lagged_product_covariance(const MACoefficients<double>& coeffs,
                                        const InnovationLaw& law, int a, int k,
                                        int b) {
  const double var = law.variance();
  const double kappa4 = law.kappa4();
  const int lo = coeffs.support_lo(), hi = coeffs.support_hi();
  const auto r = [&](int lag) {
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += coeffs.at(j) * coeffs.at(j + lag);
    return var * acc;
  };
  double diag = 0.0;
  for (int i = lo; i <= hi; ++i)
    diag += coeffs.at(i) * coeffs.at(i - a) * coeffs.at(i - k) * coeffs.at(i - k - b);
  return r(k) * r(k + b - a) + r(k + b) * r(k - a) + kappa4 * var * var * diag;
}

/// Time-domain oracle for sigma_matrix: entries as absolutely convergent sums
/// sum_k Cov(X_0 X_{l1}, X_k X_{k+l2}), each covariance from
/// lagged_product_covariance. Independent of the coefficient-convolution
/// route, so the two must agree wherever both apply.
inline CovarianceMatrix<double> sigma_matrix_timedomain(
    const MACoefficients<double>& coeffs, const InnovationLaw& law, int m) {
  if (m < 0) throw ValidationError("sigma_matrix_timedomain: m must be >= 0");
  const int span = coeffs.support_hi() - coeffs.support_lo();
  const int K = span + m + 1;
  Eigen::MatrixXd S(m + 1, m + 1);
  for (int l1 = 0; l1 <= m; ++l1)
    for (int l2 = 0; l2 <= m; ++l2) {
      double acc = 0.0;
      for (int k = -K; k <= K; ++k)
        acc += lagged_product_covariance(coeffs, law, l1, k, l2);
      S(l1, l2) = acc;
    }
  return CovarianceMatrix<double>(std::move(S));
}

/// Quadratic rate 1/2 z^T Sigma^+ z with the generalized-inverse convention:
/// +infinity when z leaves the range of Sigma^2. Singular values below
/// 1e-10 of the largest are treated as zero.
template <typename Scalar>
RateEvaluation<Scalar> rate_quadratic(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z,
    const CovarianceMatrix<Scalar>& Sigma) {
  if (z.size() != Sigma.order()) throw ValidationError("rate_quadratic: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<typename CovarianceMatrix<Scalar>::Matrix> es(
      Sigma.matrix());
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  const Scalar lam_max = lam.template lpNorm<Eigen::Infinity>();
  const Scalar cut = Scalar(1e-10) * std::max(Scalar(1), lam_max);

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = V.transpose() * z;
  Scalar quad(0), null_mass(0);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] > cut)
      quad += w[i] * w[i] / lam[i];
    else
      null_mass += w[i] * w[i];
  }
  const Scalar znorm = std::max(Scalar(1), z.norm());
  if (std::sqrt(null_mass) > Scalar(1e-10) * znorm)
    return {ExtendedReal<Scalar>::infinity(), RateBranch::degenerate_kappa};
  return {ExtendedReal<Scalar>::finite(quad / Scalar(2)), RateBranch::closed_form};
}

/// Scalar rate for the lag-l autocovariance sum:
/// I^l(z) = z^2 / (2 D) with D = r_0(f^2) + r_{2l}(f^2) + kappa4 r_l(f)^2.
template <typename Scalar>
RateEvaluation<Scalar> rate_scalar(Scalar z, const TorusFunction<Scalar>& f,
                                   Scalar kappa4, int l) {
  if (l < 0) throw ValidationError("rate_scalar: lag must be >= 0");
  const TorusFunction<Scalar> f2 = multiply(f, f);
  const Scalar D = f2.fourier(0) + f2.fourier(2 * l) +
                   kappa4 * f.fourier(l) * f.fourier(l);
  if (z == Scalar(0))
    return {ExtendedReal<Scalar>::finite(Scalar(0)), RateBranch::closed_form};
  if (std::abs(D) <= Scalar(1e-12) * std::max(Scalar(1), f2.fourier(0)))
    return {ExtendedReal<Scalar>::infinity(), RateBranch::degenerate_kappa};
  return {ExtendedReal<Scalar>::finite(z * z / (Scalar(2) * D)),
          RateBranch::closed_form};
}

namespace detail {

// shared formula behind clt_variance and lambda_functional:
// 2 r_0(f^2 h^2) + kappa4 r_0(f h)^2
template <typename Scalar>
Scalar quadratic_limit_variance(const TorusFunction<Scalar>& f,
                                const TorusFunction<Scalar>& h, Scalar kappa4) {
  const TorusFunction<Scalar> fh = multiply(f, h);
  const Scalar mean_fh = fh.fourier(0);
  return Scalar(2) * multiply(fh, fh).fourier(0) + kappa4 * mean_fh * mean_fh;
}

}  // namespace detail

/// Limiting variance of sqrt(n) (I_n(h) - E I_n(h)):
/// sigma^2 = (2/2pi) int (f h)^2 + kappa4 ((1/2pi) int f h)^2.
template <typename Scalar>
Scalar clt_variance(const TorusFunction<Scalar>& f, const TorusFunction<Scalar>& h,
                    Scalar kappa4) {
  if (!h.even()) throw ValidationError("clt_variance: h must be even");
  return detail::quadratic_limit_variance(f, h, kappa4);
}

/// Lambda(h) = 2 r_0(h^2 f^2) + kappa4 r_0(h f)^2, the limiting log-MGF
/// curvature; identical formula to clt_variance.
template <typename Scalar>
Scalar lambda_functional(const TorusFunction<Scalar>& h,
                         const TorusFunction<Scalar>& f, Scalar kappa4) {
  if (!h.even()) throw ValidationError("lambda_functional: h must be even");
  return detail::quadratic_limit_variance(f, h, kappa4);
}

namespace detail {

// Quadrature of (eta / (2f))^p terms on the uniform grid, skipping the points
// where both f and eta vanish below the absolute-continuity thresholds.
template <typename Scalar>
struct RatioQuadrature {
  Scalar ratio_sq_mean;   // (1/2pi) int (eta/f)^2  (grid mean of squares)
  Scalar half_ratio_mean; // (1/2pi) int eta/(2f)
  Scalar quarter_sq_mean; // (1/2pi) int eta^2/(4 f^2)
};

template <typename Scalar>
RatioQuadrature<Scalar> ratio_quadrature(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& eta_grid,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f_grid, Eigen::Index stride) {
  RatioQuadrature<Scalar> q{Scalar(0), Scalar(0), Scalar(0)};
  const Eigen::Index G = eta_grid.size();
  Eigen::Index used = 0;
  for (Eigen::Index m = 0; m < G; m += stride) {
    ++used;
    if (f_grid[m] < Scalar(1e-12)) continue;  // eta is known tiny here
    const Scalar ratio = eta_grid[m] / f_grid[m];
    q.ratio_sq_mean += ratio * ratio;
    q.half_ratio_mean += ratio / Scalar(2);
    q.quarter_sq_mean += ratio * ratio / Scalar(4);
  }
  q.ratio_sq_mean /= Scalar(used);
  q.half_ratio_mean /= Scalar(used);
  q.quarter_sq_mean /= Scalar(used);
  return q;
}

}  // namespace detail

/// Functional rate for the centered periodogram:
///   I(eta) = (1/2pi) int eta^2/(4 f^2) - kappa4/(2+kappa4) ((1/2pi) int eta/(2f))^2
/// when eta d theta is absolutely continuous w.r.t. f d theta and eta/f is
/// square integrable; the failure modes come back as tagged +infinity
/// branches. Both admissibility tests are grid surrogates: the zero-set test
/// uses thresholds (f < 1e-12, |eta| > 1e-10), square integrability compares
/// the quadrature against its half-resolution subsample.
template <typename Scalar>
RateEvaluation<Scalar> rate_functional(const TorusFunction<Scalar>& eta,
                                       const TorusFunction<Scalar>& f,
                                       Scalar kappa4,
                                       Eigen::Index grid_size = kDefaultGridSize) {
  if (!eta.even())
    throw ValidationError("rate_functional: eta must be even");
  const Eigen::Index G =
      (!eta.has_fourier() && eta.has_grid()) ? eta.stored_grid_size() : grid_size;
  if (G % 2 != 0) throw ValidationError("rate_functional: grid size must be even");
  const auto eg = eta.grid(G);
  const auto fg = f.grid(G);

  for (Eigen::Index m = 0; m < G; ++m)
    if (fg[m] < Scalar(1e-12) && std::abs(eg[m]) > Scalar(1e-10))
      return {ExtendedReal<Scalar>::infinity(), RateBranch::not_absolutely_continuous};

  // Divergence surrogate: a square-integrable ratio gives matching quadrature
  // at both resolutions, while a pole makes the fine sum grow by roughly the
  // refinement factor. The absolute floor keeps noise-level integrands out.
  const auto fine = detail::ratio_quadrature(eg, fg, 1);
  const auto coarse = detail::ratio_quadrature(eg, fg, 2);
  if (fine.ratio_sq_mean > Scalar(1.5) * coarse.ratio_sq_mean + Scalar(1e-12) &&
      fine.ratio_sq_mean > Scalar(1e-6))
    return {ExtendedReal<Scalar>::infinity(), RateBranch::ratio_not_square_integrable};

  if (std::abs(Scalar(2) + kappa4) < Scalar(1e-10))
    return {ExtendedReal<Scalar>::infinity(), RateBranch::degenerate_kappa};

  const Scalar value = fine.quarter_sq_mean -
                       kappa4 / (Scalar(2) + kappa4) * fine.half_ratio_mean *
                           fine.half_ratio_mean;
  return {ExtendedReal<Scalar>::finite(value), RateBranch::closed_form};
}

/// Finite-degree variational evaluation of the functional rate:
/// maximize (1/2pi) int h eta - Lambda(h)/2 over even cosine polynomials of
/// the given degree. The quadratic form of Lambda in cosine coordinates is
/// exactly the Sigma^2 matrix, so the maximizer solves a small linear system.
template <typename Scalar>
Scalar rate_functional_variational(const TorusFunction<Scalar>& eta,
                                   const TorusFunction<Scalar>& f, Scalar kappa4,
                                   int degree) {
  if (degree < 0 || degree > 64)
    throw ValidationError("rate_functional_variational: degree must be in [0, 64]");
  if (!eta.even())
    throw ValidationError("rate_functional_variational: eta must be even");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(degree + 1);
  if (eta.has_fourier()) {
    for (int j = 0; j <= degree; ++j) b[j] = eta.fourier(j);
  } else {
    const Eigen::Index G = eta.stored_grid_size();
    const auto eg = eta.grid(G);
    for (int j = 0; j <= degree; ++j) {
      Scalar acc(0);
      for (Eigen::Index m = 0; m < G; ++m)
        acc += std::cos(Scalar(j) * grid_theta<Scalar>(G, m)) * eg[m];
      b[j] = acc / Scalar(G);
    }
  }

  const auto M = sigma_matrix(f, kappa4, degree).matrix();
  Eigen::SelfAdjointEigenSolver<std::remove_const_t<decltype(M)>> es(M);
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  const Scalar cut =
      Scalar(1e-12) * std::max(Scalar(1), lam.template lpNorm<Eigen::Infinity>());
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = V.transpose() * b;
  Scalar quad(0), null_mass(0);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] > cut)
      quad += w[i] * w[i] / lam[i];
    else
      null_mass += w[i] * w[i];
  }
  if (std::sqrt(null_mass) > Scalar(1e-10) * std::max(Scalar(1), b.norm()))
    throw BranchError(
        "rate_functional_variational: Lambda is degenerate along the target "
        "direction (singular system)");
  return quad / Scalar(2);
}

/// Maximizer h_0 of the variational problem, on the grid:
/// h_0 f = eta/(2f) - kappa4/(2+kappa4) (1/2pi) int eta/(2f).
template <typename Scalar>
TorusFunction<Scalar> optimal_h(const TorusFunction<Scalar>& eta,
                                const TorusFunction<Scalar>& f, Scalar kappa4,
                                Eigen::Index grid_size = kDefaultGridSize) {
  const auto eval = rate_functional(eta, f, kappa4, grid_size);
  if (eval.branch != RateBranch::closed_form)
    throw BranchError(std::string("optimal_h: closed form does not apply (") +
                      rate_branch_name(eval.branch) + ")");
  const Eigen::Index G =
      (!eta.has_fourier() && eta.has_grid()) ? eta.stored_grid_size() : grid_size;
  const auto eg = eta.grid(G);
  const auto fg = f.grid(G);
  const auto q = detail::ratio_quadrature(eg, fg, 1);
  const Scalar shift = kappa4 / (Scalar(2) + kappa4) * q.half_ratio_mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h0(G);
  for (Eigen::Index m = 0; m < G; ++m) {
    if (fg[m] < Scalar(1e-12)) {
      h0[m] = Scalar(0);
      continue;
    }
    h0[m] = (eg[m] / (Scalar(2) * fg[m]) - shift) / fg[m];
  }
  return TorusFunction<Scalar>::from_grid(std::move(h0));
}

template <typename Scalar = double>
struct BiasBound {
  Scalar exact_bias;
  Scalar bound;
};

/// Exact bias E I_n(h) - (1/2pi) int f h and its Cauchy-Schwarz envelope
/// (1/n) sqrt(sum k^2 r_k(f)^2) sqrt(sum r_k(h)^2). When the caller knows a
/// derivative energy for a truncated f (sum k^2 r_k^2 including the tail) it
/// can be passed in; the computed finite-support value is used otherwise.
template <typename Scalar>
BiasBound<Scalar> bias_bound(const TorusFunction<Scalar>& f,
                             const TorusFunction<Scalar>& h, Eigen::Index n,
                             Scalar f_derivative_l2 = Scalar(0)) {
  if (n < 1) throw ValidationError("bias_bound: n must be >= 1");
  Scalar full(0);
  for (int k = f.min_lag(); k <= f.max_lag(); ++k)
    full += f.fourier(k) * h.fourier(k);
  const Scalar exact = expected_periodogram_functional(f, h, n) - full;

  Scalar deriv_energy(0);
  for (int k = f.min_lag(); k <= f.max_lag(); ++k)
    deriv_energy += Scalar(k) * Scalar(k) * f.fourier(k) * f.fourier(k);
  deriv_energy = std::max(deriv_energy, f_derivative_l2);
  Scalar h_energy(0);
  for (int k = h.min_lag(); k <= h.max_lag(); ++k)
    h_energy += h.fourier(k) * h.fourier(k);
  return {exact, std::sqrt(deriv_energy) * std::sqrt(h_energy) / Scalar(n)};
}

}  // namespace specmdp

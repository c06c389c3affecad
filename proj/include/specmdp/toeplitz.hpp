#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "specmdp/errors.hpp"
#include "specmdp/extended_real.hpp"
#include "specmdp/spectral.hpp"

namespace specmdp {

/// Dense eigensolves and matrix products are refused above this order.
inline constexpr Eigen::Index kDenseLimit = 4096;

/// Symmetric Toeplitz matrix T_n(h) = (r_{k-l}(h)) built from the Fourier
/// coefficients of an even generator h. Stores the first row only; dense
/// materialization happens on demand.
template <typename Scalar = double>
class ToeplitzOperator {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ToeplitzOperator(TorusFunction<Scalar> generator, Eigen::Index order)
      : generator_(std::move(generator)), n_(order) {
    if (n_ < 1) throw ValidationError("ToeplitzOperator: order must be >= 1");
    if (!generator_.has_fourier() || !generator_.even())
      throw ValidationError("ToeplitzOperator: generator must be an even trig polynomial");
    first_row_.resize(n_);
    for (Eigen::Index k = 0; k < n_; ++k)
      first_row_[k] = generator_.fourier(static_cast<int>(k));
  }

  Eigen::Index order() const { return n_; }
  const Vector& first_row() const { return first_row_; }
  const TorusFunction<Scalar>& generator() const { return generator_; }

  Scalar entry(Eigen::Index k, Eigen::Index l) const {
    return first_row_[std::abs(k - l)];
  }

  Matrix dense() const {
    Matrix T(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      for (Eigen::Index j = 0; j < n_; ++j) T(i, j) = first_row_[std::abs(i - j)];
    return T;
  }

  /// <x, T x> using the band structure of the generator.
  Scalar quadratic_form(const Vector& x) const {
    if (x.size() != n_) throw ValidationError("quadratic_form: size mismatch");
    const int d = std::min<Eigen::Index>(generator_.degree(), n_ - 1);
    Scalar acc = first_row_[0] * x.squaredNorm();
    for (int k = 1; k <= d; ++k) {
      if (first_row_[k] == Scalar(0)) continue;
      Scalar lagsum(0);
      for (Eigen::Index t = 0; t + k < n_; ++t) lagsum += x[t] * x[t + k];
      acc += Scalar(2) * first_row_[k] * lagsum;
    }
    return acc;
  }

 private:
  TorusFunction<Scalar> generator_;
  Eigen::Index n_;
  Vector first_row_;
};

template <typename Scalar>
ToeplitzOperator<Scalar> build(const TorusFunction<Scalar>& h, Eigen::Index n) {
  return ToeplitzOperator<Scalar>(h, n);
}

namespace detail {

inline void require_dense(Eigen::Index n, const char* who) {
  if (n > kDenseLimit)
    throw SizeLimitError(std::string(who) + ": order exceeds dense limit");
}

template <typename Scalar>
void require_symmetric(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M,
                       const char* who) {
  if (M.rows() != M.cols())
    throw ValidationError(std::string(who) + ": matrix not square");
  const Scalar scale = std::max(Scalar(1), M.template lpNorm<Eigen::Infinity>());
  if ((M - M.transpose()).template lpNorm<Eigen::Infinity>() > Scalar(1e-12) * scale)
    throw ValidationError(std::string(who) + ": matrix not symmetric");
}

/// Symmetric PSD square root. Eigenvalues in [-1e-10 * scale, 0] are clamped
/// to zero; anything more negative is rejected.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sqrt_psd(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M, const char* who) {
  require_symmetric(M, who);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
      es(M);
  auto evals = es.eigenvalues();
  const Scalar scale = std::max(Scalar(1), evals.template lpNorm<Eigen::Infinity>());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < Scalar(-1e-10) * scale)
      throw ValidationError(std::string(who) + ": matrix not positive semidefinite");
    if (evals[i] < Scalar(0)) evals[i] = Scalar(0);
  }
  return es.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

/// Largest |eigenvalue| via a dense symmetric eigensolve.
template <typename Scalar>
Scalar operator_norm(const ToeplitzOperator<Scalar>& T) {
  detail::require_dense(T.order(), "operator_norm");
  Eigen::SelfAdjointEigenSolver<typename ToeplitzOperator<Scalar>::Matrix> es(
      T.dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().template lpNorm<Eigen::Infinity>();
}

/// n^{1/q} ||h||_q, the eigenvalue bound for T_n(h); the norm is against
/// d theta, matching lq_norm.
template <typename Scalar>
Scalar norm_bound(const TorusFunction<Scalar>& h, Scalar q, Eigen::Index n,
                  Eigen::Index grid_size = kDefaultGridSize) {
  if (!(q >= Scalar(1))) throw ValidationError("norm_bound: q must be >= 1");
  const Scalar nq = std::isinf(q) ? Scalar(1) : std::pow(Scalar(n), Scalar(1) / q);
  return nq * lq_norm(h, q, grid_size);
}

/// (1/n) tr( T_n(f_1) ... T_n(f_s) ), s <= 4, exact dense values.
/// s == 2 goes through the entrywise identity tr(AB) = sum_{ij} A_ij B_ji,
/// which for two Toeplitz matrices collapses to a sum over diagonals.
template <typename Scalar>
Scalar trace_product(const std::vector<TorusFunction<Scalar>>& generators,
                     Eigen::Index n) {
  if (generators.empty() || generators.size() > 4)
    throw ValidationError("trace_product: need 1..4 generators");
  detail::require_dense(n, "trace_product");
  const std::size_t s = generators.size();
  if (s == 1) return generators[0].fourier(0);
  if (s == 2) {
    const ToeplitzOperator<Scalar> A(generators[0], n), B(generators[1], n);
    Scalar acc = Scalar(n) * A.first_row()[0] * B.first_row()[0];
    for (Eigen::Index k = 1; k < n; ++k)
      acc += Scalar(2) * Scalar(n - k) * A.first_row()[k] * B.first_row()[k];
    return acc / Scalar(n);
  }
  using Matrix = typename ToeplitzOperator<Scalar>::Matrix;
  const Matrix AB =
      ToeplitzOperator<Scalar>(generators[0], n).dense() *
      ToeplitzOperator<Scalar>(generators[1], n).dense();
  if (s == 3) {
    const Matrix C = ToeplitzOperator<Scalar>(generators[2], n).dense();
    return AB.cwiseProduct(C.transpose()).sum() / Scalar(n);
  }
  const Matrix CD =
      ToeplitzOperator<Scalar>(generators[2], n).dense() *
      ToeplitzOperator<Scalar>(generators[3], n).dense();
  return AB.cwiseProduct(CD.transpose()).sum() / Scalar(n);
}

/// lim_n (1/n) tr( prod T_n(f_k) ) = r_0( prod f_k ), exact via convolution.
template <typename Scalar>
Scalar trace_limit(const std::vector<TorusFunction<Scalar>>& generators) {
  return product_fourier_coefficient(generators, 0);
}

/// log E exp( z <Y, A Y> ) for Y centered Gaussian with covariance R:
/// -1/2 sum log(1 - 2 z lambda_j), lambda_j the eigenvalues of A R
/// (computed as the symmetric similarity sqrt(R) A sqrt(R)); +infinity when
/// z lambda_max reaches 1/2.
template <typename Scalar>
ExtendedReal<Scalar> gaussian_quadratic_logmgf(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& R, Scalar z) {
  detail::require_symmetric(A, "gaussian_quadratic_logmgf (A)");
  if (A.rows() != R.rows())
    throw ValidationError("gaussian_quadratic_logmgf: order mismatch");
  const auto sqrtR = detail::sqrt_psd(R, "gaussian_quadratic_logmgf (R)");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S = sqrtR * A * sqrtR;
  S = ((S + S.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<decltype(S)> es(S, Eigen::EigenvaluesOnly);
  const auto& lam = es.eigenvalues();
  Scalar acc(0);
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    const Scalar zl = z * lam[j];
    if (!(zl < Scalar(0.5))) return ExtendedReal<Scalar>::infinity();
    acc += std::log1p(Scalar(-2) * zl);
  }
  return ExtendedReal<Scalar>::finite(Scalar(-0.5) * acc);
}

/// Upper bound on log E exp( lambda <X, B X> ) for the moving-average vector
/// X with covariance A = T_n(f) and sub-Gaussian constant K:
/// -1/2 sum log(1 - 2 K^2 lambda mu_j), mu_j the eigenvalues of
/// sqrt(B) A sqrt(B); +infinity at or past the boundary.
template <typename Scalar>
ExtendedReal<Scalar> quadratic_mgf_bound(const ToeplitzOperator<Scalar>& B,
                                         const TorusFunction<Scalar>& f,
                                         Scalar lambda, Scalar K) {
  if (!(lambda >= Scalar(0)))
    throw ValidationError("quadratic_mgf_bound: lambda must be >= 0");
  if (!(K > Scalar(0))) throw ValidationError("quadratic_mgf_bound: K must be > 0");
  detail::require_dense(B.order(), "quadratic_mgf_bound");
  const auto sqrtB = detail::sqrt_psd(B.dense(), "quadratic_mgf_bound (B)");
  const auto A = ToeplitzOperator<Scalar>(f, B.order()).dense();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S = sqrtB * A * sqrtB;
  S = ((S + S.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<decltype(S)> es(S, Eigen::EigenvaluesOnly);
  const auto& mu = es.eigenvalues();
  const Scalar c = Scalar(2) * K * K * lambda;
  Scalar acc(0);
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const Scalar t = c * mu[j];
    if (!(t < Scalar(1))) return ExtendedReal<Scalar>::infinity();
    acc += std::log1p(-t);
  }
  return ExtendedReal<Scalar>::finite(Scalar(-0.5) * acc);
}

}  // namespace specmdp

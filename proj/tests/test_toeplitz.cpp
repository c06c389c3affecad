#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "specmdp/process.hpp"
#include "specmdp/toeplitz.hpp"
#include "support/oracles.hpp"

using namespace specmdp;
using TF = TorusFunction<double>;
using MA = MACoefficients<double>;

namespace {
TF two_cos() {
  Eigen::VectorXd c(2);
  c << 0.0, 2.0;
  return TF::from_cosines(c);
}
TF ma1_density() {
  Eigen::VectorXd c(2);
  c << 1.25, 1.0;
  return TF::from_cosines(c);
}
}  // namespace

TEST_CASE("build") {
  SUBCASE("h = 1 gives the identity") {
    const auto T = build(TF::constant(1.0), 3);
    CHECK((T.dense() - Eigen::MatrixXd::Identity(3, 3)).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("h = 2cos gives the 0/1 tridiagonal") {
    const auto T = build(two_cos(), 3).dense();
    Eigen::MatrixXd expect(3, 3);
    expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    CHECK((T - expect).lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SUBCASE("MA(1) density, n = 2") {
    const auto T = build(ma1_density(), 2).dense();
    Eigen::MatrixXd expect(2, 2);
    expect << 1.25, 0.5, 0.5, 1.25;
    CHECK((T - expect).lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SUBCASE("odd generators are rejected") {
    Eigen::VectorXd asym(3);
    asym << 0.2, 0.0, 0.8;
    CHECK_THROWS_AS(build(TF::from_fourier(-1, asym), 4), ValidationError);
  }
  SUBCASE("PSD for nonnegative generators") {
    RandomStream rng(21, 0);
    for (int t = 0; t < 10; ++t) {
      const auto h = oracles::random_nonneg(rng, 5);
      const auto T = build(h, 32).dense();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
      const double hmax = lq_norm(h, std::numeric_limits<double>::infinity());
      CHECK(es.eigenvalues().minCoeff() >= -1e-10 * hmax);
    }
  }
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(build(TF::constant(1.0), 7)) == doctest::Approx(1.0));
  // tridiagonal spectrum 2cos(j pi / (n+1)): n = 3 gives {sqrt2, 0, -sqrt2}
  CHECK(operator_norm(build(two_cos(), 3)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  for (Eigen::Index n : {5, 17, 40})
    CHECK(operator_norm(build(two_cos(), n)) <= 2.0 + 1e-12);
  CHECK_THROWS_AS(operator_norm(build(TF::constant(1.0), kDenseLimit + 1)), SizeLimitError);
}

TEST_CASE("norm bound (eigenvalue envelope)") {
  const double inf = std::numeric_limits<double>::infinity();
  SUBCASE("tight for constants") {
    CHECK(norm_bound(TF::constant(1.0), inf, 10) == doctest::Approx(1.0));
    CHECK(operator_norm(build(TF::constant(1.0), 10)) == doctest::Approx(1.0));
  }
  SUBCASE("2cos at q = infinity") {
    CHECK(norm_bound(two_cos(), inf, 50) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(norm_bound(two_cos(), inf, 50) >= 2.0 * std::cos(std::numbers::pi / 51.0));
  }
  SUBCASE("MA(1) density at q = 2") {
    const double expect = 2.0 * std::sqrt(2.0 * std::numbers::pi * 2.0625);
    CHECK(norm_bound(ma1_density(), 2.0, 4) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(norm_bound(ma1_density(), 2.0, 4) >= operator_norm(build(ma1_density(), 4)));
  }
  SUBCASE("domination over random nonnegative generators") {
    RandomStream rng(22, 0);
    for (int t = 0; t < 10; ++t) {
      const auto h = oracles::random_nonneg(rng, 6);
      for (Eigen::Index n : {16, 64}) {
        const double opn = operator_norm(build(h, n));
        for (double q : {2.0, 4.0, inf})
          CHECK(opn <= norm_bound(h, q, n) * (1.0 + 1e-12) + 1e-12);
      }
    }
  }
}

TEST_CASE("trace products") {
  const auto one = TF::constant(1.0);
  CHECK(trace_product<double>({one, one}, 9) == doctest::Approx(1.0));

  SUBCASE("2cos pair: (1/n) tr T^2 = 2(n-1)/n") {
    CHECK(trace_product<double>({two_cos(), two_cos()}, 4) == doctest::Approx(1.5));
    CHECK(trace_product<double>({two_cos(), two_cos()}, 8) == doctest::Approx(1.75));
    CHECK(trace_product<double>({two_cos(), two_cos()}, 16) == doctest::Approx(1.875));
  }

  SUBCASE("s = 2 identity vs dense product trace") {
    RandomStream rng(23, 0);
    for (int t = 0; t < 5; ++t) {
      const auto f = oracles::random_even(rng, 4);
      const auto h = oracles::random_even(rng, 4);
      const Eigen::Index n = 20;
      const double fast = trace_product<double>({f, h}, n);
      const double dense =
          (build(f, n).dense() * build(h, n).dense()).trace() / double(n);
      CHECK(fast == doctest::Approx(dense).epsilon(1e-12));
    }
  }

  SUBCASE("s = 3 and s = 4 against brute dense chains") {
    RandomStream rng(24, 0);
    const auto f1 = oracles::random_even(rng, 3);
    const auto f2 = oracles::random_even(rng, 3);
    const auto f3 = oracles::random_even(rng, 3);
    const auto f4 = oracles::random_even(rng, 3);
    const Eigen::Index n = 12;
    const Eigen::MatrixXd D1 = build(f1, n).dense(), D2 = build(f2, n).dense(),
                          D3 = build(f3, n).dense(), D4 = build(f4, n).dense();
    CHECK(trace_product<double>({f1, f2, f3}, n) ==
          doctest::Approx((D1 * D2 * D3).trace() / double(n)).epsilon(1e-12));
    CHECK(trace_product<double>({f1, f2, f3, f4}, n) ==
          doctest::Approx((D1 * D2 * D3 * D4).trace() / double(n)).epsilon(1e-12));
  }

  SUBCASE("size and arity limits") {
    CHECK_THROWS_AS(trace_product<double>({one, one}, kDenseLimit + 1), SizeLimitError);
    CHECK_THROWS_AS(trace_product<double>({}, 4), ValidationError);
    CHECK_THROWS_AS(trace_product<double>({one, one, one, one, one}, 4), ValidationError);
  }
}

TEST_CASE("trace limits") {
  CHECK(trace_limit<double>({TF::constant(1.0), TF::constant(1.0)}) == 1.0);
  CHECK(trace_limit<double>({two_cos(), two_cos()}) == doctest::Approx(2.0));
  CHECK(trace_limit<double>({ma1_density(), ma1_density()}) == doctest::Approx(2.0625));
}

TEST_CASE("trace-product convergence at rate C/n for smooth generators") {
  const auto f = ma1_density();
  const double limit = trace_limit<double>({f, f});
  double prev_err = -1.0;
  for (Eigen::Index n : {128, 256, 512, 1024}) {
    const double err = std::abs(trace_product<double>({f, f}, n) - limit);
    if (prev_err > 0.0) {
      const double ratio = prev_err / err;
      CHECK(ratio >= 1.6);
      CHECK(ratio <= 2.4);
    }
    prev_err = err;
  }
}

TEST_CASE("gaussian quadratic log-MGF") {
  Eigen::MatrixXd A1(1, 1), R1(1, 1);
  A1 << 1.0;
  R1 << 1.0;
  SUBCASE("scalar closed form") {
    const auto v = gaussian_quadratic_logmgf(A1, R1, 0.25);
    CHECK(v.is_finite());
    CHECK(v.value() == doctest::Approx(-0.5 * std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("boundary goes to +infinity") {
    CHECK(gaussian_quadratic_logmgf(A1, R1, 0.5).is_infinite());
    CHECK(gaussian_quadratic_logmgf(A1, R1, 0.7).is_infinite());
  }
  SUBCASE("z = 0 gives 0") {
    Eigen::MatrixXd A(2, 2), R(2, 2);
    A << 0.3, 0.1, 0.1, -0.5;
    R << 1.0, 0.2, 0.2, 0.7;
    CHECK(gaussian_quadratic_logmgf(A, R, 0.0).value() == doctest::Approx(0.0));
  }
  SUBCASE("non-symmetric input is rejected") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(gaussian_quadratic_logmgf(bad, eye, 0.1), ValidationError);
  }
  SUBCASE("Monte Carlo agreement at n = 2") {
    Eigen::MatrixXd A(2, 2), R(2, 2);
    A << 0.8, 0.2, 0.2, -0.3;
    R << 1.0, 0.4, 0.4, 1.0;
    const double z = 0.15;
    const auto closed = gaussian_quadratic_logmgf(A, R, z);
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(R).matrixL();
    RandomStream rng(25, 0);
    const Eigen::Index N = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::Vector2d g(rng.normal(), rng.normal());
      const Eigen::Vector2d y = L * g;
      const double w = std::exp(z * y.dot(A * y));
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / double(N);
    const double se_log =
        std::sqrt(std::max(sum2 / double(N) - mean * mean, 0.0) / double(N)) / mean;
    CHECK(std::abs(std::log(mean) - closed.value()) <= 4.0 * se_log);
  }
}

TEST_CASE("quadratic MGF bound") {
  SUBCASE("B = I with a constant density reduces to the product form") {
    const Eigen::Index n = 6;
    const double c = 1.7, K = 1.3, lambda = 0.05;
    const auto bound =
        quadratic_mgf_bound(build(TF::constant(1.0), n), TF::constant(c), lambda, K);
    CHECK(bound.value() ==
          doctest::Approx(-0.5 * n * std::log(1.0 - 2.0 * lambda * K * K * c))
              .epsilon(1e-12));
  }
  SUBCASE("lambda = 0 gives 0") {
    CHECK(quadratic_mgf_bound(build(TF::constant(1.0), 4), ma1_density(), 0.0, 1.0)
              .value() == doctest::Approx(0.0));
  }
  SUBCASE("past the boundary is +infinity") {
    CHECK(quadratic_mgf_bound(build(TF::constant(1.0), 4), TF::constant(1.0), 0.6, 1.0)
              .is_infinite());
  }
  SUBCASE("indefinite B is rejected") {
    CHECK_THROWS_AS(quadratic_mgf_bound(build(two_cos(), 4), ma1_density(), 0.05, 1.0),
                    ValidationError);
  }
  SUBCASE("bound dominates a 10^6-path Monte Carlo estimate, MA(1) gaussian") {
    const Eigen::Index n = 8;
    const double lambda = 0.05;
    const auto B = build(TF::constant(1.0), n);
    const auto bound = quadratic_mgf_bound(B, ma1_density(), lambda, 1.0);
    const Eigen::Index R = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (Eigen::Index rep = 0; rep < R; ++rep) {
      RandomStream rng(26, rep);
      const auto path =
          simulate_path(MA::ma1(0.5), InnovationLaw::gaussian(1.0), n, 0, rng);
      const double w = std::exp(lambda * B.quadratic_form(path.values()));
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / double(R);
    const double se_log =
        std::sqrt(std::max(sum2 / double(R) - mean * mean, 0.0) / double(R)) / mean;
    CHECK(bound.value() >= std::log(mean) - 3.0 * se_log);
  }
}

TEST_CASE("spectral mapping: eig(sqrtB A sqrtB) equals eig(A B)") {
  RandomStream rng(27, 0);
  for (int t = 0; t < 5; ++t) {
    const auto hB = oracles::random_nonneg(rng, 3);
    const auto hA = oracles::random_even(rng, 3);
    const Eigen::Index n = 10;
    const Eigen::MatrixXd B = build(hB, n).dense();
    const Eigen::MatrixXd A = build(hA, n).dense();
    const Eigen::MatrixXd sqrtB = specmdp::detail::sqrt_psd(B, "test");
    Eigen::MatrixXd S = sqrtB * A * sqrtB;
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(S, Eigen::EigenvaluesOnly);
    Eigen::EigenSolver<Eigen::MatrixXd> gen(A * B);
    Eigen::VectorXd lam_sym = sym.eigenvalues();
    Eigen::VectorXd lam_gen = gen.eigenvalues().real();
    CHECK(gen.eigenvalues().imag().lpNorm<Eigen::Infinity>() < 1e-8);
    std::sort(lam_sym.data(), lam_sym.data() + n);
    std::sort(lam_gen.data(), lam_gen.data() + n);
    CHECK((lam_sym - lam_gen).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

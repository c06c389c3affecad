#include <doctest.h>

#include <cmath>
#include <complex>

#include "specmdp/spectral.hpp"
#include "support/oracles.hpp"

using namespace specmdp;
using TF = TorusFunction<double>;
using MA = MACoefficients<double>;

TEST_CASE("transfer function") {
  const Eigen::Index G = 4096;

  SUBCASE("identity filter is constant 1") {
    const auto g = transfer_function(MA::delta(), G);
    for (Eigen::Index m = 0; m < G; m += 321)
      CHECK(std::abs(g[m] - std::complex<double>(1.0, 0.0)) < 1e-14);
  }

  SUBCASE("MA(1) at theta = 0 sums the coefficients") {
    const auto g = transfer_function(MA::ma1(0.5), G);
    CHECK(std::abs(g[G / 2] - std::complex<double>(1.5, 0.0)) < 1e-13);  // theta_m = 0
  }

  SUBCASE("geometric coefficients against the closed form") {
    const auto g = transfer_function(MA::geometric(0.5, 40), 1024);
    double worst = 0.0;
    for (Eigen::Index m = 0; m < 1024; ++m) {
      const double theta = grid_theta<double>(1024, m);
      const std::complex<double> closed =
          1.0 / (1.0 - 0.5 * std::exp(std::complex<double>(0.0, theta)));
      worst = std::max(worst, std::abs(g[m] - closed));
    }
    CHECK(worst <= 1e-11);
  }

  SUBCASE("grid too coarse to resolve the top frequency") {
    CHECK_THROWS_AS(transfer_function(MA::ma1(0.5), 2), ValidationError);
  }
}

TEST_CASE("spectral density") {
  SUBCASE("white noise") {
    const auto f = spectral_density(MA::delta(), 1.0);
    CHECK(f.fourier(0) == 1.0);
    CHECK(f.fourier(1) == 0.0);
    CHECK(f.fourier(-3) == 0.0);
  }

  SUBCASE("MA(1) b=0.5 gives 1.25 + cos") {
    const auto f = spectral_density(MA::ma1(0.5), 1.0);
    CHECK(f.fourier(0) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(f.fourier(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.fourier(-1) == doctest::Approx(0.5).epsilon(1e-15));
    const auto grid = f.grid(512);
    for (Eigen::Index m = 0; m < 512; m += 37) {
      const double theta = grid_theta<double>(512, m);
      CHECK(grid[m] == doctest::Approx(1.25 + std::cos(theta)).epsilon(1e-12));
    }
  }

  SUBCASE("geometric: r_0 = 1/(1 - rho^2)") {
    const auto f = spectral_density(MA::geometric(0.5, 40), 1.0);
    CHECK(f.fourier(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("fejer truncation") {
  const auto a = MA::ma1(0.5);
  SUBCASE("a_0 never shrinks") {
    const auto t = fejer_truncate(MA::delta(), 3);
    CHECK(t.at(0) == 1.0);
    CHECK(t.support_lo() == 0);
    CHECK(t.support_hi() == 0);
  }
  SUBCASE("N = 2 halves the lag-1 weight") {
    const auto t = fejer_truncate(a, 2);
    CHECK(t.at(0) == 1.0);
    CHECK(t.at(1) == doctest::Approx(0.25));
  }
  SUBCASE("N = 1 zeroes the boundary lag") {
    const auto t = fejer_truncate(a, 1);
    CHECK(t.at(0) == 1.0);
    CHECK(t.at(1) == 0.0);
  }
}

TEST_CASE("product fourier coefficients") {
  const auto one = TF::constant(1.0);
  CHECK(product_fourier_coefficient<double>({one, one}, 0) == 1.0);

  Eigen::VectorXd c(2);
  c << 1.25, 1.0;
  const auto f = TF::from_cosines(c);
  // (1.25 + cos)^2 = 2.0625 + 2.5 cos + 0.5 cos 2theta
  CHECK(product_fourier_coefficient<double>({f, f}, 0) == doctest::Approx(2.0625));
  CHECK(product_fourier_coefficient<double>({f, f}, 1) == doctest::Approx(1.25));
  CHECK(product_fourier_coefficient<double>({f, f}, 2) == doctest::Approx(0.25));

  Eigen::VectorXd c2(2);
  c2 << 0.0, 2.0;
  const auto twocos = TF::from_cosines(c2);
  CHECK(product_fourier_coefficient<double>({twocos, twocos}, 0) == doctest::Approx(2.0));
}

TEST_CASE("lq norms use the d-theta convention") {
  const auto one = TF::constant(1.0);
  CHECK(lq_norm(one, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
  CHECK(lq_norm(one, 2.0) ==
        doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));

  Eigen::VectorXd c(2);
  c << 0.0, 1.0;
  CHECK(lq_norm(TF::from_cosines(c), std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("autocorrelation identity: coefficients vs grid quadrature") {
  RandomStream rng(11, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int lo = -2, len = 4;
    Eigen::VectorXd vals(len);
    for (int i = 0; i < len; ++i) vals[i] = rng.uniform(-1.0, 1.0);
    const MA coeffs(lo, vals);
    const auto f = spectral_density(coeffs, 1.3);
    const auto grid = f.grid(1024);
    const int span = coeffs.support_hi() - coeffs.support_lo();
    for (int k = -span; k <= span; ++k)
      CHECK(f.fourier(k) ==
            doctest::Approx(oracles::fourier_by_quadrature(grid, k)).epsilon(1e-10));
  }
}

TEST_CASE("fejer convergence is monotone past the support radius") {
  Eigen::VectorXd vals(3);
  vals << 1.0, -0.6, 0.3;
  const MA a(0, vals);
  const Eigen::Index G = 512;
  double prev_max = std::numeric_limits<double>::infinity();
  double prev_l4 = std::numeric_limits<double>::infinity();
  for (int N = 3; N <= 10; ++N) {
    const auto aN = fejer_truncate(a, N);
    const auto g = transfer_function(a, G);
    const auto gN = transfer_function(aN, G);
    double mx = 0.0, l4 = 0.0;
    for (Eigen::Index m = 0; m < G; ++m) {
      const double d = std::abs(g[m] - gN[m]);
      mx = std::max(mx, d);
      l4 += d * d * d * d;
    }
    l4 *= 2.0 * std::numbers::pi / double(G);
    CHECK(mx < prev_max);
    CHECK(l4 < prev_l4);
    prev_max = mx;
    prev_l4 = l4;
  }
}

TEST_CASE("densities are nonnegative on the grid") {
  RandomStream rng(12, 0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd vals(3);
    for (int i = 0; i < 3; ++i) vals[i] = rng.uniform(-1.0, 1.0);
    const auto f = spectral_density(MA(-1, vals), 0.8);
    CHECK(f.grid(kDefaultGridSize).minCoeff() >= -1e-12);
  }
}

TEST_CASE("torus function representation invariants") {
  Eigen::VectorXd c(3);
  c << 0.7, -0.4, 0.2;
  const auto h = TF::from_cosines(c);

  SUBCASE("grid reconstruction matches an attached grid") {
    const auto with = h.with_grid(256);
    const auto direct = h.grid(256);
    CHECK((with.grid(256) - direct).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  SUBCASE("r_0 equals the grid mean (periodic trapezoid rule)") {
    const auto g = h.grid(512);
    CHECK(g.mean() == doctest::Approx(h.fourier(0)).epsilon(1e-10));
  }

  SUBCASE("evenness detection") {
    CHECK(h.even());
    Eigen::VectorXd asym(3);
    asym << 0.3, 0.0, 0.7;
    CHECK_FALSE(TF::from_fourier(-1, asym).even());
  }

  SUBCASE("grid-only functions refuse resampling at other sizes") {
    const auto g = TF::from_grid(h.grid(128));
    CHECK(g.grid(128).size() == 128);
    CHECK_THROWS_AS(g.grid(256), ValidationError);
  }
}

#include <doctest.h>

#include <cmath>

#include "specmdp/montecarlo.hpp"

using namespace specmdp;
using TF = TorusFunction<double>;
using MA = MACoefficients<double>;

namespace {
ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.law = InnovationLaw::gaussian(1.0);
  cfg.n_ladder = {512};
  cfg.replicates = 3000;
  cfg.master_seed = 90210;
  return cfg;
}
}  // namespace

TEST_CASE("config validation") {
  auto cfg = base_config();
  cfg.b_exponent = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.b_exponent = 0.1;
  cfg.n_ladder = {512, 512};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.n_ladder = {};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("reports are bit-identical across worker counts and reruns") {
  auto cfg = base_config();
  cfg.lags = 1;
  cfg.replicates = 2000;
  cfg.workers = 1;
  const auto a = variance_convergence(cfg);
  cfg.workers = 3;
  const auto b = variance_convergence(cfg);
  cfg.workers = 2;
  const auto c = variance_convergence(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].estimate == b.rows[i].estimate);  // exact, not approx
    CHECK(a.rows[i].estimate == c.rows[i].estimate);
    CHECK(a.rows[i].std_error == b.rows[i].std_error);
  }
}

TEST_CASE("variance convergence experiment") {
  SUBCASE("gaussian iid lag 0 targets 2") {
    auto cfg = base_config();
    cfg.n_ladder = {1024};
    const auto report = variance_convergence(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].analytic_target == doctest::Approx(2.0));
    CHECK(report.rows[0].pass);
    CHECK(report.rows[0].std_error > 0.0);
    CHECK(report.overall_pass);
  }
  SUBCASE("uniform iid targets 0.8") {
    auto cfg = base_config();
    cfg.law = InnovationLaw::uniform_symmetric(1.0);
    const auto report = variance_convergence(cfg);
    CHECK(report.rows[0].analytic_target == doctest::Approx(0.8));
    CHECK(report.rows[0].pass);
  }
  SUBCASE("rademacher is exactly degenerate") {
    auto cfg = base_config();
    cfg.law = InnovationLaw::rademacher(1.0);
    const auto report = variance_convergence(cfg);
    CHECK(report.rows[0].estimate == 0.0);
    CHECK(report.rows[0].analytic_target == doctest::Approx(0.0));
    CHECK(report.rows[0].pass);
  }
}

TEST_CASE("clt check experiment") {
  auto cfg = base_config();
  cfg.replicates = 4000;
  cfg.h = TF::constant(1.0);
  const auto report = clt_check(cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].label == "variance");
  CHECK(report.rows[0].analytic_target == doctest::Approx(2.0));
  CHECK(report.rows[0].pass);
  CHECK(report.rows[1].label == "replicate_kurtosis");
  CHECK(report.rows[1].analytic_target == doctest::Approx(3.0));
  CHECK(report.overall_pass);
}

TEST_CASE("mdp tail trend experiment") {
  SUBCASE("x = 0: the median tail gives log(1/2)/b^2") {
    auto cfg = base_config();
    cfg.n_ladder = {256, 1024};
    cfg.replicates = 20000;
    cfg.threshold_x = 0.0;
    cfg.b_exponent = 0.1;
    const auto report = mdp_tail_trend(cfg);
    for (const auto& row : report.rows) {
      const double b2 = std::pow(double(row.n), 0.2);
      CHECK(row.estimate ==
            doctest::Approx(std::log(0.5) / b2).epsilon(0.08));
      CHECK(row.analytic_target == doctest::Approx(0.0));
    }
  }
  SUBCASE("infeasible thresholds are refused up front") {
    auto cfg = base_config();
    cfg.threshold_x = 50.0;
    cfg.replicates = 1000;
    CHECK_THROWS_AS(mdp_tail_trend(cfg), FeasibilityError);
  }
  SUBCASE("small ladder trend toward -I(1) = -0.25") {
    auto cfg = base_config();
    cfg.n_ladder = {256, 1024};
    cfg.replicates = 20000;
    cfg.threshold_x = 1.0;
    const auto report = mdp_tail_trend(cfg);
    CHECK(report.overall_pass);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].analytic_target == doctest::Approx(-0.25));
    CHECK(report.rows[1].abs_error <= report.rows[0].abs_error + report.rows[0].std_error);
  }
}

TEST_CASE("mgf domination experiment") {
  auto cfg = base_config();
  cfg.n_ladder = {8};
  cfg.replicates = 50000;
  cfg.h = TF::constant(1.0);
  cfg.lambda_grid = {0.0, 0.05, 0.1};
  SUBCASE("gaussian iid: estimates sit on the bound") {
    const auto report = mgf_domination(cfg);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].estimate == doctest::Approx(0.0));
    CHECK(report.rows[0].analytic_target == doctest::Approx(0.0));
    for (const auto& row : report.rows) CHECK(row.pass);
    CHECK(report.overall_pass);
  }
  SUBCASE("rademacher iid: bound dominates strictly") {
    cfg.law = InnovationLaw::rademacher(1.0);
    const auto report = mgf_domination(cfg);
    CHECK(report.overall_pass);
    // rademacher quadratic form is lighter-tailed than the gaussian envelope
    CHECK(report.rows[2].estimate < report.rows[2].analytic_target);
  }
  SUBCASE("lambda at the admissible boundary is rejected") {
    cfg.lambda_grid = {0.5};
    CHECK_THROWS_AS(mgf_domination(cfg), ValidationError);
  }
  SUBCASE("n above the MGF-estimation cap is rejected") {
    cfg.n_ladder = {128};
    cfg.lambda_grid = {0.01};
    CHECK_THROWS_AS(mgf_domination(cfg), ValidationError);
  }
}

TEST_CASE("sigma_F estimation") {
  SUBCASE("identity functional recovers f(0)") {
    auto cfg = base_config();
    cfg.replicates = 4000;
    cfg.functional = FunctionalDescriptor::identity();
    const auto S = sigma_f_estimate(cfg);
    CHECK(S.order() == 1);
    CHECK(S.entry(0, 0) == doctest::Approx(1.0).epsilon(0.12));  // 5 se at R = 4000

    cfg.coeffs = MA::ma1(0.5);
    const auto S2 = sigma_f_estimate(cfg);
    CHECK(S2.entry(0, 0) == doctest::Approx(2.25).epsilon(0.12));
  }
  SUBCASE("product_lags matches the sigma matrix") {
    auto cfg = base_config();
    cfg.replicates = 6000;
    cfg.functional = FunctionalDescriptor::product_lags(1);
    const auto S = sigma_f_estimate(cfg);
    const auto target = sigma_matrix(cfg.density(), 0.0, 1);
    CHECK(S.entry(0, 0) == doctest::Approx(target.entry(0, 0)).epsilon(0.15));
    CHECK(S.entry(1, 1) == doctest::Approx(target.entry(1, 1)).epsilon(0.15));
    CHECK(std::abs(S.entry(0, 1) - target.entry(0, 1)) < 0.15);
  }
}

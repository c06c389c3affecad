#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specmdp/io.hpp"

using namespace specmdp;
namespace fs = std::filesystem;

TEST_CASE("JSON round trips preserve the config digest") {
  ExperimentConfig cfg;
  cfg.coeffs = MACoefficients<double>::ma1(0.5);
  cfg.law = InnovationLaw::scaled_mixture(1.0, 0.4, 0.6);
  cfg.n_ladder = {64, 256};
  cfg.replicates = 100;
  cfg.lags = 2;
  cfg.h = io::parse_torus("2cos");
  cfg.functional = FunctionalDescriptor::product_lags(1);
  cfg.lambda_grid = {0.01, 0.02};
  cfg.master_seed = 12345;

  const auto j = io::to_json(cfg);
  const auto back = io::config_from_json(j);
  CHECK(io::config_digest(cfg) == io::config_digest(back));

  const auto law2 = io::law_from_json(io::to_json(cfg.law));
  CHECK(law2.kappa4() == doctest::Approx(cfg.law.kappa4()).epsilon(1e-15));
  CHECK(law2.subgaussian_K().value() ==
        doctest::Approx(cfg.law.subgaussian_K().value()).epsilon(1e-15));
}

TEST_CASE("torus and coefficient serialization") {
  const auto f = spectral_density(MACoefficients<double>::ma1(0.5), 1.0);
  const auto back = io::torus_from_json(io::to_json(f));
  CHECK(back.fourier(0) == doctest::Approx(1.25));
  CHECK(back.fourier(-1) == doctest::Approx(0.5));

  const auto grid_only = TorusFunction<double>::from_grid(f.grid(64));
  const auto gback = io::torus_from_json(io::to_json(grid_only));
  CHECK(gback.has_grid());
  CHECK_FALSE(gback.has_fourier());

  const auto c = io::coeffs_from_json(io::to_json(MACoefficients<double>::geometric(0.5, 5)));
  CHECK(c.support_hi() == 5);
  CHECK(c.at(3) == doctest::Approx(0.125));
}

TEST_CASE("shortcut parsing") {
  CHECK(io::parse_coeffs("iid").support_hi() == 0);
  CHECK(io::parse_coeffs("ma1:0.5").at(1) == doctest::Approx(0.5));
  CHECK(io::parse_coeffs("geom:0.9").support_hi() == 40);
  CHECK_THROWS_AS(io::parse_coeffs("nope"), ValidationError);

  CHECK(io::parse_torus("1").fourier(0) == 1.0);
  CHECK(io::parse_torus("const:2.5").fourier(0) == 2.5);
  CHECK(io::parse_torus("2cos").fourier(1) == doctest::Approx(1.0));
  CHECK(io::parse_torus("cos").fourier(1) == doctest::Approx(0.5));
  CHECK(io::parse_torus("ma1:0.5").fourier(0) == doctest::Approx(1.25));
  CHECK_THROWS_AS(io::parse_torus("wat"), ValidationError);
}

TEST_CASE("CSV shapes and deterministic formatting") {
  ExperimentReport report;
  report.experiment = "demo";
  report.rows.push_back({64, "x", 1.0 / 3.0, 0.01, 0.3333, 0.0001, true});
  const auto csv = io::csv_of_report(report);
  CHECK(csv.rfind("n,label,estimate,std_error,analytic_target,abs_error,pass\n", 0) == 0);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);

  CHECK(io::fmt(0.1) == "0.10000000000000001");
  CHECK(io::digest_hex("abc") == io::digest_hex("abc"));
  CHECK(io::digest_hex("abc") != io::digest_hex("abd"));
}

TEST_CASE("run writer produces a manifest with matching digests") {
  const fs::path dir = fs::temp_directory_path() / "specmdp_runwriter_test";
  fs::remove_all(dir);
  io::RunWriter run(dir, "demo", io::json{{"k", 1}});
  run.emit("a.csv", "x\n1\n");
  const auto manifest_path = run.finish();
  const auto manifest = io::load_json_file(manifest_path);
  CHECK(manifest.at("command") == "demo");
  CHECK(manifest.at("outputs").at("a.csv") == io::digest_hex("x\n1\n"));
  std::ifstream in(dir / "a.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "x\n1\n");
  fs::remove_all(dir);
}

#if defined(__unix__) || defined(__APPLE__)
namespace {
int run_cli(const std::string& args) {
  const char* cli = std::getenv("SPECMDP_CLI");
  if (!cli) return -1;
  const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST_CASE("CLI exit codes and determinism" * doctest::skip(std::getenv("SPECMDP_CLI") == nullptr)) {
  const fs::path dir = fs::temp_directory_path() / "specmdp_cli_test";
  fs::remove_all(dir);

  CHECK(run_cli("rate --f ma1:0.5 --kappa4 0 --lag 0 --z 1 --out " +
                (dir / "r1").string()) == 0);
  const auto rate = io::load_json_file(dir / "r1" / "rate.json");
  CHECK(rate.at("value").get<double>() == doctest::Approx(0.121212).epsilon(1e-6));
  CHECK(rate.at("branch") == "closed_form");

  CHECK(run_cli("definitely-not-a-subcommand") == 2);
  CHECK(run_cli("rate --f nope:3 --out " + (dir / "r2").string()) == 2);

  // equal configs give byte-identical outputs
  CHECK(run_cli("simulate --coeffs ma1:0.5 --n 128 --seed 4 --out " + (dir / "s1").string()) == 0);
  CHECK(run_cli("simulate --coeffs ma1:0.5 --n 128 --seed 4 --out " + (dir / "s2").string()) == 0);
  const auto m1 = io::load_json_file(dir / "s1" / "manifest.json");
  const auto m2 = io::load_json_file(dir / "s2" / "manifest.json");
  CHECK(m1.at("outputs") == m2.at("outputs"));
  fs::remove_all(dir);
}
#endif

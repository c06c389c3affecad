// Command-line front end: binds JSON configs and spectral shortcuts to the
// library operations and emits CSV/JSON artifacts plus a manifest per run.
//
// Exit codes: 0 success, 2 validation error, 3 verify criterion failed,
// 4 I/O error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "specmdp/acceptance.hpp"
#include "specmdp/io.hpp"
#include "specmdp/montecarlo.hpp"
#include "specmdp/process.hpp"
#include "specmdp/rates.hpp"
#include "specmdp/spectral.hpp"
#include "specmdp/toeplitz.hpp"

namespace {

using specmdp::io::json;

struct CommonOpts {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_dir, "output directory (manifest + artifacts)");
  cmd->add_option("--seed", opts.seed, "master seed override");
  cmd->add_option("--workers", opts.workers,
                  "worker threads (0 = hardware); results do not depend on it");
}

/// SPECMDP_SEED beats --seed beats the config value.
std::uint64_t resolve_seed(const CommonOpts& opts, std::uint64_t config_seed) {
  if (const char* env = std::getenv("SPECMDP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw specmdp::ValidationError("SPECMDP_SEED is not an integer");
    }
  }
  if (opts.seed) return *opts.seed;
  return config_seed;
}

specmdp::InnovationLaw law_from_flags(const std::string& family, double variance) {
  if (family == "gaussian") return specmdp::InnovationLaw::gaussian(variance);
  if (family == "uniform_symmetric" || family == "uniform")
    return specmdp::InnovationLaw::uniform_symmetric(variance);
  if (family == "rademacher") return specmdp::InnovationLaw::rademacher(variance);
  if (family == "scaled_mixture" || family == "mixture")
    return specmdp::InnovationLaw::scaled_mixture(variance);
  throw specmdp::ValidationError("unknown family '" + family + "'");
}

json rate_json(const specmdp::RateEvaluation<double>& eval, const json& inputs) {
  json j;
  if (eval.value.is_finite())
    j["value"] = eval.value.value();
  else
    j["value"] = "inf";
  j["branch"] = specmdp::rate_branch_name(eval.branch);
  j["inputs_digest"] = specmdp::io::digest_hex(inputs.dump());
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moving-average spectral statistics: simulation, Toeplitz "
               "asymptotics, rate functions, Monte Carlo verification"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  std::function<int()> action;

  // ---- simulate ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("simulate", "simulate a moving-average path");
    cmd->set_help_flag("--help", "print help and exit");
    auto opts = std::make_shared<CommonOpts>();
    auto coeffs = std::make_shared<std::string>("iid");
    auto family = std::make_shared<std::string>("gaussian");
    auto variance = std::make_shared<double>(1.0);
    auto n = std::make_shared<Eigen::Index>(1024);
    auto lag_ext = std::make_shared<Eigen::Index>(0);
    cmd->add_option("--coeffs", *coeffs, "iid | ma1:b | geom:rho | @file.json");
    cmd->add_option("--family", *family, "gaussian|uniform_symmetric|rademacher|scaled_mixture");
    cmd->add_option("--variance", *variance, "innovation variance");
    cmd->add_option("--n", *n, "path length");
    cmd->add_option("--lag-ext", *lag_ext, "extra values past n");
    add_common(cmd, *opts);
    cmd->callback([=, &action] {
      action = [=] {
        const auto law = law_from_flags(*family, *variance);
        const auto c = specmdp::io::parse_coeffs(*coeffs);
        const std::uint64_t seed = resolve_seed(*opts, 0x5eed);
        specmdp::RandomStream rng(seed, 0);
        const auto path = specmdp::simulate_path(c, law, *n, *lag_ext, rng);
        json resolved{{"coeffs", specmdp::io::to_json(c)},
                      {"law", specmdp::io::to_json(law)},
                      {"n", *n},
                      {"lag_extension", *lag_ext},
                      {"seed", seed}};
        specmdp::io::RunWriter run(opts->out_dir, "simulate", resolved);
        run.emit("path.csv", specmdp::io::csv_of_column(path.values(), "x"));
        run.finish();
        std::cout << "wrote " << (run.dir() / "path.csv").string() << "\n";
        return 0;
      };
    });
  }

  // ---- spectrum ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("spectrum", "spectral density of a coefficient set");
    cmd->set_help_flag("--help", "print help and exit");
    auto opts = std::make_shared<CommonOpts>();
    auto coeffs = std::make_shared<std::string>("iid");
    auto variance = std::make_shared<double>(1.0);
    auto grid = std::make_shared<Eigen::Index>(specmdp::kDefaultGridSize);
    cmd->add_option("--coeffs", *coeffs, "iid | ma1:b | geom:rho | @file.json");
    cmd->add_option("--variance", *variance, "innovation variance");
    cmd->add_option("--grid", *grid, "grid size");
    add_common(cmd, *opts);
    cmd->callback([=, &action] {
      action = [=] {
        const auto c = specmdp::io::parse_coeffs(*coeffs);
        const auto f = specmdp::spectral_density(c, *variance);
        json resolved{{"coeffs", specmdp::io::to_json(c)},
                      {"variance", *variance},
                      {"grid", *grid}};
        specmdp::io::RunWriter run(opts->out_dir, "spectrum", resolved);
        run.emit("density.csv", specmdp::io::csv_of_grid(f.grid(*grid)));
        run.emit("density_fourier.json", specmdp::io::to_json(f).dump(2) + "\n");
        run.finish();
        std::cout << "r_0(f) = " << specmdp::io::fmt(f.fourier(0)) << "\n";
        return 0;
      };
    });
  }

  // ---- periodogram ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("periodogram", "simulate and evaluate I_n");
    cmd->set_help_flag("--help", "print help and exit");
    auto opts = std::make_shared<CommonOpts>();
    auto coeffs = std::make_shared<std::string>("iid");
    auto family = std::make_shared<std::string>("gaussian");
    auto variance = std::make_shared<double>(1.0);
    auto n = std::make_shared<Eigen::Index>(1024);
    auto grid = std::make_shared<Eigen::Index>(specmdp::kDefaultGridSize);
    cmd->add_option("--coeffs", *coeffs, "iid | ma1:b | geom:rho | @file.json");
    cmd->add_option("--family", *family, "innovation family");
    cmd->add_option("--variance", *variance, "innovation variance");
    cmd->add_option("--n", *n, "path length");
    cmd->add_option("--grid", *grid, "grid size (>= n)");
    add_common(cmd, *opts);
    cmd->callback([=, &action] {
      action = [=] {
        const auto law = law_from_flags(*family, *variance);
        const auto c = specmdp::io::parse_coeffs(*coeffs);
        const std::uint64_t seed = resolve_seed(*opts, 0x5eed);
        specmdp::RandomStream rng(seed, 0);
        const auto path = specmdp::simulate_path(c, law, *n, 0, rng);
        const auto I = specmdp::periodogram(path, *grid);
        json resolved{{"coeffs", specmdp::io::to_json(c)},
                      {"law", specmdp::io::to_json(law)},
                      {"n", *n},
                      {"grid", *grid},
                      {"seed", seed}};
        specmdp::io::RunWriter run(opts->out_dir, "periodogram", resolved);
        run.emit("periodogram.csv", specmdp::io::csv_of_grid(I.grid(*grid)));
        run.finish();
        std::cout << "mean I_n = " << specmdp::io::fmt(I.mean()) << "\n";
        return 0;
      };
    });
  }

  // ---- toeplitz ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("toeplitz", "Toeplitz norms, traces, exports");
    cmd->set_help_flag("--help", "print help and exit");
    cmd->require_subcommand(1);

    {
      auto* sub = cmd->add_subcommand("trace", "(1/n) tr(T_n(f) T_n(h)) and its limit");
      sub->set_help_flag("--help", "print help and exit");
      auto opts = std::make_shared<CommonOpts>();
      auto fspec = std::make_shared<std::string>("1");
      auto hspec = std::make_shared<std::string>("1");
      auto n = std::make_shared<Eigen::Index>(64);
      auto ladder = std::make_shared<std::vector<Eigen::Index>>();
      sub->add_option("--f", *fspec, "generator f");
      sub->add_option("--h", *hspec, "generator h");
      sub->add_option("--n", *n, "matrix order");
      sub->add_option("--ladder", *ladder, "orders for a convergence table")
          ->delimiter(',');
      add_common(sub, *opts);
      sub->callback([=, &action] {
        action = [=] {
          const auto f = specmdp::io::parse_torus(*fspec);
          const auto h = specmdp::io::parse_torus(*hspec);
          const double value = specmdp::trace_product<double>({f, h}, *n);
          const double limit = specmdp::trace_limit<double>({f, h});
          json resolved{{"f", specmdp::io::to_json(f)},
                        {"h", specmdp::io::to_json(h)},
                        {"n", *n},
                        {"ladder", *ladder}};
          specmdp::io::RunWriter run(opts->out_dir, "toeplitz trace", resolved);
          json out{{"value", value}, {"limit", limit}, {"n", *n}};
          run.emit("trace.json", out.dump(2) + "\n");
          if (!ladder->empty()) {
            std::vector<specmdp::io::TraceTableRow> rows;
            for (auto order : *ladder) {
              const double v = specmdp::trace_product<double>({f, h}, order);
              rows.push_back({order, v, limit, std::abs(v - limit)});
            }
            run.emit("trace_table.csv", specmdp::io::csv_of_trace_table(rows));
          }
          run.finish();
          std::cout << out.dump() << "\n";
          return 0;
        };
      });
    }
    {
      auto* sub = cmd->add_subcommand("norm", "operator norm of T_n(h)");
      sub->set_help_flag("--help", "print help and exit");
      auto opts = std::make_shared<CommonOpts>();
      auto hspec = std::make_shared<std::string>("1");
      auto n = std::make_shared<Eigen::Index>(64);
      sub->add_option("--h", *hspec, "generator h");
      sub->add_option("--n", *n, "matrix order");
      add_common(sub, *opts);
      sub->callback([=, &action] {
        action = [=] {
          const auto h = specmdp::io::parse_torus(*hspec);
          const double norm = specmdp::operator_norm(specmdp::build(h, *n));
          json resolved{{"h", specmdp::io::to_json(h)}, {"n", *n}};
          specmdp::io::RunWriter run(opts->out_dir, "toeplitz norm", resolved);
          json out{{"operator_norm", norm}, {"n", *n}};
          run.emit("norm.json", out.dump(2) + "\n");
          run.finish();
          std::cout << out.dump() << "\n";
          return 0;
        };
      });
    }
    {
      auto* sub = cmd->add_subcommand("bound", "n^{1/q} ||h||_q eigenvalue bound");
      sub->set_help_flag("--help", "print help and exit");
      auto opts = std::make_shared<CommonOpts>();
      auto hspec = std::make_shared<std::string>("1");
      auto n = std::make_shared<Eigen::Index>(64);
      auto q = std::make_shared<double>(std::numeric_limits<double>::infinity());
      sub->add_option("--h", *hspec, "generator h");
      sub->add_option("--n", *n, "matrix order");
      sub->add_option("--q", *q, "norm index (>= 1, inf allowed)");
      add_common(sub, *opts);
      sub->callback([=, &action] {
        action = [=] {
          const auto h = specmdp::io::parse_torus(*hspec);
          const double bound = specmdp::norm_bound(h, *q, *n);
          json resolved{{"h", specmdp::io::to_json(h)}, {"n", *n}, {"q", *q}};
          specmdp::io::RunWriter run(opts->out_dir, "toeplitz bound", resolved);
          json out{{"bound", bound}, {"n", *n}};
          run.emit("bound.json", out.dump(2) + "\n");
          run.finish();
          std::cout << out.dump() << "\n";
          return 0;
        };
      });
    }
    {
      auto* sub = cmd->add_subcommand("build", "export T_n(h) as dense CSV");
      sub->set_help_flag("--help", "print help and exit");
      auto opts = std::make_shared<CommonOpts>();
      auto hspec = std::make_shared<std::string>("1");
      auto n = std::make_shared<Eigen::Index>(8);
      sub->add_option("--h", *hspec, "generator h");
      sub->add_option("--n", *n, "matrix order");
      add_common(sub, *opts);
      sub->callback([=, &action] {
        action = [=] {
          const auto h = specmdp::io::parse_torus(*hspec);
          const auto T = specmdp::build(h, *n);
          json resolved{{"h", specmdp::io::to_json(h)}, {"n", *n}};
          specmdp::io::RunWriter run(opts->out_dir, "toeplitz build", resolved);
          run.emit("matrix.csv", specmdp::io::csv_of_matrix(T.dense()));
          run.finish();
          std::cout << "wrote " << (run.dir() / "matrix.csv").string() << "\n";
          return 0;
        };
      });
    }
  }

  // ---- rate ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("rate", "scalar or functional rate evaluation");
    cmd->set_help_flag("--help", "print help and exit");
    auto opts = std::make_shared<CommonOpts>();
    auto fspec = std::make_shared<std::string>("1");
    auto etaspec = std::make_shared<std::string>();
    auto kappa4 = std::make_shared<double>(0.0);
    auto lag = std::make_shared<int>(0);
    auto z = std::make_shared<double>(1.0);
    auto degree = std::make_shared<int>(-1);
    auto sigma_lags = std::make_shared<int>(-1);
    cmd->add_option("--f", *fspec, "spectral density (1, ma1:b, geom:rho, @file)");
    cmd->add_option("--eta", *etaspec, "functional-rate argument; switches to I(eta)");
    cmd->add_option("--kappa4", *kappa4, "excess kurtosis of the innovations");
    cmd->add_option("--lag", *lag, "lag for the scalar rate");
    cmd->add_option("--z", *z, "scalar rate argument");
    cmd->add_option("--variational-degree", *degree,
                    "also evaluate the variational form at this degree");
    cmd->add_option("--sigma-lags", *sigma_lags,
                    "also export the Sigma^2 matrix up to this lag as CSV");
    add_common(cmd, *opts);
    cmd->callback([=, &action] {
      action = [=] {
        const auto f = specmdp::io::parse_torus(*fspec);
        json resolved{{"f", specmdp::io::to_json(f)},
                      {"kappa4", *kappa4},
                      {"lag", *lag},
                      {"z", *z}};
        json out;
        if (etaspec->empty()) {
          const auto eval = specmdp::rate_scalar(*z, f, *kappa4, *lag);
          out = rate_json(eval, resolved);
        } else {
          const auto eta = specmdp::io::parse_torus(*etaspec);
          resolved["eta"] = specmdp::io::to_json(eta);
          const auto eval = specmdp::rate_functional(eta, f, *kappa4);
          out = rate_json(eval, resolved);
          if (*degree >= 0)
            out["variational"] =
                specmdp::rate_functional_variational(eta, f, *kappa4, *degree);
        }
        specmdp::io::RunWriter run(opts->out_dir, "rate", resolved);
        run.emit("rate.json", out.dump(2) + "\n");
        if (*sigma_lags >= 0) {
          const auto S = specmdp::sigma_matrix(f, *kappa4, *sigma_lags);
          run.emit("sigma.csv", specmdp::io::csv_of_matrix(S.matrix()));
        }
        run.finish();
        std::cout << out.dump() << "\n";
        return 0;
      };
    });
  }

  // ---- experiments ----------------------------------------------------------
  // config comes from --config JSON, from flags, or from both (flags win)
  {
    struct ExperimentCmd {
      const char* name;
      const char* help;
      specmdp::ExperimentReport (*fn)(const specmdp::ExperimentConfig&);
    };
    static const ExperimentCmd experiments[] = {
        {"variance", "variance-convergence experiment", &specmdp::variance_convergence},
        {"clt", "CLT variance experiment", &specmdp::clt_check},
        {"tail", "moderate-deviation tail-trend experiment", &specmdp::mdp_tail_trend},
        {"mgf", "MGF domination experiment", &specmdp::mgf_domination},
    };
    for (const auto& exp : experiments) {
      auto* cmd = app.add_subcommand(exp.name, exp.help);
      cmd->set_help_flag("--help", "print help and exit");
      auto opts = std::make_shared<CommonOpts>();
      auto config = std::make_shared<std::string>();
      auto coeffs = std::make_shared<std::string>();
      auto family = std::make_shared<std::string>();
      auto variance = std::make_shared<double>(1.0);
      auto ladder = std::make_shared<std::vector<Eigen::Index>>();
      auto replicates = std::make_shared<Eigen::Index>(0);
      auto lags = std::make_shared<int>(0);
      auto bexp = std::make_shared<double>(0.1);
      auto x = std::make_shared<double>(1.0);
      auto hspec = std::make_shared<std::string>();
      auto lambda = std::make_shared<std::vector<double>>();
      cmd->add_option("--config", *config, "experiment config JSON");
      cmd->add_option("--coeffs", *coeffs, "iid | ma1:b | geom:rho | @file.json");
      cmd->add_option("--family", *family, "innovation family");
      auto* opt_variance = cmd->add_option("--variance", *variance, "innovation variance");
      cmd->add_option("--n-ladder", *ladder, "path lengths")->delimiter(',');
      cmd->add_option("--replicates", *replicates, "replicate count");
      auto* opt_lags = cmd->add_option("--lags", *lags, "lag count m");
      auto* opt_bexp = cmd->add_option("--b-exponent", *bexp, "b_n = n^e, e in (0, 0.5)");
      auto* opt_x = cmd->add_option("--x", *x, "tail threshold");
      cmd->add_option("--h", *hspec, "functional h (1, cos, 2cos, ma1:b, @file)");
      cmd->add_option("--lambda-grid", *lambda, "MGF lambda grid")->delimiter(',');
      add_common(cmd, *opts);
      auto fn = exp.fn;
      auto name = std::string(exp.name);
      cmd->callback([=, &action] {
        action = [=] {
          specmdp::ExperimentConfig cfg;
          if (!config->empty())
            cfg = specmdp::io::config_from_json(specmdp::io::load_json_file(*config));
          if (!coeffs->empty()) cfg.coeffs = specmdp::io::parse_coeffs(*coeffs);
          if (!family->empty() || opt_variance->count() > 0) {
            const std::string fam = family->empty() ? "gaussian" : *family;
            cfg.law = law_from_flags(fam, *variance);
          }
          if (!ladder->empty()) cfg.n_ladder = *ladder;
          if (*replicates > 0) cfg.replicates = *replicates;
          if (opt_lags->count() > 0) cfg.lags = *lags;
          if (opt_bexp->count() > 0) cfg.b_exponent = *bexp;
          if (opt_x->count() > 0) cfg.threshold_x = *x;
          if (!hspec->empty()) cfg.h = specmdp::io::parse_torus(*hspec);
          if (!lambda->empty()) cfg.lambda_grid = *lambda;
          cfg.master_seed = resolve_seed(*opts, cfg.master_seed);
          if (opts->workers > 0) cfg.workers = opts->workers;
          cfg.validate();

          auto report = fn(cfg);
          report.config_digest = specmdp::io::config_digest(cfg);
          specmdp::io::RunWriter run(opts->out_dir, name, specmdp::io::to_json(cfg));
          run.emit("report.csv", specmdp::io::csv_of_report(report));
          run.emit("summary.json", specmdp::io::report_to_json(report).dump(2) + "\n");
          run.finish();
          std::cout << name << ": " << (report.overall_pass ? "pass" : "FAIL") << ", "
                    << report.rows.size() << " rows, digest " << report.config_digest
                    << "\n";
          std::cerr << "wall time " << report.wall_seconds << " s\n";
          return 0;
        };
      });
    }
  }

  // ---- verify ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("verify", "run the acceptance suite");
    cmd->set_help_flag("--help", "print help and exit");
    auto opts = std::make_shared<CommonOpts>();
    auto only = std::make_shared<int>(0);
    cmd->add_option("--only", *only, "run a single criterion (1..11)");
    add_common(cmd, *opts);
    cmd->callback([=, &action] {
      action = [=] {
        const std::uint64_t seed = resolve_seed(*opts, specmdp::acceptance::kDefaultSeed);
        const auto results =
            specmdp::acceptance::run_all(&std::cout, opts->workers, seed, *only);
        json rows = json::array();
        for (const auto& r : results)
          rows.push_back({{"index", r.index},
                          {"name", r.name},
                          {"pass", r.pass},
                          {"detail", r.detail}});
        json resolved{{"seed", seed}, {"only", *only}};
        specmdp::io::RunWriter run(opts->out_dir, "verify", resolved);
        run.emit("acceptance.json", rows.dump(2) + "\n");
        run.finish();
        return specmdp::acceptance::all_pass(results) ? 0 : 3;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action ? action() : 2;
  } catch (const specmdp::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const specmdp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

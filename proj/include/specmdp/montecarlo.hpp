#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "specmdp/errors.hpp"
#include "specmdp/innovations.hpp"
#include "specmdp/process.hpp"
#include "specmdp/rates.hpp"
#include "specmdp/spectral.hpp"
#include "specmdp/toeplitz.hpp"

namespace specmdp {

/// Pass band: within max(std_error_multiple * se, relative * |target|).
struct TolerancePolicy {
  double std_error_multiple = 5.0;
  double relative = 0.05;

  bool pass(double estimate, double std_error, double target) const {
    const double band =
        std::max(std_error_multiple * std_error, relative * std::abs(target));
    return std::abs(estimate - target) <= band;
  }
};

struct ExperimentConfig {
  MACoefficients<double> coeffs = MACoefficients<double>::delta();
  InnovationLaw law = InnovationLaw::gaussian(1.0);
  std::vector<Eigen::Index> n_ladder = {1024};
  Eigen::Index replicates = 1000;
  double b_exponent = 0.1;  // b_n = n^{b_exponent}
  int lags = 0;
  std::optional<TorusFunction<double>> h;
  std::optional<FunctionalDescriptor> functional;
  double threshold_x = 1.0;
  std::vector<double> lambda_grid;
  std::uint64_t master_seed = 0x5eedULL;
  TolerancePolicy tolerance;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const {
    if (!(b_exponent > 0.0 && b_exponent < 0.5))
      throw ValidationError("ExperimentConfig: b_exponent must be in (0, 0.5)");
    if (n_ladder.empty()) throw ValidationError("ExperimentConfig: empty n ladder");
    for (std::size_t i = 0; i < n_ladder.size(); ++i) {
      if (n_ladder[i] < 1) throw ValidationError("ExperimentConfig: n must be >= 1");
      if (i > 0 && n_ladder[i] <= n_ladder[i - 1])
        throw ValidationError("ExperimentConfig: n ladder must be strictly increasing");
    }
    if (replicates < 1) throw ValidationError("ExperimentConfig: replicates >= 1");
    if (lags < 0) throw ValidationError("ExperimentConfig: lags >= 0");
  }

  TorusFunction<double> density() const {
    return spectral_density(coeffs, law.variance());
  }
};

struct ReportRow {
  Eigen::Index n;
  std::string label;
  double estimate;
  double std_error;
  double analytic_target;
  double abs_error;
  bool pass;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::string config_digest;  // filled by the io layer
  double wall_seconds = 0.0;  // console metadata, never serialized
  bool overall_pass = true;
};

namespace detail {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(replicate_index) for every index. Partitioning is dynamic, so each
/// fn must write only into its own replicate slot; reduction happens later in
/// fixed index order, which keeps reports bit-identical across worker counts.
template <typename Fn>
void for_each_replicate(Eigen::Index count, int workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || count < 4) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const Eigen::Index chunk = std::max<Eigen::Index>(1, count / (workers * 16));
  auto body = [&] {
    try {
      for (;;) {
        const Eigen::Index begin = next.fetch_add(chunk);
        if (begin >= count) return;
        const Eigen::Index end = std::min(count, begin + chunk);
        for (Eigen::Index i = begin; i < end; ++i) fn(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct SampleStats {
  Eigen::Index count = 0;
  double mean = 0.0;
  double var = 0.0;      // unbiased
  double central4 = 0.0; // central fourth moment (biased, 1/R)
  double se_mean = 0.0;
};

inline SampleStats summarize(const Eigen::VectorXd& v) {
  SampleStats s;
  s.count = v.size();
  if (s.count == 0) return s;
  s.mean = v.sum() / double(s.count);
  if (s.count < 2) return s;
  double m2 = 0.0, m4 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double d = v[i] - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  s.var = m2 / double(s.count - 1);
  s.central4 = m4 / double(s.count);
  s.se_mean = std::sqrt(s.var / double(s.count));
  return s;
}

/// se of the unbiased sample variance via the asymptotic formula
/// sqrt((m4 - var^2) / R).
inline double variance_std_error(const SampleStats& s) {
  const double v = std::max(s.central4 - s.var * s.var, 0.0);
  return std::sqrt(v / double(s.count));
}

inline double normal_upper_tail(double t) { return 0.5 * std::erfc(t / std::sqrt(2.0)); }

inline std::uint64_t stream_id(std::size_t rung, Eigen::Index replicate) {
  return (static_cast<std::uint64_t>(rung) << 40) |
         static_cast<std::uint64_t>(replicate);
}

}  // namespace detail

/// Empirical covariance of n^{-1/2} sum (X_k X_{k+l} - r_l(f)), l = 0..m,
/// against the analytic Sigma^2 matrix. Pass/fail is decided at the largest
/// ladder n.
inline ExperimentReport variance_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int m = cfg.lags;
  const auto f = cfg.density();
  const auto target = sigma_matrix(f, cfg.law.kappa4(), m);
  Eigen::VectorXd expected(m + 1);
  for (int l = 0; l <= m; ++l) expected[l] = f.fourier(l);

  ExperimentReport report;
  report.experiment = "variance_convergence";
  const Eigen::Index R = cfg.replicates;
  for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
    const Eigen::Index n = cfg.n_ladder[rung];
    Eigen::MatrixXd Y(R, m + 1);
    detail::for_each_replicate(R, cfg.workers, [&](Eigen::Index rep) {
      RandomStream rng(cfg.master_seed, detail::stream_id(rung, rep));
      const SamplePath path = simulate_path(cfg.coeffs, cfg.law, n, m, rng);
      const Eigen::VectorXd s = autocorrelation_sums(path, m);
      for (int l = 0; l <= m; ++l)
        Y(rep, l) = (s[l] - double(n) * expected[l]) / std::sqrt(double(n));
    });
    Eigen::VectorXd ymean = Eigen::VectorXd::Zero(m + 1);
    for (Eigen::Index r = 0; r < R; ++r) ymean += Y.row(r).transpose();
    ymean /= double(R);
    const bool last = (rung + 1 == cfg.n_ladder.size());
    for (int k = 0; k <= m; ++k) {
      for (int l = k; l <= m; ++l) {
        double cov = 0.0, prod_m2 = 0.0;
        // products in fixed replicate order; second pass for their spread
        Eigen::VectorXd prods(R);
        for (Eigen::Index r = 0; r < R; ++r) {
          prods[r] = (Y(r, k) - ymean[k]) * (Y(r, l) - ymean[l]);
          cov += prods[r];
        }
        const double pmean = cov / double(R);
        cov = (R > 1) ? cov / double(R - 1) : 0.0;
        for (Eigen::Index r = 0; r < R; ++r) {
          const double d = prods[r] - pmean;
          prod_m2 += d * d;
        }
        const double se = (R > 1) ? std::sqrt(prod_m2 / double(R - 1) / double(R)) : 0.0;
        ReportRow row;
        row.n = n;
        row.label = "Sigma[" + std::to_string(k) + "][" + std::to_string(l) + "]";
        row.estimate = cov;
        row.std_error = se;
        row.analytic_target = target.entry(k, l);
        row.abs_error = std::abs(cov - row.analytic_target);
        row.pass = cfg.tolerance.pass(cov, se, row.analytic_target);
        if (last && !row.pass) report.overall_pass = false;
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Var( sqrt(n) (I_n(h) - E I_n(h)) ) against clt_variance, with the exact
/// E I_n(h); also reports the standardized fourth moment of the replicate
/// sample as a normality diagnostic.
inline ExperimentReport clt_check(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.h) throw ValidationError("clt_check: functional h required");
  if (!cfg.h->even()) throw ValidationError("clt_check: h must be even");
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = cfg.density();
  const double kappa4 = cfg.law.kappa4();
  const double target = clt_variance(f, *cfg.h, kappa4);

  ExperimentReport report;
  report.experiment = "clt_check";
  const Eigen::Index R = cfg.replicates;
  for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
    const Eigen::Index n = cfg.n_ladder[rung];
    const double expected_In = expected_periodogram_functional(f, *cfg.h, n);
    Eigen::VectorXd v(R);
    detail::for_each_replicate(R, cfg.workers, [&](Eigen::Index rep) {
      RandomStream rng(cfg.master_seed, detail::stream_id(rung, rep));
      const SamplePath path = simulate_path(cfg.coeffs, cfg.law, n, 0, rng);
      const double In_h = detail::toeplitz_quadratic_form(path, *cfg.h);
      v[rep] = std::sqrt(double(n)) * (In_h - expected_In);
    });
    const auto stats = detail::summarize(v);
    const double se = detail::variance_std_error(stats);
    const bool last = (rung + 1 == cfg.n_ladder.size());

    ReportRow row{n,
                  "variance",
                  stats.var,
                  se,
                  target,
                  std::abs(stats.var - target),
                  cfg.tolerance.pass(stats.var, se, target)};
    if (last && !row.pass) report.overall_pass = false;
    report.rows.push_back(std::move(row));

    const double kurt = stats.central4 / (stats.var * stats.var);
    const double se_kurt = std::sqrt(24.0 / double(R));
    ReportRow diag{n,
                   "replicate_kurtosis",
                   kurt,
                   se_kurt,
                   3.0,
                   std::abs(kurt - 3.0),
                   cfg.tolerance.pass(kurt, se_kurt, 3.0)};
    if (last && !diag.pass) report.overall_pass = false;
    report.rows.push_back(std::move(diag));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Finite-n diagnostic of the tail decay
/// L(n) = (1/b_n^2) log P(Q_n >= x) -> -I^l(x): the deviation |L(n) + I^l(x)|
/// must be nonincreasing along the ladder (one inversion within one combined
/// std error allowed). Feasibility is pre-checked with the Gaussian proxy
/// P ~ Phi_bar(b_n x / Sigma).
inline ExperimentReport mdp_tail_trend(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int l = cfg.lags;
  const double x = cfg.threshold_x;
  const auto f = cfg.density();
  const double kappa4 = cfg.law.kappa4();
  const TorusFunction<double> f2 = multiply(f, f);
  const double D =
      f2.fourier(0) + f2.fourier(2 * l) + kappa4 * f.fourier(l) * f.fourier(l);

  const Eigen::Index R = cfg.replicates;
  {
    const Eigen::Index n_max = cfg.n_ladder.back();
    const double b = std::pow(double(n_max), cfg.b_exponent);
    const double proxy =
        D > 0.0 ? detail::normal_upper_tail(b * x / std::sqrt(D)) : 0.0;
    if (proxy * double(R) < 10.0)
      throw FeasibilityError(
          "mdp_tail_trend: Gaussian proxy predicts fewer than 10 tail hits at "
          "the largest n; lower b_exponent or x, or raise replicates");
  }

  const auto rate = rate_scalar(x, f, kappa4, l);
  const double target = -rate.value.as_scalar();  // -I^l(x)
  const double expected_rl = f.fourier(l);

  ExperimentReport report;
  report.experiment = "mdp_tail_trend";
  std::vector<double> devs, dev_ses;
  for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
    const Eigen::Index n = cfg.n_ladder[rung];
    const double b = std::pow(double(n), cfg.b_exponent);
    Eigen::VectorXd q(R);
    detail::for_each_replicate(R, cfg.workers, [&](Eigen::Index rep) {
      RandomStream rng(cfg.master_seed, detail::stream_id(rung, rep));
      const SamplePath path = simulate_path(cfg.coeffs, cfg.law, n, l, rng);
      const Eigen::VectorXd s = autocorrelation_sums(path, l);
      q[rep] = (s[l] - double(n) * expected_rl) / (b * std::sqrt(double(n)));
    });
    Eigen::Index hits = 0;
    for (Eigen::Index r = 0; r < R; ++r)
      if (q[r] >= x) ++hits;
    if (hits == 0)
      throw FeasibilityError("mdp_tail_trend: zero tail hits at n=" +
                             std::to_string(n));
    const double p = double(hits) / double(R);
    const double Lhat = std::log(p) / (b * b);
    const double se_p = std::sqrt(p * (1.0 - p) / double(R));
    const double se_L = se_p / (p * b * b);
    ReportRow row{n, "tail_log_rate", Lhat, se_L, target, std::abs(Lhat - target),
                  true};
    devs.push_back(row.abs_error);
    dev_ses.push_back(se_L);
    report.rows.push_back(std::move(row));
  }
  // trend verdict: deviations nonincreasing, one soft inversion allowed
  int inversions = 0;
  bool hard_fail = false;
  for (std::size_t i = 1; i < devs.size(); ++i) {
    if (devs[i] > devs[i - 1]) {
      const double slack = std::hypot(dev_ses[i], dev_ses[i - 1]);
      if (devs[i] - devs[i - 1] <= slack)
        ++inversions;
      else
        hard_fail = true;
    }
  }
  report.overall_pass = !hard_fail && inversions <= 1;
  if (!report.overall_pass)
    for (auto& row : report.rows) row.pass = false;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Empirical log E exp(lambda <X, T_n(h) X>) against the analytic bound, for
/// every lambda on the grid. Pass requires bound >= estimate - 3 std errors.
inline ExperimentReport mgf_domination(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.h) throw ValidationError("mgf_domination: generator h required");
  if (cfg.lambda_grid.empty())
    throw ValidationError("mgf_domination: lambda grid required");
  const Eigen::Index n = cfg.n_ladder.back();
  if (n > 64)
    throw ValidationError("mgf_domination: n must be <= 64 for MGF estimation");
  const auto t0 = std::chrono::steady_clock::now();

  const auto f = cfg.density();
  const ToeplitzOperator<double> B(*cfg.h, n);
  const double K = subgaussian_constant(cfg.law);

  std::vector<double> bounds;
  for (double lambda : cfg.lambda_grid) {
    const auto bound = quadratic_mgf_bound(B, f, lambda, K);
    if (bound.is_infinite())
      throw ValidationError("mgf_domination: lambda outside the admissible region");
    bounds.push_back(bound.value());
  }

  const Eigen::Index R = cfg.replicates;
  Eigen::VectorXd u(R);
  detail::for_each_replicate(R, cfg.workers, [&](Eigen::Index rep) {
    RandomStream rng(cfg.master_seed, detail::stream_id(0, rep));
    const SamplePath path = simulate_path(cfg.coeffs, cfg.law, n, 0, rng);
    u[rep] = B.quadratic_form(path.values());
  });

  ExperimentReport report;
  report.experiment = "mgf_domination";
  for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
    const double lambda = cfg.lambda_grid[i];
    Eigen::VectorXd w(R);
    for (Eigen::Index r = 0; r < R; ++r) w[r] = std::exp(lambda * u[r]);
    const auto stats = detail::summarize(w);
    const double rel_se = stats.se_mean / stats.mean;
    if (rel_se > 0.2)
      throw FeasibilityError(
          "mgf_domination: relative MC error above 20% at lambda=" +
          std::to_string(lambda));
    const double est = std::log(stats.mean);
    const double se_log = rel_se;  // delta method
    ReportRow row;
    row.n = n;
    row.label = "lambda=" + std::to_string(lambda);
    row.estimate = est;
    row.std_error = se_log;
    row.analytic_target = bounds[i];
    row.abs_error = std::abs(est - bounds[i]);
    row.pass = bounds[i] >= est - 3.0 * se_log;
    if (!row.pass) report.overall_pass = false;
    report.rows.push_back(std::move(row));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Empirical (1/n) covariance of sum_k F(X_k..X_{k+l}) at the largest ladder
/// n; the limit Sigma_F^2 for catalog functionals.
inline CovarianceMatrix<double> sigma_f_estimate(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.functional) throw ValidationError("sigma_f_estimate: functional required");
  const FunctionalDescriptor& F = *cfg.functional;
  const Eigen::Index n = cfg.n_ladder.back();
  const Eigen::Index R = cfg.replicates;
  if (R < 2) throw ValidationError("sigma_f_estimate: needs replicates >= 2");

  Eigen::MatrixXd S(R, F.output_dim());
  detail::for_each_replicate(R, cfg.workers, [&](Eigen::Index rep) {
    RandomStream rng(cfg.master_seed, detail::stream_id(0, rep));
    const SamplePath path = simulate_path(cfg.coeffs, cfg.law, n, F.lags(), rng);
    S.row(rep) = nonlinear_functional_sum(path, F).transpose();
  });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(F.output_dim());
  for (Eigen::Index r = 0; r < R; ++r) mean += S.row(r).transpose();
  mean /= double(R);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(F.output_dim(), F.output_dim());
  for (Eigen::Index r = 0; r < R; ++r) {
    const Eigen::VectorXd d = S.row(r).transpose() - mean;
    C += d * d.transpose();
  }
  C /= double(R - 1) * double(n);
  return CovarianceMatrix<double>(std::move(C));
}

}  // namespace specmdp

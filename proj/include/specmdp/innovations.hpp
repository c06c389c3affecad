#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "specmdp/errors.hpp"
#include "specmdp/random.hpp"

namespace specmdp {

enum class Family { gaussian, uniform_symmetric, rademacher, scaled_mixture };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::uniform_symmetric: return "uniform_symmetric";
    case Family::rademacher: return "rademacher";
    case Family::scaled_mixture: return "scaled_mixture";
  }
  return "?";
}

/// Centered innovation law: moments, sub-Gaussian constant, sampler.
///
/// Four built-in families cover kappa4 = 0 (gaussian), kappa4 < 0 (uniform),
/// the degenerate kappa4 = -2 (rademacher) and kappa4 > 0 (two-component
/// gaussian scale mixture). Values are immutable after construction and safe
/// to share across workers.
class InnovationLaw {
 public:
  static InnovationLaw gaussian(double variance = 1.0) {
    InnovationLaw law(Family::gaussian, variance);
    law.fourth_moment_ = 3.0 * variance * variance;
    law.subgaussian_K_ = std::sqrt(variance);
    law.lsi_constant_ = variance;           // Gross constant for N(0, sigma^2)
    law.integ_delta_ = 0.25 / variance;
    return law;
  }

  /// Uniform on [-a, a] with a = sqrt(3 variance).
  static InnovationLaw uniform_symmetric(double variance = 1.0) {
    InnovationLaw law(Family::uniform_symmetric, variance);
    law.fourth_moment_ = 9.0 * variance * variance / 5.0;  // a^4/5
    // sinh(ay)/(ay) <= exp(a^2 y^2 / 6) and a^2/3 = variance, so K = sigma
    // is valid for all y; it is minimal because log MGF ~ sigma^2 y^2/2 at 0.
    law.subgaussian_K_ = std::sqrt(variance);
    law.integ_delta_ = 1.0;  // bounded support
    return law;
  }

  /// +-sigma with equal probability.
  static InnovationLaw rademacher(double variance = 1.0) {
    InnovationLaw law(Family::rademacher, variance);
    law.fourth_moment_ = variance * variance;
    law.subgaussian_K_ = std::sqrt(variance);  // cosh(t) <= exp(t^2/2)
    law.integ_delta_ = 1.0;
    // no smooth-gradient LSI for a two-point law: lsi_constant stays absent
    return law;
  }

  /// Mixture w N(0, s1^2) + (1-w) N(0, s2^2) with total variance `variance`;
  /// s1^2 = spread * variance, s2^2 chosen to match the total. Produces
  /// kappa4 > 0 whenever spread != 1.
  static InnovationLaw scaled_mixture(double variance = 1.0,
                                      double weight = 0.5,
                                      double spread = 0.5) {
    if (!(weight > 0.0 && weight < 1.0))
      throw ValidationError("scaled_mixture: weight must be in (0,1)");
    if (!(spread > 0.0 && weight * spread < 1.0))
      throw ValidationError("scaled_mixture: spread out of range");
    InnovationLaw law(Family::scaled_mixture, variance);
    law.mix_weight_ = weight;
    law.mix_var1_ = spread * variance;
    law.mix_var2_ = variance * (1.0 - weight * spread) / (1.0 - weight);
    law.fourth_moment_ = 3.0 * (weight * law.mix_var1_ * law.mix_var1_ +
                                (1.0 - weight) * law.mix_var2_ * law.mix_var2_);
    const double smax2 = std::max(law.mix_var1_, law.mix_var2_);
    law.subgaussian_K_ = std::sqrt(smax2);
    law.integ_delta_ = 0.25 / smax2;
    return law;
  }

  /// Custom law with possibly missing moments; used for error-path tests.
  static InnovationLaw custom(Family family, double variance,
                              std::optional<double> fourth_moment) {
    InnovationLaw law(family, variance);
    law.fourth_moment_ = fourth_moment;
    return law;
  }

  Family family() const { return family_; }
  double variance() const { return variance_; }

  bool has_fourth_moment() const { return fourth_moment_.has_value(); }
  double fourth_moment() const {
    if (!fourth_moment_)
      throw UndefinedMomentError("InnovationLaw: fourth moment not recorded");
    return *fourth_moment_;
  }

  /// kappa4 = (E xi^4 - 3 (E xi^2)^2) / (E xi^2)^2.
  double kappa4() const {
    const double v = variance_;
    return (fourth_moment() - 3.0 * v * v) / (v * v);
  }

  std::optional<double> subgaussian_K() const { return subgaussian_K_; }
  std::optional<double> lsi_constant() const { return lsi_constant_; }
  std::optional<double> integ_delta() const { return integ_delta_; }

  double mixture_weight() const { return mix_weight_; }
  double mixture_var1() const { return mix_var1_; }
  double mixture_var2() const { return mix_var2_; }

  double draw(RandomStream& rng) const {
    switch (family_) {
      case Family::gaussian:
        return std::sqrt(variance_) * rng.normal();
      case Family::uniform_symmetric: {
        const double a = std::sqrt(3.0 * variance_);
        return rng.uniform(-a, a);
      }
      case Family::rademacher:
        return rng.uniform01() < 0.5 ? -std::sqrt(variance_)
                                     : std::sqrt(variance_);
      case Family::scaled_mixture: {
        const double v = rng.uniform01() < mix_weight_ ? mix_var1_ : mix_var2_;
        return std::sqrt(v) * rng.normal();
      }
    }
    throw ValidationError("InnovationLaw: unknown family");
  }

  /// Exact log E exp(y xi).
  double log_mgf(double y) const {
    switch (family_) {
      case Family::gaussian:
        return 0.5 * variance_ * y * y;
      case Family::uniform_symmetric: {
        const double t = std::sqrt(3.0 * variance_) * y;
        if (std::abs(t) < 1e-8) return t * t / 6.0 - t * t * t * t / 180.0;
        // log(sinh t / t), stable for large |t|
        const double at = std::abs(t);
        return at + std::log1p(-std::exp(-2.0 * at)) - std::log(2.0 * at);
      }
      case Family::rademacher: {
        const double t = std::abs(std::sqrt(variance_) * y);
        return t + std::log1p(std::exp(-2.0 * t)) - std::log(2.0);
      }
      case Family::scaled_mixture: {
        const double t1 = 0.5 * mix_var1_ * y * y;
        const double t2 = 0.5 * mix_var2_ * y * y;
        const double m = std::max(t1, t2);
        return m + std::log(mix_weight_ * std::exp(t1 - m) +
                            (1.0 - mix_weight_) * std::exp(t2 - m));
      }
    }
    throw ValidationError("InnovationLaw: unknown family");
  }

 private:
  InnovationLaw(Family family, double variance)
      : family_(family), variance_(variance) {
    if (!(variance > 0.0))
      throw ValidationError("InnovationLaw: variance must be positive");
  }

  Family family_;
  double variance_;
  std::optional<double> fourth_moment_;
  std::optional<double> subgaussian_K_;
  std::optional<double> lsi_constant_;
  std::optional<double> integ_delta_;
  double mix_weight_ = 0.0, mix_var1_ = 0.0, mix_var2_ = 0.0;
};

inline double excess_kurtosis(const InnovationLaw& law) { return law.kappa4(); }

inline Eigen::VectorXd sample(const InnovationLaw& law, Eigen::Index count,
                              RandomStream& rng) {
  if (count < 1) throw ValidationError("sample: count must be >= 1");
  Eigen::VectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = law.draw(rng);
  return out;
}

namespace detail {
// Fixed verification grid for the sub-Gaussian bound: 200 log-spaced points.
inline Eigen::VectorXd mgf_verification_grid() {
  constexpr int points = 200;
  const double lo = std::log(1e-3), hi = std::log(20.0);
  Eigen::VectorXd g(points);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  return g;
}
}  // namespace detail

/// Constant K with E exp(y xi) <= exp(K^2 y^2 / 2) for all y, checked on the
/// verification grid before being returned.
inline double subgaussian_constant(const InnovationLaw& law) {
  const auto K = law.subgaussian_K();
  if (!K || !law.integ_delta())
    throw UndefinedMomentError(
        "subgaussian_constant: no square-exponential integrability recorded "
        "for this family");
  const Eigen::VectorXd grid = detail::mgf_verification_grid();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    const double bound = 0.5 * (*K) * (*K) * y * y;
    if (law.log_mgf(y) > bound + 1e-12)
      throw ConsistencyError("subgaussian_constant: grid check failed at y=" +
                             std::to_string(y));
  }
  return *K;
}

}  // namespace specmdp

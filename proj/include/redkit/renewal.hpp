#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "redkit/difficulty.hpp"

namespace redkit {

/// Horizon above which the O(t^2) recurrence is refused.
inline constexpr std::size_t kMaxRenewalHorizon = 100'000;

/// Expected unique questions answered after t = 0..t_max attempts.
struct CoveragePrediction {
    std::vector<double> mean;
    std::vector<double> second_moment;  ///< empty unless requested

    std::size_t t_max() const noexcept { return mean.empty() ? 0 : mean.size() - 1; }
    bool has_second_moment() const noexcept { return !second_moment.empty(); }
    /// sqrt(max(m2 - m1^2, 0)); requires the second moment.
    double std_dev(std::size_t t) const;
};

/// Deterministic resetting interval; std::nullopt means never reset.
struct ResetSchedule {
    std::optional<std::size_t> tau;

    static ResetSchedule none() { return {}; }
    static ResetSchedule every(std::size_t tau);
};

enum class KernelChoice { Serial, Parallel };

struct RenewalOptions {
    bool with_second_moment = false;
    KernelChoice kernel = KernelChoice::Parallel;
    int workers = 0;
};

/// Solve-to-completion coverage from F = pass@t via the renewal recurrence.
CoveragePrediction renewal_coverage(const PassCurve& curve, std::size_t t_max, const RenewalOptions& opts = {});

/// CDF of the attempts-to-solve under resetting every tau attempts:
/// F_tau(t) = 1 - (1 - F(tau))^n (1 - F(u)), n = floor(t / tau), u = t - n tau.
double cdf_with_reset(const PassCurve& curve, std::size_t tau, std::size_t t);

/// F_tau(0..t_max) as a curve.
PassCurve reset_curve(const PassCurve& curve, std::size_t tau, std::size_t t_max);

/// Infinite-pool coverage under ReD with interval tau.
CoveragePrediction coverage_with_reset(const PassCurve& curve, std::size_t tau, std::size_t t_max,
                                       const RenewalOptions& opts = {});

/// Dispatch on a schedule: no reset uses renewal_coverage.
CoveragePrediction predict_coverage(const PassCurve& curve, const ResetSchedule& schedule, std::size_t t_max,
                                    const RenewalOptions& opts = {});

/// G(tau) = sum_{k<tau} (1 - F(k)).
double partial_survival_sum(const PassCurve& curve, std::size_t tau);

/// E[T_tau] = G(tau) / F(tau). Throws NumericError when F(tau) = 0.
double mean_attempts_with_reset(const PassCurve& curve, std::size_t tau);

struct AsymptoticCoverage {
    double mean;
    double second_moment;
    double std_over_mean;
};

/*!
 * Long-budget coverage for a survival tail 1 - pass@k ~ c Gamma(alpha) k^-alpha.
 *
 * \c tail_coefficient is the small-p density coefficient c of
 * P(p) ~ c p^(alpha-1), as returned by tail_exponent_and_coefficient().
 * For 0 < alpha < 1:
 *   m1 ~ t^alpha / (C Gamma(1+alpha)),  m2 ~ 2 t^(2 alpha) / (C^2 Gamma(1+2 alpha)),
 * with C = c Gamma(alpha) Gamma(1-alpha) the coefficient of (1-z)^alpha in
 * 1 - f(z). For alpha > 1, m1 ~ t / E[T] and the std/mean ratio vanishes.
 * alpha == 1 is rejected.
 */
AsymptoticCoverage asymptotic_coverage(double alpha, double tail_coefficient, double t,
                                       std::optional<double> mean_attempts = std::nullopt);

/// sqrt(2 Gamma(1+alpha)^2 / Gamma(1+2 alpha) - 1), the limiting std/mean for 0 < alpha < 1;
/// 0 for alpha >= 1.
double std_over_mean_constant(double alpha);

struct FinitePoolRound {
    std::size_t round;
    double mean_attempts;
    double mean_coverage;
    double mean_remainder;
};

/// Mean-field ReD(tau = 1) prediction on a pool of N questions for rounds 1..n_rounds:
/// <t(n)> = N sum_{k<n} (1 - F(k)), coverage = N F(n), remainder = N (1 - F(n)).
std::vector<FinitePoolRound> finite_pool_red_prediction(const PassCurve& curve, std::size_t pool_size,
                                                        std::size_t n_rounds);

}  // namespace redkit

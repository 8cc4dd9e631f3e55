#include "redkit/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "redkit/error.hpp"
#include "redkit/kernels.hpp"

namespace redkit {

double CoveragePrediction::std_dev(std::size_t t) const
{
    if (!has_second_moment()) throw ValidationError("prediction was computed without the second moment");
    const double var = second_moment.at(t) - mean.at(t) * mean.at(t);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

ResetSchedule ResetSchedule::every(std::size_t tau)
{
    if (tau < 1) throw ValidationError("resetting interval tau must be >= 1");
    return ResetSchedule{tau};
}

namespace {

void check_horizon(const PassCurve& curve, std::size_t t_max)
{
    if (t_max > kMaxRenewalHorizon) {
        throw ValidationError(fmt::format(
            "horizon t_max = {} exceeds the supported {} for the exact recurrence; use asymptotic_coverage instead",
            t_max, kMaxRenewalHorizon));
    }
    if (t_max > curve.max_index()) {
        throw ValidationError(
            fmt::format("horizon t_max = {} exceeds the pass curve length K = {}", t_max, curve.max_index()));
    }
}

void check_tau(std::size_t tau)
{
    if (tau < 1) throw ValidationError("resetting interval tau must be >= 1");
}

}  // namespace

CoveragePrediction renewal_coverage(const PassCurve& curve, std::size_t t_max, const RenewalOptions& opts)
{
    check_horizon(curve, t_max);
    const auto cdf = curve.values().first(t_max + 1);

    CoveragePrediction out;
    out.mean.assign(t_max + 1, 0.0);
    if (opts.with_second_moment) out.second_moment.assign(t_max + 1, 0.0);

    if (opts.kernel == KernelChoice::Serial) {
        kernels::renewal_moments_serial(cdf, out.mean, out.second_moment);
    } else {
        kernels::renewal_moments_parallel(cdf, out.mean, out.second_moment, opts.workers);
    }
    return out;
}

double cdf_with_reset(const PassCurve& curve, std::size_t tau, std::size_t t)
{
    check_tau(tau);
    if (t == 0) return 0.0;
    const std::size_t n = t / tau;
    const std::size_t u = t - n * tau;
    const double stay = n == 0 ? 1.0 : std::pow(1.0 - curve.at(tau), static_cast<double>(n));
    return 1.0 - stay * (1.0 - curve.at(u));
}

PassCurve reset_curve(const PassCurve& curve, std::size_t tau, std::size_t t_max)
{
    check_tau(tau);
    if (std::min(tau, t_max) > curve.max_index()) {
        throw ValidationError(fmt::format("resetting interval {} needs pass@k up to k = {}, curve has K = {}", tau,
                                          std::min(tau, t_max), curve.max_index()));
    }
    std::vector<double> values(t_max + 1);
    for (std::size_t t = 0; t <= t_max; ++t) values[t] = cdf_with_reset(curve, tau, t);
    return PassCurve(std::move(values));
}

CoveragePrediction coverage_with_reset(const PassCurve& curve, std::size_t tau, std::size_t t_max,
                                       const RenewalOptions& opts)
{
    if (t_max > kMaxRenewalHorizon) check_horizon(curve, t_max);
    return renewal_coverage(reset_curve(curve, tau, t_max), t_max, opts);
}

CoveragePrediction predict_coverage(const PassCurve& curve, const ResetSchedule& schedule, std::size_t t_max,
                                    const RenewalOptions& opts)
{
    if (schedule.tau) return coverage_with_reset(curve, *schedule.tau, t_max, opts);
    return renewal_coverage(curve, t_max, opts);
}

double partial_survival_sum(const PassCurve& curve, std::size_t tau)
{
    if (tau > curve.size()) {
        throw ValidationError(fmt::format("G({}) needs pass@k up to k = {}, curve has K = {}", tau, tau - 1,
                                          curve.max_index()));
    }
    double g = 0.0;
    for (std::size_t k = 0; k < tau; ++k) g += 1.0 - curve[k];
    return g;
}

double mean_attempts_with_reset(const PassCurve& curve, std::size_t tau)
{
    check_tau(tau);
    const double f = curve.at(tau);
    if (!(f > 0.0)) {
        throw NumericError(fmt::format("no success mass within interval tau = {} (F(tau) = 0)", tau));
    }
    return partial_survival_sum(curve, tau) / f;
}

double std_over_mean_constant(double alpha)
{
    if (!(alpha > 0.0)) throw ValidationError(fmt::format("alpha must be positive, got {}", alpha));
    // The formula reaches 0 at alpha = 1 and the ratio stays 0 beyond.
    if (alpha >= 1.0) return 0.0;
    const double g1 = std::tgamma(1.0 + alpha);
    const double v = 2.0 * g1 * g1 / std::tgamma(1.0 + 2.0 * alpha) - 1.0;
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

AsymptoticCoverage asymptotic_coverage(double alpha, double tail_coefficient, double t,
                                       std::optional<double> mean_attempts)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError(fmt::format("tail exponent must be positive, got {}", alpha));
    }
    if (!(t >= 0.0)) throw ValidationError("budget t must be non-negative");
    if (alpha == 1.0) throw NumericError("alpha = 1 is the marginal case, no closed form provided");

    if (alpha > 1.0) {
        if (!mean_attempts || !(*mean_attempts > 0.0)) {
            throw ValidationError("alpha > 1 needs the finite mean attempts E[T]");
        }
        const double m1 = t / *mean_attempts;
        return {m1, m1 * m1, 0.0};
    }

    if (!(tail_coefficient > 0.0)) throw ValidationError("tail coefficient must be positive");
    // Gamma(alpha) Gamma(1 - alpha) = pi / sin(pi alpha)
    const double z_coeff = tail_coefficient * std::numbers::pi / std::sin(std::numbers::pi * alpha);
    const double m1 = std::pow(t, alpha) / (z_coeff * std::tgamma(1.0 + alpha));
    const double m2 = 2.0 * std::pow(t, 2.0 * alpha) / (z_coeff * z_coeff * std::tgamma(1.0 + 2.0 * alpha));
    return {m1, m2, std_over_mean_constant(alpha)};
}

std::vector<FinitePoolRound> finite_pool_red_prediction(const PassCurve& curve, std::size_t pool_size,
                                                        std::size_t n_rounds)
{
    if (pool_size < 1) throw ValidationError("pool size N must be >= 1");
    if (n_rounds > curve.max_index()) {
        throw ValidationError(
            fmt::format("{} rounds need pass@k up to k = {}, curve has K = {}", n_rounds, n_rounds, curve.max_index()));
    }
    const double n_pool = static_cast<double>(pool_size);
    std::vector<FinitePoolRound> rows;
    rows.reserve(n_rounds);
    double survival_sum = 0.0;
    for (std::size_t n = 1; n <= n_rounds; ++n) {
        survival_sum += 1.0 - curve[n - 1];
        rows.push_back({n, n_pool * survival_sum, n_pool * curve[n], n_pool * (1.0 - curve[n])});
    }
    return rows;
}

}  // namespace redkit

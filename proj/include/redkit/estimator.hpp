#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "redkit/difficulty.hpp"

namespace redkit {

/// Mean ReD(tau = 1) remainders <R_0> = N, <R_1>, ... averaged over realizations.
struct RoundSeries {
    std::vector<double> means;
    std::size_t realizations = 1;

    /// Validates: non-empty, finite, non-negative, non-increasing.
    static RoundSeries make(std::vector<double> means, std::size_t realizations = 1);
};

struct RoundFitPoint {
    std::size_t round;
    double ratio;   ///< -<R_n> / <R_{n+1} - R_n>
    double fitted;  ///< n / alpha + (alpha + beta) / alpha
};

struct AlphaEstimate {
    double alpha;
    /// beta recovered from the intercept; low confidence, the slope carries
    /// the exponent.
    double beta_hat;
    double stderr_alpha;
    double slope;
    double intercept;
    std::size_t first_round;
    std::size_t last_round;
    std::vector<RoundFitPoint> points;
};

/*!
 * Fit -<R_n>/<R_{n+1}-R_n> = n/alpha + (alpha+beta)/alpha by ordinary least
 * squares. Round n is used when <R_n> >= min_remainder, <R_{n+1}> < <R_n>,
 * and n <= max_round (if given). alpha = 1/slope and its standard error is
 * the slope's, propagated through 1/x.
 *
 * Throws NumericError with fewer than 3 usable rounds or a non-positive slope.
 */
AlphaEstimate infer_alpha_from_rounds(const RoundSeries& series, double min_remainder = 5.0,
                                      std::optional<std::size_t> max_round = std::nullopt);

struct LogLogFit {
    double alpha;
    double stderr_alpha;
    std::size_t k_min;
    std::size_t k_max;
};

/// Least-squares slope of log(1 - pass@k) against log k over k_min..k_max
/// (default K), negated.
LogLogFit fit_loglog_alpha(const PassCurve& curve, std::size_t k_min, std::optional<std::size_t> k_max = std::nullopt);

/// Difficulty distribution of the questions left after n ReD rounds when the
/// pool starts Beta(alpha, beta): Beta(alpha, beta + n), whose mean
/// gamma_n = alpha / (alpha + beta + n) is the per-round solve fraction.
struct BetaPosterior {
    double alpha;
    double beta;
    double gamma;
};

BetaPosterior beta_posterior(double alpha, double beta, std::size_t rounds);

/// Analytic <R_n> = N B(alpha, beta + n) / B(alpha, beta) for n = 0..rounds.
RoundSeries beta_round_series(double alpha, double beta, double pool_size, std::size_t rounds);

}  // namespace redkit

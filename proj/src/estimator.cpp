#include "redkit/estimator.hpp"

#include <cmath>

#include <fmt/format.h>

#include "redkit/error.hpp"

namespace redkit {

RoundSeries RoundSeries::make(std::vector<double> means, std::size_t realizations)
{
    if (means.empty()) throw ValidationError("round series is empty");
    if (realizations < 1) throw ValidationError("round series needs a realization count >= 1");
    for (std::size_t n = 0; n < means.size(); ++n) {
        if (!std::isfinite(means[n]) || means[n] < 0.0) {
            throw ValidationError(fmt::format("round series entry {} = {} is not a finite count", n, means[n]));
        }
        if (n > 0 && means[n] > means[n - 1] * (1.0 + 1e-12)) {
            throw ValidationError(fmt::format("round series increases at n = {} ({} > {})", n, means[n], means[n - 1]));
        }
    }
    return RoundSeries{std::move(means), realizations};
}

namespace {

struct LineFit {
    double slope;
    double intercept;
    double stderr_slope;
};

LineFit ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericError("degenerate fit: all abscissae coincide");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ssr += r * r;
    }
    const double se = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return {slope, intercept, se};
}

}  // namespace

AlphaEstimate infer_alpha_from_rounds(const RoundSeries& series, double min_remainder,
                                      std::optional<std::size_t> max_round)
{
    const auto& r = series.means;
    std::vector<double> xs, ys;
    std::vector<std::size_t> rounds;
    for (std::size_t n = 0; n + 1 < r.size(); ++n) {
        if (max_round && n > *max_round) break;
        if (r[n] < min_remainder) continue;
        const double drop = r[n] - r[n + 1];
        if (!(drop > 0.0)) continue;
        xs.push_back(static_cast<double>(n));
        ys.push_back(r[n] / drop);
        rounds.push_back(n);
    }
    if (xs.size() < 3) {
        throw NumericError(
            fmt::format("fewer than 3 usable rounds ({} with remainder >= {})", xs.size(), min_remainder));
    }

    const auto fit = ordinary_least_squares(xs, ys);
    if (!(fit.slope > 0.0)) throw NumericError(fmt::format("non-positive fitted slope {}", fit.slope));

    AlphaEstimate est;
    est.slope = fit.slope;
    est.intercept = fit.intercept;
    est.alpha = 1.0 / fit.slope;
    est.beta_hat = est.alpha * fit.intercept - est.alpha;
    est.stderr_alpha = fit.stderr_slope / (fit.slope * fit.slope);
    est.first_round = rounds.front();
    est.last_round = rounds.back();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        est.points.push_back({rounds[i], ys[i], fit.intercept + fit.slope * xs[i]});
    }
    return est;
}

LogLogFit fit_loglog_alpha(const PassCurve& curve, std::size_t k_min, std::optional<std::size_t> k_max)
{
    const std::size_t hi = k_max.value_or(curve.max_index());
    if (k_min < 1) throw ValidationError("log-log fit needs k_min >= 1");
    if (hi > curve.max_index()) throw ValidationError("log-log fit window exceeds the curve");
    if (hi < k_min + 2) throw ValidationError("log-log fit needs at least 3 points beyond k_min");

    std::vector<double> xs, ys;
    xs.reserve(hi - k_min + 1);
    ys.reserve(hi - k_min + 1);
    for (std::size_t k = k_min; k <= hi; ++k) {
        const double s = 1.0 - curve[k];
        if (!(s > 0.0)) {
            throw NumericError(fmt::format("saturated curve: 1 - pass@{} = 0 inside the fit window", k));
        }
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(std::log(s));
    }
    const auto fit = ordinary_least_squares(xs, ys);
    return {-fit.slope, fit.stderr_slope, k_min, hi};
}

BetaPosterior beta_posterior(double alpha, double beta, std::size_t rounds)
{
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ValidationError("Beta parameters must be positive");
    const double b = beta + static_cast<double>(rounds);
    return {alpha, b, alpha / (alpha + b)};
}

RoundSeries beta_round_series(double alpha, double beta, double pool_size, std::size_t rounds)
{
    const auto model = DifficultyModel::beta(alpha, beta);
    std::vector<double> means(rounds + 1);
    for (std::size_t n = 0; n <= rounds; ++n) means[n] = pool_size * survival_at_k(model, n);
    return RoundSeries::make(std::move(means));
}

}  // namespace redkit

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include "redkit/error.hpp"
#include "redkit/estimator.hpp"
#include "redkit/table_io.hpp"

using namespace redkit;

namespace {

// Series whose ratios y_n are exactly the requested values: choose R_0 and
// each drop so that R_n / (R_n - R_{n+1}) = y_n.
RoundSeries series_from_ratios(const std::vector<double>& y, double r0 = 1000.0)
{
    std::vector<double> r = {r0};
    for (double v : y) r.push_back(r.back() - r.back() / v);
    return RoundSeries::make(r);
}

}  // namespace

TEST_SUITE("estimator")
{
    TEST_CASE("exact line")
    {
        const auto e = infer_alpha_from_rounds(series_from_ratios({3, 5, 7}), 0.0);
        CHECK(e.alpha == doctest::Approx(0.5).epsilon(1e-12));
        // intercept (alpha + beta) / alpha = 3 with alpha = 1/2 gives beta = 1.
        CHECK(e.beta_hat == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.slope == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(e.intercept == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(e.stderr_alpha < 1e-10);
        CHECK(e.first_round == 0);
        CHECK(e.last_round == 2);
        REQUIRE(e.points.size() == 3);
        for (const auto& p : e.points) CHECK(p.ratio == doctest::Approx(p.fitted).epsilon(1e-12));
    }

    TEST_CASE("degenerate rounds are skipped")
    {
        // Flat step between n = 2 and n = 3.
        const auto s = RoundSeries::make({1000, 666.0, 444.0, 444.0, 300.0, 200.0, 140.0});
        const auto e = infer_alpha_from_rounds(s, 5.0);
        for (const auto& p : e.points) CHECK(p.round != 2);
        CHECK(e.points.size() == 5);
    }

    TEST_CASE("min remainder and window")
    {
        const auto s = beta_round_series(0.5, 1.0, 100.0, 60);
        const auto all = infer_alpha_from_rounds(s, 5.0);
        for (const auto& p : all.points) CHECK(s.means[p.round] >= 5.0);
        const auto windowed = infer_alpha_from_rounds(s, 5.0, 15);
        CHECK(windowed.last_round == 15);
        CHECK(windowed.first_round == 0);
    }

    TEST_CASE("failures")
    {
        CHECK_THROWS_WITH_AS(infer_alpha_from_rounds(RoundSeries::make({164, 0, 0, 0}), 5.0),
                             doctest::Contains("fewer than 3 usable rounds"), NumericError);
        // Ratios falling with n give a negative slope.
        CHECK_THROWS_AS(infer_alpha_from_rounds(series_from_ratios({9, 6, 3}), 0.0), NumericError);
        CHECK_THROWS_AS(RoundSeries::make({10, 11}), ValidationError);
        CHECK_THROWS_AS(RoundSeries::make({10, -1}), ValidationError);
        CHECK_THROWS_AS(RoundSeries::make({}), ValidationError);
    }

    TEST_CASE("rescaling the pool leaves the estimate unchanged")
    {
        const auto base = beta_round_series(0.34, 2.0, 5000.0, 15);
        const auto e = infer_alpha_from_rounds(base, 0.0);
        for (double scale : {0.001, 3.0, 1e6}) {
            auto m = base.means;
            for (auto& v : m) v *= scale;
            const auto s = infer_alpha_from_rounds(RoundSeries::make(m), 0.0);
            CHECK(s.alpha == doctest::Approx(e.alpha).epsilon(1e-12));
            CHECK(s.beta_hat == doctest::Approx(e.beta_hat).epsilon(1e-10));
        }
    }

    TEST_CASE("round ratio is linear under the Beta model")
    {
        for (auto [a, b] : {std::pair{0.34, 2.0}, {0.5, 1.0}, {2.0, 3.0}, {0.1, 0.1}}) {
            const auto s = beta_round_series(a, b, 1.0, 51);
            for (std::size_t n = 0; n <= 50; ++n) {
                const double y = s.means[n] / (s.means[n] - s.means[n + 1]);
                const double exact = (double(n) + a + b) / a;
                CHECK(std::abs(y - exact) / exact < 1e-8);
            }
            const auto e = infer_alpha_from_rounds(s, 0.0, 50);
            CHECK(e.alpha == doctest::Approx(a).epsilon(1e-8));
            CHECK(e.beta_hat == doctest::Approx(b).epsilon(1e-6));
        }
    }

    TEST_CASE("log-log tail fit")
    {
        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 10000);
        CHECK(std::abs(fit_loglog_alpha(uni, 100).alpha - 1.0) < 0.01);
        const auto he = build_pass_curve(DifficultyModel::beta(0.34, 2), 10000);
        const auto f = fit_loglog_alpha(he, 100);
        CHECK(std::abs(f.alpha - 0.34) < 0.01);
        CHECK(f.k_min == 100);
        CHECK(f.k_max == 10000);

        const auto sat = PassCurve({0, 0.5, 0.9, 1.0, 1.0, 1.0});
        CHECK_THROWS_WITH_AS(fit_loglog_alpha(sat, 1), doctest::Contains("saturated"), NumericError);
        CHECK_THROWS_AS(fit_loglog_alpha(uni, 9999), ValidationError);
        CHECK_THROWS_AS(fit_loglog_alpha(uni, 0), ValidationError);
    }

    TEST_CASE("Beta posterior")
    {
        const auto p = beta_posterior(0.5, 1, 3);
        CHECK(p.alpha == 0.5);
        CHECK(p.beta == 4.0);
        CHECK(p.gamma == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
        CHECK(beta_posterior(1, 1, 0).gamma == 0.5);
        CHECK_THROWS_AS(beta_posterior(0, 1, 2), ValidationError);

        // Survival for the uniform prior telescopes: prod (1 - gamma_m) = 1 / (n + 1).
        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 30);
        for (std::size_t n = 0; n <= 30; ++n) {
            double prod = 1.0;
            for (std::size_t m = 0; m < n; ++m) prod *= 1.0 - beta_posterior(1, 1, m).gamma;
            CHECK(164.0 * (1.0 - uni[n]) == doctest::Approx(164.0 * prod).epsilon(1e-13));
            CHECK(prod == doctest::Approx(1.0 / double(n + 1)).epsilon(1e-14));
        }
    }

    TEST_CASE("repeated reweighting by the failure probability gives the posterior")
    {
        // Reweight the Beta(a, b) density by (1 - p)^n and renormalize by
        // quadrature; compare with the Beta(a, b + n) density on a grid.
        const double a = 0.7, b = 1.3;
        for (std::size_t n : {1u, 4u, 12u}) {
            auto weighted = [&](double p) {
                return std::pow(p, a - 1) * std::pow(1 - p, b - 1) * std::pow(1 - p, double(n));
            };
            boost::math::quadrature::tanh_sinh<double> integrator;
            const double z = integrator.integrate(weighted, 0.0, 1.0);
            const auto post = beta_posterior(a, b, n);
            for (double p = 0.05; p < 1.0; p += 0.1) {
                const double target = std::pow(p, post.alpha - 1) * std::pow(1 - p, post.beta - 1) /
                                      boost::math::beta(post.alpha, post.beta);
                CHECK(weighted(p) / z == doctest::Approx(target).epsilon(1e-8));
            }
        }
    }

    TEST_CASE("round series csv round trip")
    {
        const auto s = beta_round_series(0.34, 2.0, 5000.0, 20);
        const auto csv = round_series_csv(s);
        CHECK(csv.rfind("n,mean_remainder\n", 0) == 0);
        const auto back = parse_round_series_csv(csv);
        CHECK(back.means == s.means);
        const auto e1 = infer_alpha_from_rounds(s, 5.0);
        const auto e2 = infer_alpha_from_rounds(back, 5.0);
        CHECK(alpha_estimate_json(e1) == alpha_estimate_json(e2));

        CHECK_THROWS_AS(parse_round_series_csv("n,mean_remainder\n0,10\n2,5\n"), ValidationError);
        CHECK_THROWS_AS(parse_round_series_csv("n,mean_remainder\n0,ten\n"), ValidationError);
    }
}

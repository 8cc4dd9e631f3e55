#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/binomial.hpp>
#include <doctest.h>

#include "redkit/difficulty.hpp"
#include "redkit/error.hpp"
#include "redkit/renewal.hpp"

using namespace redkit;

namespace {

struct Moments {
    double m1;
    double m2;
};

// Enumerate all 2^t success/failure strings of a solve-to-completion run.
// A string splits into per-question segments of failures closed by a success
// (probability f(L) for a segment of length L) and a trailing open segment of
// length L (probability 1 - F(L)). Coverage is the number of successes.
Moments enumerate_coverage(const PassCurve& F, std::size_t t)
{
    Moments out{0.0, 0.0};
    for (std::uint32_t bits = 0; bits < (1u << t); ++bits) {
        double prob = 1.0;
        std::size_t run = 0;
        int solved = 0;
        for (std::size_t i = 0; i < t; ++i) {
            ++run;
            if (bits & (1u << i)) {
                prob *= F[run] - F[run - 1];
                run = 0;
                ++solved;
            }
        }
        prob *= 1.0 - F[run];
        out.m1 += prob * solved;
        out.m2 += prob * solved * solved;
    }
    return out;
}

double loglog_slope(const std::vector<double>& y, std::size_t lo, std::size_t hi)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t t = lo; t <= hi; ++t) {
        const double x = std::log(double(t)), v = std::log(y[t]);
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
        n += 1;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DifficultyModel random_beta(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> shape(0.2, 5.0);
    const double a = shape(rng);
    return DifficultyModel::beta(a, shape(rng));
}

DifficultyModel random_empirical(std::mt19937_64& rng, std::size_t atoms = 5)
{
    std::uniform_real_distribution<double> prob(0.01, 1.0);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    std::vector<std::pair<double, double>> list(atoms);
    double total = 0;
    for (auto& a : list) {
        a = {prob(rng), w(rng)};
        total += a.second;
    }
    for (auto& a : list) a.second /= total;
    return DifficultyModel::empirical(list);
}

}  // namespace

TEST_SUITE("renewal")
{
    TEST_CASE("renewal coverage examples")
    {
        const auto curve = build_pass_curve(DifficultyModel::point_mass(0.5), 10);
        const auto pred = renewal_coverage(curve, 2, {.with_second_moment = true});
        CHECK(pred.mean[0] == 0.0);
        CHECK(pred.mean[1] == doctest::Approx(0.5));
        CHECK(pred.mean[2] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(pred.second_moment[2] == doctest::Approx(1.5).epsilon(1e-15));

        const auto beta = build_pass_curve(DifficultyModel::beta(0.34, 2), 5);
        CHECK(renewal_coverage(beta, 1).mean[1] == beta[1]);
    }

    TEST_CASE("Binomial moments for a point mass")
    {
        for (double p : {0.1, 0.5, 0.9}) {
            const auto curve = build_pass_curve(DifficultyModel::point_mass(p), 40);
            const auto pred = renewal_coverage(curve, 40, {.with_second_moment = true});
            for (std::size_t t = 1; t <= 40; ++t) {
                const double mean = double(t) * p;
                const double m2 = double(t) * p * (1 - p) + mean * mean;
                CHECK(std::abs(pred.mean[t] - mean) / mean < 1e-10);
                CHECK(std::abs(pred.second_moment[t] - m2) / m2 < 1e-10);
            }
        }
    }

    TEST_CASE("recurrence matches exhaustive enumeration")
    {
        std::mt19937_64 rng(77);
        std::vector<DifficultyModel> models = {DifficultyModel::beta(0.34, 2), DifficultyModel::beta(3, 0.5),
                                               DifficultyModel::point_mass(0.3)};
        for (int i = 0; i < 4; ++i) models.push_back(random_empirical(rng));
        for (const auto& m : models) {
            const auto curve = build_pass_curve(m, 8);
            const auto pred = renewal_coverage(curve, 8, {.with_second_moment = true});
            for (std::size_t t = 1; t <= 8; ++t) {
                const auto ref = enumerate_coverage(curve, t);
                CHECK(std::abs(pred.mean[t] - ref.m1) / ref.m1 < 1e-10);
                CHECK(std::abs(pred.second_moment[t] - ref.m2) / ref.m2 < 1e-10);
            }
        }
    }

    TEST_CASE("prediction invariants")
    {
        const auto curve = build_pass_curve(DifficultyModel::beta(0.5, 2), 3000);
        for (const auto& pred : {renewal_coverage(curve, 3000, {.with_second_moment = true}),
                                 coverage_with_reset(curve, 4, 3000, {.with_second_moment = true})}) {
            CHECK(pred.mean[0] == 0.0);
            for (std::size_t t = 0; t < pred.t_max(); ++t) {
                REQUIRE(pred.mean[t + 1] >= pred.mean[t]);
                REQUIRE(pred.mean[t + 1] - pred.mean[t] <= 1.0 + 1e-12);
                REQUIRE(pred.second_moment[t] >= pred.mean[t] * pred.mean[t] * (1 - 1e-12));
            }
        }
    }

    TEST_CASE("horizon checks")
    {
        const auto curve = build_pass_curve(DifficultyModel::point_mass(0.5), 10);
        CHECK_THROWS_AS(renewal_coverage(curve, 11), ValidationError);
        const auto big = build_pass_curve(DifficultyModel::point_mass(0.5), kMaxRenewalHorizon + 1);
        CHECK_THROWS_WITH_AS(renewal_coverage(big, kMaxRenewalHorizon + 1), doctest::Contains("asymptotic"),
                             ValidationError);
        CHECK_THROWS_AS(ResetSchedule::every(0), ValidationError);
    }

    TEST_CASE("cdf with reset")
    {
        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 10);
        CHECK(cdf_with_reset(uni, 2, 3) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
        CHECK(cdf_with_reset(uni, 2, 0) == 0.0);
        for (std::size_t n = 1; n <= 30; ++n) {
            CHECK(cdf_with_reset(uni, 1, n) == doctest::Approx(1.0 - std::pow(0.5, double(n))).epsilon(1e-14));
        }
        // Only F(0..tau) is needed, so t may run past the tabulated curve.
        CHECK(cdf_with_reset(uni, 3, 1000) <= 1.0);
        CHECK_THROWS_AS(cdf_with_reset(uni, 11, 12), ValidationError);
    }

    TEST_CASE("geometric neutrality")
    {
        for (double p : {0.05, 0.5, 0.8}) {
            const auto curve = build_pass_curve(DifficultyModel::point_mass(p), 60);
            for (std::size_t tau = 1; tau <= 12; ++tau) {
                for (std::size_t t = 0; t <= 60; ++t) {
                    REQUIRE(cdf_with_reset(curve, tau, t) == doctest::Approx(curve[t]).epsilon(1e-13));
                }
                CHECK(mean_attempts_with_reset(curve, tau) == doctest::Approx(1.0 / p).epsilon(1e-13));
            }
            const auto plain = renewal_coverage(curve, 60);
            const auto reset = coverage_with_reset(curve, 3, 60);
            for (std::size_t t = 0; t <= 60; ++t) CHECK(reset.mean[t] == doctest::Approx(plain.mean[t]).epsilon(1e-12));
        }
        const auto half = build_pass_curve(DifficultyModel::point_mass(0.5), 4);
        CHECK(coverage_with_reset(half, 3, 2).mean[2] == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("reset coverage examples")
    {
        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 50);
        const auto plain = renewal_coverage(uni, 50);
        const auto red = coverage_with_reset(uni, 1, 50);
        CHECK(red.mean[1] == doctest::Approx(uni[1]));
        for (std::size_t t = 0; t <= 50; ++t) CHECK(red.mean[t] >= plain.mean[t] - 1e-12);
    }

    TEST_CASE("mean attempts with reset")
    {
        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 10);
        CHECK(mean_attempts_with_reset(uni, 1) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(mean_attempts_with_reset(uni, 2) == doctest::Approx(2.25).epsilon(1e-14));
        CHECK(mean_attempts_with_reset(uni, 3) == doctest::Approx(22.0 / 9.0).epsilon(1e-14));
        CHECK(partial_survival_sum(uni, 3) == doctest::Approx(11.0 / 6.0).epsilon(1e-14));

        // tau = 1: E[T_1] = 1 / pass@1 = (alpha + beta) / alpha for a Beta pool.
        const auto b = build_pass_curve(DifficultyModel::beta(0.34, 2), 2);
        CHECK(mean_attempts_with_reset(b, 1) == doctest::Approx(2.34 / 0.34).epsilon(1e-13));

        const auto flat = DifficultyModel::tabulated(PassCurve({0, 0, 0, 0.5}));
        const auto fc = build_pass_curve(flat, 3);
        CHECK_THROWS_AS(mean_attempts_with_reset(fc, 2), NumericError);
        CHECK(mean_attempts_with_reset(fc, 3) == doctest::Approx(6.0));
    }

    TEST_CASE("optimal interval is one attempt")
    {
        std::mt19937_64 rng(4242);
        std::size_t checked = 0;
        for (int i = 0; i < 200; ++i) {
            const auto m = i % 2 ? random_beta(rng) : random_empirical(rng);
            const auto curve = build_pass_curve(m, 51);
            double prev = mean_attempts_with_reset(curve, 1);
            for (std::size_t tau = 2; tau <= 50; ++tau) {
                const double cur = mean_attempts_with_reset(curve, tau);
                REQUIRE(cur >= prev - 1e-12 * prev);
                prev = cur;
                ++checked;
            }
        }
        CHECK(checked == 200 * 49);
    }

    TEST_CASE("resetting never costs attempts")
    {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 100; ++i) {
            // Beta with alpha > 1 has E[T] = (alpha + beta - 1) / (alpha - 1).
            std::uniform_real_distribution<double> shape(1.2, 6.0), b(0.2, 5.0);
            const double alpha = shape(rng), beta = b(rng);
            const double ET = (alpha + beta - 1.0) / (alpha - 1.0);
            const auto curve = build_pass_curve(DifficultyModel::beta(alpha, beta), 50);
            for (std::size_t tau = 1; tau <= 50; ++tau) REQUIRE(mean_attempts_with_reset(curve, tau) <= ET * (1 + 1e-12));
        }
        for (int i = 0; i < 100; ++i) {
            const auto m = random_empirical(rng);
            const auto& e = std::get<EmpiricalDifficulty>(m.variant());
            double ET = 0;
            for (std::size_t j = 0; j < e.p.size(); ++j) ET += e.weight[j] / e.p[j];
            const auto curve = build_pass_curve(m, 50);
            for (std::size_t tau = 1; tau <= 50; ++tau) REQUIRE(mean_attempts_with_reset(curve, tau) <= ET * (1 + 1e-12));
        }
    }

    TEST_CASE("sublinear growth exponent without reset")
    {
        // beta = 0.5: the subleading term of m1 is relatively O(t^(alpha-1)), so
        // alpha = 0.8 with beta >= 1 is still pre-asymptotic on this window.
        for (double alpha : {0.3, 0.5, 0.8}) {
            const auto curve = build_pass_curve(DifficultyModel::beta(alpha, 0.5), 10000);
            const auto pred = renewal_coverage(curve, 10000);
            CHECK(std::abs(loglog_slope(pred.mean, 1000, 10000) - alpha) < 0.03);
        }
    }

    TEST_CASE("linear growth for finite mean")
    {
        for (auto [a, b] : {std::pair{3.0, 2.0}, {4.0, 2.0}, {2.5, 0.5}}) {
            const double ET = (a + b - 1.0) / (a - 1.0);
            const auto t = static_cast<std::size_t>(std::ceil(50.0 * ET));
            const auto curve = build_pass_curve(DifficultyModel::beta(a, b), t);
            const auto pred = renewal_coverage(curve, t);
            CHECK(std::abs(pred.mean[t] * ET / double(t) - 1.0) < 0.02);
        }
    }

    TEST_CASE("linear growth under ReD")
    {
        const auto curve = build_pass_curve(DifficultyModel::beta(0.5, 2.0), 20);
        for (std::size_t tau : {1u, 3u, 10u}) {
            const std::size_t tmax = 4000;
            const auto pred = coverage_with_reset(curve, tau, tmax);
            const double slope = (pred.mean[tmax] - pred.mean[tmax / 10]) / double(tmax - tmax / 10);
            const double expected = curve[tau] / partial_survival_sum(curve, tau);
            CHECK(std::abs(slope / expected - 1.0) < 0.02);
        }
    }

    TEST_CASE("asymptotic coverage")
    {
        CHECK(std_over_mean_constant(0.5) == doctest::Approx(std::sqrt(std::numbers::pi / 2 - 1)).epsilon(1e-14));
        CHECK(std_over_mean_constant(0.5) == doctest::Approx(0.7555).epsilon(1e-4));
        CHECK(std_over_mean_constant(1.0) == 0.0);
        CHECK(std::sqrt(std::max(0.0, 2.0 * std::tgamma(2.0) * std::tgamma(2.0) / std::tgamma(3.0) - 1.0)) == 0.0);
        CHECK(std_over_mean_constant(0.999) < std_over_mean_constant(0.5));

        const auto lin = asymptotic_coverage(2.0, 1.0, 100.0, 2.0);
        CHECK(lin.mean == 50.0);
        CHECK(lin.second_moment == 2500.0);
        CHECK(lin.std_over_mean == 0.0);
        CHECK_THROWS_AS(asymptotic_coverage(1.0, 1.0, 10.0), NumericError);
        CHECK_THROWS_AS(asymptotic_coverage(2.0, 1.0, 10.0), ValidationError);
        CHECK_THROWS_AS(asymptotic_coverage(-0.5, 1.0, 10.0), ValidationError);

        // The leading term against the exact recurrence, using the tail law
        // produced by the difficulty module. The generating function of m1 is
        // 1/((1-z)(1-f(z))) - 1/(1-z), so m1 carries an exact -1 offset that
        // matters at small alpha.
        for (auto [a, b] : {std::pair{0.5, 2.0}, {0.3, 1.0}}) {
            const auto model = DifficultyModel::beta(a, b);
            const auto law = *tail_exponent_and_coefficient(model).law;
            const std::size_t t = 20000;
            const auto curve = build_pass_curve(model, t);
            const auto exact = renewal_coverage(curve, t, {.with_second_moment = true});
            const auto asym = asymptotic_coverage(law.alpha, law.coefficient, double(t));
            CHECK(std::abs((asym.mean - 1.0) / exact.mean[t] - 1.0) < 0.025);
            CHECK(std::abs(asym.second_moment / exact.second_moment[t] - 1.0) < 0.1);
            CHECK(std::abs(exact.std_dev(t) / exact.mean[t] - asym.std_over_mean) < 0.05);
        }
    }

    TEST_CASE("std/mean shrinks for finite mean")
    {
        const auto curve = build_pass_curve(DifficultyModel::beta(3.0, 2.0), 4000);
        const auto pred = renewal_coverage(curve, 4000, {.with_second_moment = true});
        double prev = 1e9;
        for (std::size_t t : {100u, 400u, 1600u, 4000u}) {
            const double r = pred.std_dev(t) / pred.mean[t];
            CHECK(r < prev);
            prev = r;
        }
    }

    TEST_CASE("finite pool prediction")
    {
        const auto half = build_pass_curve(DifficultyModel::point_mass(0.5), 5);
        const auto rows = finite_pool_red_prediction(half, 164, 2);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].round == 1);
        CHECK(rows[0].mean_attempts == 164.0);
        CHECK(rows[0].mean_coverage == 82.0);
        CHECK(rows[0].mean_remainder == 82.0);
        CHECK(rows[1].mean_attempts == 246.0);
        CHECK(rows[1].mean_coverage == 123.0);

        const auto uni = build_pass_curve(DifficultyModel::beta(1, 1), 10);
        const auto u = finite_pool_red_prediction(uni, 164, 10);
        CHECK(u[0].mean_attempts == doctest::Approx(164.0));
        CHECK(u[1].mean_attempts == doctest::Approx(246.0));
        CHECK(u[1].mean_coverage == doctest::Approx(164.0 * 2.0 / 3.0));
        for (const auto& r : u) CHECK(r.mean_coverage + r.mean_remainder == doctest::Approx(164.0));

        CHECK_THROWS_AS(finite_pool_red_prediction(uni, 164, 11), ValidationError);
        CHECK_THROWS_AS(finite_pool_red_prediction(uni, 0, 2), ValidationError);
    }
}

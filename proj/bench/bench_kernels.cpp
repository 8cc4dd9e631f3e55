// Serial reference vs OpenMP kernels: renewal convolution and the Monte
// Carlo ensemble. Prints wall time per run and checks the outputs agree.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <fmt/core.h>

#include "redkit/difficulty.hpp"
#include "redkit/kernels.hpp"
#include "redkit/policy.hpp"

using namespace redkit;

namespace {

template <class F>
double seconds(F&& f, int repeats)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

int bench_renewal(std::size_t t_max, int workers)
{
    const auto curve = build_pass_curve(DifficultyModel::beta(0.5, 2.0), t_max);
    const std::span<const double> cdf(curve.values());
    std::vector<double> s1(cdf.size()), s2(cdf.size()), p1(cdf.size()), p2(cdf.size());

    const double ts = seconds([&] { kernels::renewal_moments_serial(cdf, s1, s2); }, 3);
    const double tp = seconds([&] { kernels::renewal_moments_parallel(cdf, p1, p2, workers); }, 3);

    double worst = 0;
    for (std::size_t t = 1; t < cdf.size(); ++t) worst = std::max(worst, std::abs(p1[t] - s1[t]) / s1[t]);
    fmt::print("renewal   t_max={:>6}  serial {:8.4f} s  parallel({}) {:8.4f} s  speedup {:5.2f}  max rel diff {:.1e}\n",
               t_max, ts, workers, tp, ts / tp, worst);
    return worst < 1e-12 ? 0 : 1;
}

int bench_monte_carlo(std::size_t realizations, int workers)
{
    const PoolSpec pool = SyntheticPool{DifficultyModel::beta(0.34, 2.0), 1000};
    EnsembleOptions opt;
    opt.realizations = realizations;
    opt.master_seed = 7;
    opt.workers = workers;
    const auto budget = Budget::attempts(20000);

    EnsembleSummary serial, parallel;
    opt.execution = Execution::Serial;
    const double ts = seconds([&] { serial = monte_carlo(pool, make_red_policy(1), budget, opt); }, 1);
    opt.execution = Execution::Parallel;
    const double tp = seconds([&] { parallel = monte_carlo(pool, make_red_policy(1), budget, opt); }, 1);

    const bool same = serial.mean == parallel.mean && serial.std_dev == parallel.std_dev;
    fmt::print("ensemble  R={:>6}       serial {:8.4f} s  parallel({}) {:8.4f} s  speedup {:5.2f}  identical {}\n",
               realizations, ts, workers, tp, ts / tp, same ? "yes" : "NO");
    return same ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    const int workers = argc > 1 ? std::atoi(argv[1]) : 0;
    int bad = 0;
    for (std::size_t t : {2000u, 10000u, 40000u}) bad += bench_renewal(t, workers);
    for (std::size_t r : {50u, 200u}) bad += bench_monte_carlo(r, workers);
    return bad == 0 ? 0 : 1;
}

#include "redkit/kernels.hpp"

#include <algorithm>
#include <vector>

#include "redkit/error.hpp"

#ifdef REDKIT_HAVE_OPENMP
#include <omp.h>
#endif

namespace redkit::kernels {

namespace {

void check_shapes(std::span<const double> cdf, std::span<double> m1, std::span<double> m2)
{
    if (cdf.empty()) throw ValidationError("renewal kernel needs a non-empty CDF");
    if (m1.size() != cdf.size()) throw ValidationError("renewal kernel: m1 length must match the CDF");
    if (!m2.empty() && m2.size() != cdf.size()) throw ValidationError("renewal kernel: m2 length must match the CDF");
}

std::vector<double> pmf(std::span<const double> cdf)
{
    std::vector<double> f(cdf.size(), 0.0);
    for (std::size_t j = 1; j < cdf.size(); ++j) f[j] = cdf[j] - cdf[j - 1];
    return f;
}

// sum_{j=lo..hi-1} m[t-j] f[j]
inline double conv_range(const double* m, const double* f, std::size_t t, std::size_t lo, std::size_t hi)
{
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += m[t - j] * f[j];
    return s;
}

}  // namespace

void renewal_moments_serial(std::span<const double> cdf, std::span<double> m1, std::span<double> m2)
{
    check_shapes(cdf, m1, m2);
    const auto f = pmf(cdf);
    const bool second = !m2.empty();

    m1[0] = 0.0;
    if (second) m2[0] = 0.0;
    for (std::size_t t = 1; t < cdf.size(); ++t) {
        // The j = t term multiplies m(0) = 0.
        m1[t] = cdf[t] + conv_range(m1.data(), f.data(), t, 1, t);
        if (second) m2[t] = 2.0 * m1[t] - cdf[t] + conv_range(m2.data(), f.data(), t, 1, t);
    }
}

void renewal_moments_parallel(std::span<const double> cdf, std::span<double> m1, std::span<double> m2, int workers)
{
    check_shapes(cdf, m1, m2);
    const auto f = pmf(cdf);
    const bool second = !m2.empty();
    const std::size_t n = cdf.size();
    const std::size_t max_blocks = (n + kConvolutionBlock - 1) / kConvolutionBlock;
    std::vector<double> part1(max_blocks), part2(max_blocks);

#ifdef REDKIT_HAVE_OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
#endif

    m1[0] = 0.0;
    if (second) m2[0] = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const std::size_t blocks = (t - 1 + kConvolutionBlock - 1) / kConvolutionBlock;
        const auto nb = static_cast<std::ptrdiff_t>(blocks);
#ifdef REDKIT_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (blocks > 1)
#endif
        for (std::ptrdiff_t b = 0; b < nb; ++b) {
            const std::size_t lo = 1 + static_cast<std::size_t>(b) * kConvolutionBlock;
            const std::size_t hi = std::min(t, lo + kConvolutionBlock);
            part1[b] = conv_range(m1.data(), f.data(), t, lo, hi);
            if (second) part2[b] = conv_range(m2.data(), f.data(), t, lo, hi);
        }
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            s1 += part1[b];
            if (second) s2 += part2[b];
        }
        m1[t] = cdf[t] + s1;
        if (second) m2[t] = 2.0 * m1[t] - cdf[t] + s2;
    }
}

}  // namespace redkit::kernels

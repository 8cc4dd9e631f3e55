#pragma once

#include <cstddef>
#include <span>

// Inner loops of the renewal predictor. Each kernel has a serial reference
// that the parallel version is tested against.

namespace redkit::kernels {

/// Number of convolution terms summed sequentially per block in the
/// parallel kernel. Fixed, so the summation order never depends on the
/// worker count.
inline constexpr std::size_t kConvolutionBlock = 4096;

/*!
 * Renewal moments from a CDF F(0..T) with F(0) = 0:
 *
 *   m1(t) = F(t) + sum_{j=1..t} m1(t-j) f(j)
 *   m2(t) = 2 m1(t) - F(t) + sum_{j=1..t} m2(t-j) f(j)
 *
 * with f(j) = F(j) - F(j-1). m1 must have the same length as cdf; m2 is
 * either empty (skipped) or the same length.
 */
void renewal_moments_serial(std::span<const double> cdf, std::span<double> m1, std::span<double> m2);

/// Same recurrence; each convolution sum is split into fixed blocks that are
/// reduced concurrently, then combined in block order. Bit-identical to the
/// serial kernel while t <= kConvolutionBlock. workers <= 0 uses the OpenMP
/// default.
void renewal_moments_parallel(std::span<const double> cdf, std::span<double> m1, std::span<double> m2,
                              int workers = 0);

}  // namespace redkit::kernels

#ifndef SRQ_KERNELS_HPP
#define SRQ_KERNELS_HPP

#include "srq/tensor.hpp"

#include <vector>

namespace srq {

// Separable Gaussian kernel truncated at 4*sigma, odd length, renormalized
// to sum 1.
std::vector<double> gaussian_kernel_1d(double sigma);

// Reflective index into [0, n): reflect about the edge samples.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

// OpenMP kernels. Deterministic regardless of thread count: every output
// element is a gather with a fixed serial summation order.
namespace kernels {

// Gaussian smoothing of an (H, W, C) image, reflective boundaries.
Tensor gaussian_blur(const Tensor& img, double sigma);

// Stride-s decimation starting at offset 0 in each spatial axis.
Tensor decimate(const Tensor& img, int stride);

// 2-tap [0.5, 0.5]^2 box low-pass followed by 2x decimation.
Tensor box_downsample_2x(const Tensor& img);

// Per-pixel population variance over a centered odd window, reflective
// boundaries. Input and output are single-channel (H, W, 1).
Tensor local_variance_map(const Tensor& img, int window);

// Unweighted mean over channels, (H, W, C) -> (H, W, 1).
Tensor luminance(const Tensor& img);

void clamp01(Tensor& img);

}  // namespace kernels

// Naive single-threaded reference implementations with identical contracts.
// Kept as the comparison baseline for the parallel kernels.
namespace serial {

Tensor gaussian_blur(const Tensor& img, double sigma);
Tensor local_variance_map(const Tensor& img, int window);

}  // namespace serial

}  // namespace srq

#endif

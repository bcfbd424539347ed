#ifndef SRQ_SSIM_HPP
#define SRQ_SSIM_HPP

#include "srq/tensor.hpp"

#include <span>

namespace srq {

// Standard SSIM constants for a dynamic range of 1.0.
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr int kSsimWindow = 5;

// SSIM of two equally-sized single-channel windows with uniform
// (unweighted) statistics. Value in [-1, 1]; 1 iff x == y.
double ssim_window(std::span<const double> x, std::span<const double> y,
                   double c1 = kSsimC1, double c2 = kSsimC2);

// Sum of ssim_window over all overlapping 5x5 neighborhoods of every color
// channel: 3 * (H-4) * (W-4) terms for an (H, W, 3) pair. Parallel over
// windows with a fixed-order reduction, so results are bit-stable across
// thread counts.
double sssim(const Tensor& sr, const Tensor& hr);

// Analytic gradient of sssim with respect to the pixels of its first
// argument; same shape as sr.
Tensor sssim_grad(const Tensor& sr, const Tensor& hr);

// Perception loss -sssim(sr, hr) and its gradient w.r.t. sr.
double perceptual_loss(const Tensor& sr, const Tensor& hr);
Tensor perceptual_loss_grad(const Tensor& sr, const Tensor& hr);

namespace serial {
// Naive window-by-window baseline.
double sssim(const Tensor& sr, const Tensor& hr);
}

}  // namespace srq

#endif

#ifndef SRQ_LOSSES_HPP
#define SRQ_LOSSES_HPP

#include "srq/networks.hpp"
#include "srq/quasinorm.hpp"
#include "srq/ssim.hpp"
#include "srq/tensor.hpp"

#include <utility>

namespace srq {

struct LossWeights {
    double lambda_m = 0.2;
    double lambda_s = 2.0;
    double lambda_d = 0.016;

    void validate() const;
};

// floor keeping discriminator probabilities away from {0, 1} before logs
inline constexpr double kProbFloor = 1e-7;

// Pixel-domain robust fidelity: quasi_norm_pow of the flattened residual.
double fidelity_loss(const Tensor& sr, const Tensor& hr, const QuasiNormSpec& spec);
Tensor fidelity_loss_grad(const Tensor& sr, const Tensor& hr, const QuasiNormSpec& spec);

// Robust distance between encoder representations. The encoder is applied
// to both images; its parameters are never updated here. If grad_sr is
// non-null it receives d loss / d sr (flowing through the encoder).
double manifold_loss(const Tensor& sr, const Tensor& hr, Network& encoder,
                     const QuasiNormSpec& spec, Tensor* grad_sr = nullptr);

// (generator non-saturating loss -log d_sr, discriminator gain
// log(1 - d_sr) + log(d_hr)); probabilities are clamped to
// [kProbFloor, 1 - kProbFloor].
std::pair<double, double> adversarial_losses(double d_sr, double d_hr);

struct LossComponents {
    double fidelity = 0.0;
    double manifold = 0.0;
    double perceptual = 0.0;
    double adv_gen = 0.0;    // non-saturating generator term
    double adv_disc = 0.0;   // discriminator gain
    double total = 0.0;      // fidelity + lm*manifold + ls*perceptual + ld*adv_gen
};

// Batch-mean combined generator objective. encoder may be null when
// lambda_m == 0 and discriminator null when lambda_d == 0. sr_batch and
// hr_batch are (N,H,W,C). If grad_sr is non-null it receives the gradient
// of the total objective w.r.t. the SR batch.
LossComponents generator_objective(const Tensor& sr_batch, const Tensor& hr_batch,
                                   Network* encoder, Network* discriminator,
                                   const QuasiNormSpec& spec, const LossWeights& weights,
                                   Mode mode = Mode::train, Tensor* grad_sr = nullptr);

}  // namespace srq

#endif

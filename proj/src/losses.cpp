#include "srq/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srq {

void LossWeights::validate() const {
    if (!(std::isfinite(lambda_m) && std::isfinite(lambda_s) && std::isfinite(lambda_d)))
        throw std::invalid_argument("loss weights must be finite");
    if (lambda_m < 0.0 || lambda_s < 0.0 || lambda_d < 0.0)
        throw std::invalid_argument("loss weights must be non-negative");
}

double fidelity_loss(const Tensor& sr, const Tensor& hr, const QuasiNormSpec& spec) {
    check_same_shape(sr, hr, "fidelity_loss");
    std::vector<double> residual(static_cast<std::size_t>(sr.numel()));
    for (std::int64_t i = 0; i < sr.numel(); ++i)
        residual[static_cast<std::size_t>(i)] = sr[i] - hr[i];
    return quasi_norm_pow(residual, spec);
}

Tensor fidelity_loss_grad(const Tensor& sr, const Tensor& hr, const QuasiNormSpec& spec) {
    check_same_shape(sr, hr, "fidelity_loss");
    std::vector<double> residual(static_cast<std::size_t>(sr.numel()));
    for (std::int64_t i = 0; i < sr.numel(); ++i)
        residual[static_cast<std::size_t>(i)] = sr[i] - hr[i];
    return Tensor(sr.shape(), quasi_norm_grad(residual, spec));
}

double manifold_loss(const Tensor& sr, const Tensor& hr, Network& encoder,
                     const QuasiNormSpec& spec, Tensor* grad_sr) {
    check_same_shape(sr, hr, "manifold_loss");
    if (encoder.role() != Role::encoder && encoder.role() != Role::custom)
        throw std::invalid_argument("manifold_loss: network is not an encoder");
    if (sr.rank() == 3) {
        Tensor srb({1, sr.dim(0), sr.dim(1), sr.dim(2)}, sr.flat());
        Tensor hrb({1, hr.dim(0), hr.dim(1), hr.dim(2)}, hr.flat());
        Tensor gb;
        double loss = manifold_loss(srb, hrb, encoder, spec, grad_sr ? &gb : nullptr);
        if (grad_sr) *grad_sr = Tensor(sr.shape(), gb.flat());
        return loss;
    }

    // hr pass first so the cached activations belong to the sr pass when we
    // backpropagate. The encoder always runs in eval mode: it is frozen, and
    // eval-mode bn stays differentiable as a fixed affine map.
    Tensor enc_hr = encoder.forward(hr, Mode::eval);
    Tensor enc_sr = encoder.forward(sr, Mode::eval);
    check_same_shape(enc_sr, enc_hr, "manifold_loss encodings");

    std::vector<double> residual(static_cast<std::size_t>(enc_sr.numel()));
    for (std::int64_t i = 0; i < enc_sr.numel(); ++i)
        residual[static_cast<std::size_t>(i)] = enc_sr[i] - enc_hr[i];
    double loss = quasi_norm_pow(residual, spec);
    if (grad_sr) {
        Tensor upstream(enc_sr.shape(), quasi_norm_grad(residual, spec));
        *grad_sr = encoder.backward(upstream);
    }
    return loss;
}

std::pair<double, double> adversarial_losses(double d_sr, double d_hr) {
    if (d_sr < 0.0 || d_sr > 1.0 || d_hr < 0.0 || d_hr > 1.0)
        throw std::invalid_argument("adversarial_losses: probabilities must be in [0,1]");
    double ps = std::clamp(d_sr, kProbFloor, 1.0 - kProbFloor);
    double ph = std::clamp(d_hr, kProbFloor, 1.0 - kProbFloor);
    double gen_loss = -std::log(ps);
    double disc_gain = std::log(1.0 - ps) + std::log(ph);
    return {gen_loss, disc_gain};
}

LossComponents generator_objective(const Tensor& sr_batch, const Tensor& hr_batch,
                                   Network* encoder, Network* discriminator,
                                   const QuasiNormSpec& spec, const LossWeights& weights,
                                   Mode mode, Tensor* grad_sr) {
    check_same_shape(sr_batch, hr_batch, "generator_objective");
    if (sr_batch.rank() != 4) throw std::invalid_argument("generator_objective: expected (N,H,W,C)");
    spec.validate();
    weights.validate();
    const int n = sr_batch.dim(0);
    if (n == 0) throw std::invalid_argument("generator_objective: empty batch");
    if (weights.lambda_m > 0.0 && !encoder)
        throw std::invalid_argument("generator_objective: encoder required when lambda_m > 0");
    if (weights.lambda_d > 0.0 && !discriminator)
        throw std::invalid_argument("generator_objective: discriminator required when lambda_d > 0");

    LossComponents comp;
    Tensor grad;
    if (grad_sr) grad = Tensor(sr_batch.shape());
    const double inv_n = 1.0 / n;

    auto srs = unstack_batch(sr_batch);
    auto hrs = unstack_batch(hr_batch);

    for (int i = 0; i < n; ++i) {
        comp.fidelity += fidelity_loss(srs[static_cast<std::size_t>(i)],
                                       hrs[static_cast<std::size_t>(i)], spec) * inv_n;
        if (weights.lambda_s > 0.0)
            comp.perceptual += perceptual_loss(srs[static_cast<std::size_t>(i)],
                                               hrs[static_cast<std::size_t>(i)]) * inv_n;
    }
    if (grad_sr) {
        for (int i = 0; i < n; ++i) {
            Tensor g = fidelity_loss_grad(srs[static_cast<std::size_t>(i)],
                                          hrs[static_cast<std::size_t>(i)], spec);
            std::size_t off = static_cast<std::size_t>(i) * static_cast<std::size_t>(g.numel());
            for (std::int64_t j = 0; j < g.numel(); ++j)
                grad[static_cast<std::int64_t>(off) + j] += inv_n * g[j];
            if (weights.lambda_s > 0.0) {
                Tensor gp = perceptual_loss_grad(srs[static_cast<std::size_t>(i)],
                                                 hrs[static_cast<std::size_t>(i)]);
                for (std::int64_t j = 0; j < gp.numel(); ++j)
                    grad[static_cast<std::int64_t>(off) + j] += weights.lambda_s * inv_n * gp[j];
            }
        }
    }

    if (weights.lambda_m > 0.0) {
        Tensor gm;
        double lm = manifold_loss(sr_batch, hr_batch, *encoder, spec, grad_sr ? &gm : nullptr);
        comp.manifold = lm * inv_n;
        if (grad_sr)
            for (std::int64_t j = 0; j < grad.numel(); ++j)
                grad[j] += weights.lambda_m * inv_n * gm[j];
    }

    if (weights.lambda_d > 0.0) {
        Tensor d_hr = discriminator->forward(hr_batch, mode);
        Tensor d_sr = discriminator->forward(sr_batch, mode);
        Tensor upstream({n, 1});
        for (int i = 0; i < n; ++i) {
            auto [gen_loss, disc_gain] = adversarial_losses(d_sr[i], d_hr[i]);
            comp.adv_gen += gen_loss * inv_n;
            comp.adv_disc += disc_gain * inv_n;
            upstream[i] = -inv_n / std::clamp(d_sr[i], kProbFloor, 1.0 - kProbFloor);
        }
        if (grad_sr) {
            Tensor gd = discriminator->backward(upstream);
            for (std::int64_t j = 0; j < grad.numel(); ++j) grad[j] += weights.lambda_d * gd[j];
        }
    }

    comp.total = comp.fidelity + weights.lambda_m * comp.manifold +
                 weights.lambda_s * comp.perceptual + weights.lambda_d * comp.adv_gen;
    if (grad_sr) *grad_sr = std::move(grad);
    return comp;
}

}  // namespace srq

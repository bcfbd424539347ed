#ifndef SRQ_TRAINING_HPP
#define SRQ_TRAINING_HPP

#include "srq/adam.hpp"
#include "srq/data.hpp"
#include "srq/losses.hpp"
#include "srq/networks.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srq {

struct TrainConfig {
    QuasiNormSpec quasi;
    LossWeights weights;
    int batch_size = 16;
    int iterations = 1000;
    int ae_iterations = 300;
    double lr_g = 1e-4;
    double lr_d = 1e-4;
    double lr_ae = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    int disc_steps_per_gen_step = 1;
    int checkpoint_every = 500;
    std::uint64_t seed = 0;
    NetConfig net;

    void validate() const;
    AdamConfig adam(double lr) const { return {lr, beta1, beta2, eps_adam}; }
};

struct AutoencoderResult {
    Network encoder;
    Network decoder;
    std::vector<double> loss_curve;  // reconstruction MSE per iteration
};

// Minimizes mean squared reconstruction error of decoder(encoder(x)) over
// the HR patches; the returned encoder is what manifold_loss consumes.
AutoencoderResult pretrain_autoencoder(const std::vector<Tensor>& train_hr,
                                       const TrainConfig& config);

// One Adam ascent step on the discriminator gain; generator untouched.
// Returns the gain value at the evaluated batch.
double train_step_discriminator(const Tensor& lr_batch, const Tensor& hr_batch,
                                Network& generator, Network& discriminator, Adam& opt_d,
                                const TrainConfig& config);

// One Adam descent step on the combined generator objective with the
// non-saturating adversarial surrogate; encoder and discriminator untouched.
LossComponents train_step_generator(const Tensor& lr_batch, const Tensor& hr_batch,
                                    Network& generator, Network* encoder,
                                    Network* discriminator, Adam& opt_g,
                                    const TrainConfig& config);

struct LogRow {
    int iter = 0;
    LossComponents comp;
};

struct TrainResult {
    Network generator;
    Network discriminator;
    std::vector<LogRow> log;
};

std::string log_to_csv(const std::vector<LogRow>& log);

// Alternating adversarial training over the train pairs. encoder must be
// supplied (pre-trained) whenever weights.lambda_m > 0. When run_dir is set,
// periodic checkpoints and the training log are written there.
TrainResult train(const std::vector<PatchPair>& train_pairs, const TrainConfig& config,
                  Network* encoder,
                  const std::optional<std::filesystem::path>& run_dir = std::nullopt);

}  // namespace srq

#endif

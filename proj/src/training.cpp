#include "srq/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace srq {

namespace {

// seeded epoch-wise shuffled batch index stream
class BatchSampler {
public:
    BatchSampler(std::size_t count, int batch_size, std::uint64_t seed)
        : count_(count), batch_size_(static_cast<std::size_t>(batch_size)), rng_(seed) {
        if (count == 0) throw std::invalid_argument("batch sampler: empty dataset");
        order_.resize(count);
        std::iota(order_.begin(), order_.end(), 0);
        reshuffle();
    }

    std::vector<std::size_t> next() {
        std::vector<std::size_t> batch;
        batch.reserve(batch_size_);
        for (std::size_t i = 0; i < batch_size_; ++i) {
            if (pos_ == count_) reshuffle();
            batch.push_back(order_[pos_++]);
        }
        return batch;
    }

private:
    void reshuffle() {
        for (std::size_t i = order_.size() - 1; i > 0; --i)
            std::swap(order_[i], order_[static_cast<std::size_t>(rng_.below(i + 1))]);
        pos_ = 0;
    }

    std::size_t count_, batch_size_, pos_ = 0;
    std::vector<std::size_t> order_;
    Rng rng_;
};

Tensor gather_batch(const std::vector<Tensor>& images, const std::vector<std::size_t>& idx) {
    std::vector<Tensor> sel;
    sel.reserve(idx.size());
    for (std::size_t i : idx) sel.push_back(images[i]);
    return stack_batch(sel);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + ": loss became non-finite");
}

}  // namespace

void TrainConfig::validate() const {
    quasi.validate();
    weights.validate();
    if (batch_size < 1 || iterations < 1 || ae_iterations < 1)
        throw std::invalid_argument("train config: counts must be positive");
    if (lr_g <= 0.0 || lr_d <= 0.0 || lr_ae <= 0.0)
        throw std::invalid_argument("train config: learning rates must be positive");
    if (disc_steps_per_gen_step < 1)
        throw std::invalid_argument("train config: disc_steps_per_gen_step must be >= 1");
}

AutoencoderResult pretrain_autoencoder(const std::vector<Tensor>& train_hr,
                                       const TrainConfig& config) {
    config.validate();
    if (train_hr.empty()) throw std::invalid_argument("pretrain_autoencoder: no training patches");

    Network encoder = build_encoder(config.net, derive_seed(config.seed, "ae-enc"));
    Network decoder = build_decoder(encoder, derive_seed(config.seed, "ae-dec"));

    auto params = encoder.params();
    for (auto& p : decoder.params()) params.push_back(p);
    Adam opt(params, config.adam(config.lr_ae));

    BatchSampler sampler(train_hr.size(), std::min<int>(config.batch_size,
                                                        static_cast<int>(train_hr.size())),
                         derive_seed(config.seed, "ae-batches"));
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(config.ae_iterations));

    for (int iter = 0; iter < config.ae_iterations; ++iter) {
        Tensor batch = gather_batch(train_hr, sampler.next());
        encoder.zero_grad();
        decoder.zero_grad();

        Tensor code = encoder.forward(batch, Mode::train);
        Tensor recon = decoder.forward(code, Mode::train);
        check_same_shape(recon, batch, "autoencoder reconstruction");

        const double inv = 1.0 / static_cast<double>(recon.numel());
        double mse = 0.0;
        Tensor grad(recon.shape());
        for (std::int64_t i = 0; i < recon.numel(); ++i) {
            double d = recon[i] - batch[i];
            mse += d * d * inv;
            grad[i] = 2.0 * d * inv;
        }
        require_finite(mse, "pretrain_autoencoder");
        curve.push_back(mse);

        encoder.backward(decoder.backward(grad));
        opt.step();
    }
    return {std::move(encoder), std::move(decoder), std::move(curve)};
}

double train_step_discriminator(const Tensor& lr_batch, const Tensor& hr_batch,
                                Network& generator, Network& discriminator, Adam& opt_d,
                                const TrainConfig& config) {
    (void)config;
    const int n = lr_batch.dim(0);
    Tensor sr = generator.forward(lr_batch, Mode::eval);
    check_same_shape(sr, hr_batch, "train_step_discriminator");

    discriminator.zero_grad();
    const double inv_n = 1.0 / n;
    double gain = 0.0;

    // hr term: minimize -log(d_hr)
    Tensor d_hr = discriminator.forward(hr_batch, Mode::train);
    Tensor up_hr({n, 1});
    for (int i = 0; i < n; ++i) {
        double ph = std::clamp(d_hr[i], kProbFloor, 1.0 - kProbFloor);
        gain += std::log(ph) * inv_n;
        up_hr[i] = -inv_n / ph;
    }
    discriminator.backward(up_hr);

    // sr term: minimize -log(1 - d_sr)
    Tensor d_sr = discriminator.forward(sr, Mode::train);
    Tensor up_sr({n, 1});
    for (int i = 0; i < n; ++i) {
        double ps = std::clamp(d_sr[i], kProbFloor, 1.0 - kProbFloor);
        gain += std::log(1.0 - ps) * inv_n;
        up_sr[i] = inv_n / (1.0 - ps);
    }
    discriminator.backward(up_sr);

    require_finite(gain, "train_step_discriminator");
    opt_d.step();
    return gain;
}

LossComponents train_step_generator(const Tensor& lr_batch, const Tensor& hr_batch,
                                    Network& generator, Network* encoder,
                                    Network* discriminator, Adam& opt_g,
                                    const TrainConfig& config) {
    generator.zero_grad();
    Tensor sr = generator.forward(lr_batch, Mode::train);
    Tensor grad_sr;
    LossComponents comp = generator_objective(sr, hr_batch, encoder, discriminator,
                                              config.quasi, config.weights, Mode::train,
                                              &grad_sr);
    require_finite(comp.total, "train_step_generator");
    generator.backward(grad_sr);
    opt_g.step();
    return comp;
}

std::string log_to_csv(const std::vector<LogRow>& log) {
    std::ostringstream os;
    os.precision(17);
    os << "iter,L_F,L_M,L_S,L_D_gen,L_D_disc,total\n";
    for (const auto& row : log)
        os << row.iter << "," << row.comp.fidelity << "," << row.comp.manifold << ","
           << row.comp.perceptual << "," << row.comp.adv_gen << "," << row.comp.adv_disc << ","
           << row.comp.total << "\n";
    return os.str();
}

TrainResult train(const std::vector<PatchPair>& train_pairs, const TrainConfig& config,
                  Network* encoder,
                  const std::optional<std::filesystem::path>& run_dir) {
    config.validate();
    if (train_pairs.empty()) throw std::invalid_argument("train: no training pairs");
    if (config.weights.lambda_m > 0.0 && !encoder)
        throw std::invalid_argument("train: encoder required (lambda_m > 0)");

    std::vector<Tensor> lrs, hrs;
    for (const auto& pair : train_pairs) {
        pair.validate();
        lrs.push_back(pair.lr);
        hrs.push_back(pair.hr);
    }

    NetConfig net = config.net;
    net.hr_size = hrs.front().dim(0);
    Network generator = build_generator(net, derive_seed(config.seed, "gen"));
    Network discriminator = build_discriminator(net, derive_seed(config.seed, "disc"));

    Adam opt_g(generator.params(), config.adam(config.lr_g));
    Adam opt_d(discriminator.params(), config.adam(config.lr_d));

    BatchSampler sampler(train_pairs.size(),
                         std::min<int>(config.batch_size, static_cast<int>(train_pairs.size())),
                         derive_seed(config.seed, "batches"));

    if (run_dir) std::filesystem::create_directories(*run_dir);
    std::vector<LogRow> log;
    log.reserve(static_cast<std::size_t>(config.iterations));

    // with a zero adversarial weight the generator objective never consults
    // the discriminator, so its updates would be dead work
    const bool adversarial = config.weights.lambda_d > 0.0;

    for (int iter = 1; iter <= config.iterations; ++iter) {
        double disc_gain = 0.0;
        for (int s = 0; adversarial && s < config.disc_steps_per_gen_step; ++s) {
            auto idx = sampler.next();
            disc_gain = train_step_discriminator(gather_batch(lrs, idx), gather_batch(hrs, idx),
                                                 generator, discriminator, opt_d, config);
        }
        auto idx = sampler.next();
        LossComponents comp = train_step_generator(gather_batch(lrs, idx), gather_batch(hrs, idx),
                                                   generator, encoder, &discriminator, opt_g,
                                                   config);
        comp.adv_disc = disc_gain;
        log.push_back({iter, comp});

        if (run_dir && config.checkpoint_every > 0 && iter % config.checkpoint_every == 0) {
            generator.save(*run_dir / ("generator_" + std::to_string(iter) + ".ckpt"));
            discriminator.save(*run_dir / ("discriminator_" + std::to_string(iter) + ".ckpt"));
        }
    }

    if (run_dir) {
        generator.save(*run_dir / "generator.ckpt");
        discriminator.save(*run_dir / "discriminator.ckpt");
        std::ofstream os(*run_dir / "train_log.csv");
        os << log_to_csv(log);
    }
    return {std::move(generator), std::move(discriminator), std::move(log)};
}

}  // namespace srq

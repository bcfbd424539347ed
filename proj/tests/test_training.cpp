#include "srq/training.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace srq;

namespace {

Tensor random_image(int h, int w, int c, std::uint64_t seed) {
    Tensor t({h, w, c});
    Rng rng(seed);
    for (double& v : t.flat()) v = rng.uniform();
    return t;
}

TrainConfig tiny_train_config() {
    TrainConfig tc;
    tc.batch_size = 4;
    tc.iterations = 4;
    tc.ae_iterations = 30;
    tc.checkpoint_every = 0;
    tc.net.res_blocks = 1;
    tc.net.gen_base = 8;
    tc.net.enc_base = 4;
    tc.net.enc_downsamples = 1;
    tc.net.disc_base = 8;
    tc.net.disc_stages = 2;
    tc.net.hr_size = 16;
    tc.net.upscale_stages = 2;
    return tc;
}

std::vector<PatchPair> make_pairs(int count, std::uint64_t seed) {
    std::vector<PatchPair> pairs;
    for (int i = 0; i < count; ++i) {
        PatchPair p;
        p.source_id = "p" + std::to_string(i);
        p.hr = random_image(16, 16, 3, seed + static_cast<std::uint64_t>(i));
        p.lr = synthesize_lr(p.hr);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace

TEST_CASE("autoencoder pretraining reduces reconstruction error") {
    std::vector<Tensor> patches;
    for (int i = 0; i < 8; ++i) patches.push_back(random_image(16, 16, 3, 50 + i));
    TrainConfig tc = tiny_train_config();
    AutoencoderResult r = pretrain_autoencoder(patches, tc);
    REQUIRE(r.loss_curve.size() == 30);
    for (double v : r.loss_curve) CHECK(std::isfinite(v));
    CHECK(r.loss_curve.back() < r.loss_curve.front());
    CHECK(r.encoder.role() == Role::encoder);
    CHECK(r.decoder.role() == Role::decoder);
}

TEST_CASE("autoencoder pretraining is deterministic in the seed") {
    std::vector<Tensor> patches;
    for (int i = 0; i < 6; ++i) patches.push_back(random_image(16, 16, 3, 60 + i));
    TrainConfig tc = tiny_train_config();
    tc.ae_iterations = 5;
    AutoencoderResult a = pretrain_autoencoder(patches, tc);
    AutoencoderResult b = pretrain_autoencoder(patches, tc);
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.encoder.param_snapshot() == b.encoder.param_snapshot());
}

TEST_CASE("discriminator step raises its gain and freezes the generator") {
    TrainConfig tc = tiny_train_config();
    Network gen = build_generator(tc.net, 1);
    Network disc = build_discriminator(tc.net, 2);
    Adam opt_d(disc.params(), tc.adam(1e-3));

    auto pairs = make_pairs(4, 70);
    std::vector<Tensor> lrs, hrs;
    for (auto& p : pairs) {
        lrs.push_back(p.lr);
        hrs.push_back(p.hr);
    }
    Tensor lr_batch = stack_batch(lrs), hr_batch = stack_batch(hrs);

    auto gen_before = gen.param_snapshot();
    double first = train_step_discriminator(lr_batch, hr_batch, gen, disc, opt_d, tc);
    double last = first;
    for (int i = 0; i < 15; ++i)
        last = train_step_discriminator(lr_batch, hr_batch, gen, disc, opt_d, tc);
    CHECK(last > first);  // repeated ascent on the same batch
    CHECK(gen.param_snapshot() == gen_before);
}

TEST_CASE("generator step lowers the objective and freezes the others") {
    TrainConfig tc = tiny_train_config();
    tc.quasi = {0.5, 1e-3};
    Network gen = build_generator(tc.net, 3);
    Network disc = build_discriminator(tc.net, 4);
    Network enc = build_encoder(tc.net, 5);
    Adam opt_g(gen.params(), tc.adam(1e-3));

    auto pairs = make_pairs(4, 80);
    std::vector<Tensor> lrs, hrs;
    for (auto& p : pairs) {
        lrs.push_back(p.lr);
        hrs.push_back(p.hr);
    }
    Tensor lr_batch = stack_batch(lrs), hr_batch = stack_batch(hrs);

    auto disc_params = disc.param_snapshot();
    auto enc_snapshot = enc.snapshot();  // params and running stats
    LossComponents first =
        train_step_generator(lr_batch, hr_batch, gen, &enc, &disc, opt_g, tc);
    LossComponents last = first;
    for (int i = 0; i < 15; ++i)
        last = train_step_generator(lr_batch, hr_batch, gen, &enc, &disc, opt_g, tc);
    CHECK(last.total < first.total);
    CHECK(disc.param_snapshot() == disc_params);
    CHECK(enc.snapshot() == enc_snapshot);
}

TEST_CASE("train runs end to end, logs, and checkpoints") {
    TrainConfig tc = tiny_train_config();
    tc.iterations = 3;
    tc.checkpoint_every = 2;
    auto pairs = make_pairs(6, 90);
    Network enc = build_encoder(tc.net, 6);

    auto dir = std::filesystem::temp_directory_path() / "srq_test_train";
    std::filesystem::remove_all(dir);
    TrainResult r = train(pairs, tc, &enc, dir);
    CHECK(r.log.size() == 3);
    for (const auto& row : r.log) CHECK(std::isfinite(row.comp.total));
    CHECK(std::filesystem::exists(dir / "generator.ckpt"));
    CHECK(std::filesystem::exists(dir / "discriminator.ckpt"));
    CHECK(std::filesystem::exists(dir / "generator_2.ckpt"));
    CHECK(std::filesystem::exists(dir / "train_log.csv"));

    std::string csv = log_to_csv(r.log);
    CHECK(csv.find("iter,L_F,L_M,L_S,L_D_gen,L_D_disc,total") == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("train is deterministic in the seed") {
    TrainConfig tc = tiny_train_config();
    tc.iterations = 2;
    tc.weights.lambda_m = 0.0;  // encoder-free keeps this test light
    auto pairs = make_pairs(5, 95);
    TrainResult a = train(pairs, tc, nullptr);
    TrainResult b = train(pairs, tc, nullptr);
    CHECK(a.generator.param_snapshot() == b.generator.param_snapshot());
    CHECK(a.log.back().comp.total == b.log.back().comp.total);

    tc.seed = 123;
    TrainResult c = train(pairs, tc, nullptr);
    CHECK(a.generator.param_snapshot() != c.generator.param_snapshot());
}

TEST_CASE("train requires an encoder when the manifold weight is positive") {
    TrainConfig tc = tiny_train_config();
    auto pairs = make_pairs(4, 99);
    CHECK_THROWS_WITH(train(pairs, tc, nullptr), doctest::Contains("encoder required"));
    CHECK_THROWS(train({}, tc, nullptr));
    TrainConfig bad = tc;
    bad.batch_size = 0;
    CHECK_THROWS(train(pairs, bad, nullptr));
}

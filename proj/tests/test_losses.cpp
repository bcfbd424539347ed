#include "srq/losses.hpp"
#include "srq/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace srq;

namespace {

Tensor random_image(int h, int w, int c, std::uint64_t seed) {
    Tensor t({h, w, c});
    Rng rng(seed);
    for (double& v : t.flat()) v = rng.uniform();
    return t;
}

Tensor random_batch(int n, int h, int w, int c, std::uint64_t seed) {
    Tensor t({n, h, w, c});
    Rng rng(seed);
    for (double& v : t.flat()) v = rng.uniform();
    return t;
}

// an encoder with no layers: forward is the identity map
Network identity_encoder() { return Network(Role::custom, NetConfig{}); }

}  // namespace

TEST_CASE("fidelity loss floor at sr == hr") {
    Tensor x = random_image(6, 6, 3, 1);
    QuasiNormSpec spec{0.5, 1e-3};
    // residual 0 everywhere: numel * eps^{q/2}
    double floor = 6.0 * 6.0 * 3.0 * std::pow(spec.epsilon, spec.q / 2.0);
    CHECK(fidelity_loss(x, x, spec) == doctest::Approx(floor).epsilon(1e-12));
}

TEST_CASE("fidelity loss reduces to sum of squares for q=2, eps=0") {
    Tensor sr = random_image(5, 4, 3, 2);
    Tensor hr = random_image(5, 4, 3, 3);
    QuasiNormSpec l2{2.0, 0.0};
    double sse = 0.0;
    for (std::int64_t i = 0; i < sr.numel(); ++i) sse += (sr[i] - hr[i]) * (sr[i] - hr[i]);
    CHECK(fidelity_loss(sr, hr, l2) == doctest::Approx(sse).epsilon(1e-12));

    Tensor g = fidelity_loss_grad(sr, hr, l2);
    for (std::int64_t i = 0; i < g.numel(); ++i)
        CHECK(g[i] == doctest::Approx(2.0 * (sr[i] - hr[i])).epsilon(1e-12));
}

TEST_CASE("fidelity gradient matches finite differences") {
    Tensor sr = random_image(4, 4, 3, 4);
    Tensor hr = random_image(4, 4, 3, 5);
    QuasiNormSpec spec{0.5, 1e-3};
    Tensor g = fidelity_loss_grad(sr, hr, spec);
    const double h = 1e-6;
    Rng pick(6);
    for (int t = 0; t < 20; ++t) {
        auto i = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(sr.numel())));
        Tensor hi = sr, lo = sr;
        hi[i] += h;
        lo[i] -= h;
        double fd = (fidelity_loss(hi, hr, spec) - fidelity_loss(lo, hr, spec)) / (2.0 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("manifold loss with identity encoder equals fidelity loss") {
    Tensor sr = random_image(4, 4, 3, 7);
    Tensor hr = random_image(4, 4, 3, 8);
    QuasiNormSpec spec{0.5, 1e-3};
    Network enc = identity_encoder();
    Tensor grad;
    double lm = manifold_loss(sr, hr, enc, spec, &grad);
    CHECK(lm == fidelity_loss(sr, hr, spec));
    Tensor gf = fidelity_loss_grad(sr, hr, spec);
    for (std::int64_t i = 0; i < grad.numel(); ++i) CHECK(grad[i] == gf[i]);
}

TEST_CASE("manifold loss through a real encoder matches finite differences") {
    NetConfig cfg;
    cfg.enc_base = 4;
    cfg.enc_downsamples = 1;
    Network enc = build_encoder(cfg, 9);
    Tensor sr = random_image(8, 8, 3, 10);
    Tensor hr = random_image(8, 8, 3, 11);
    QuasiNormSpec spec{0.5, 1e-3};
    Tensor grad;
    double base = manifold_loss(sr, hr, enc, spec, &grad);
    CHECK(base > 0.0);
    const double h = 1e-6;
    Rng pick(12);
    for (int t = 0; t < 15; ++t) {
        auto i = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(sr.numel())));
        Tensor hi = sr, lo = sr;
        hi[i] += h;
        lo[i] -= h;
        double fd = (manifold_loss(hi, hr, enc, spec) - manifold_loss(lo, hr, enc, spec)) / (2.0 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-3).scale(1.0));
    }
}

TEST_CASE("encoder parameters are untouched by manifold loss") {
    NetConfig cfg;
    cfg.enc_base = 4;
    cfg.enc_downsamples = 1;
    Network enc = build_encoder(cfg, 13);
    auto before = enc.snapshot();  // params AND bn running stats
    Tensor grad;
    manifold_loss(random_image(8, 8, 3, 14), random_image(8, 8, 3, 15), enc,
                  QuasiNormSpec{0.5, 1e-3}, &grad);
    CHECK(enc.snapshot() == before);
}

TEST_CASE("adversarial losses scalar examples") {
    auto [gen, disc] = adversarial_losses(0.5, 0.5);
    CHECK(gen == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
    CHECK(disc == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));

    // clamp keeps the perfect-discriminator case finite
    auto [gen0, disc0] = adversarial_losses(0.0, 1.0);
    CHECK(gen0 == doctest::Approx(-std::log(kProbFloor)).epsilon(1e-9));
    CHECK(std::isfinite(disc0));
    CHECK_THROWS(adversarial_losses(-0.1, 0.5));
    CHECK_THROWS(adversarial_losses(0.5, 1.5));
}

TEST_CASE("lambda zeroing reduces the objective to fidelity") {
    Tensor sr = random_batch(2, 8, 8, 3, 16);
    Tensor hr = random_batch(2, 8, 8, 3, 17);
    QuasiNormSpec spec{0.5, 1e-3};
    LossWeights w{0.0, 0.0, 0.0};
    Tensor grad;
    LossComponents comp = generator_objective(sr, hr, nullptr, nullptr, spec, w, Mode::eval, &grad);

    auto srs = unstack_batch(sr);
    auto hrs = unstack_batch(hr);
    double mean_f = 0.5 * (fidelity_loss(srs[0], hrs[0], spec) + fidelity_loss(srs[1], hrs[1], spec));
    CHECK(comp.total == doctest::Approx(mean_f).epsilon(1e-12));
    CHECK(comp.fidelity == doctest::Approx(mean_f).epsilon(1e-12));
    CHECK(comp.manifold == 0.0);
    CHECK(comp.perceptual == 0.0);
    CHECK(comp.adv_gen == 0.0);

    Tensor g0 = fidelity_loss_grad(srs[0], hrs[0], spec);
    for (std::int64_t i = 0; i < g0.numel(); ++i)
        CHECK(grad[i] == doctest::Approx(0.5 * g0[i]).epsilon(1e-12));
}

TEST_CASE("objective components are invariant to batch order") {
    Tensor sr = random_batch(2, 8, 8, 3, 18);
    Tensor hr = random_batch(2, 8, 8, 3, 19);
    auto srs = unstack_batch(sr);
    auto hrs = unstack_batch(hr);
    Tensor sr_swapped = stack_batch({srs[1], srs[0]});
    Tensor hr_swapped = stack_batch({hrs[1], hrs[0]});

    QuasiNormSpec spec{0.5, 1e-3};
    LossWeights w{0.2, 2.0, 0.0};
    Network enc = identity_encoder();
    LossComponents a = generator_objective(sr, hr, &enc, nullptr, spec, w, Mode::eval);
    LossComponents b = generator_objective(sr_swapped, hr_swapped, &enc, nullptr, spec, w, Mode::eval);
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
    CHECK(a.fidelity == doctest::Approx(b.fidelity).epsilon(1e-12));
    CHECK(a.perceptual == doctest::Approx(b.perceptual).epsilon(1e-12));
}

TEST_CASE("full objective gradient matches finite differences") {
    NetConfig cfg;
    cfg.enc_base = 4;
    cfg.enc_downsamples = 1;
    cfg.disc_base = 8;
    cfg.disc_stages = 1;
    cfg.hr_size = 8;
    Network enc = build_encoder(cfg, 20);
    Network disc = build_discriminator(cfg, 21);
    Tensor sr = random_batch(2, 8, 8, 3, 22);
    Tensor hr = random_batch(2, 8, 8, 3, 23);
    QuasiNormSpec spec{0.5, 1e-3};
    LossWeights w;  // defaults 0.2 / 2.0 / 0.016

    // eval mode so the discriminator is a fixed function during probing
    Tensor grad;
    generator_objective(sr, hr, &enc, &disc, spec, w, Mode::eval, &grad);
    auto value = [&](const Tensor& s) {
        return generator_objective(s, hr, &enc, &disc, spec, w, Mode::eval).total;
    };
    const double h = 1e-6;
    Rng pick(24);
    for (int t = 0; t < 20; ++t) {
        auto i = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(sr.numel())));
        Tensor hi = sr, lo = sr;
        hi[i] += h;
        lo[i] -= h;
        double fd = (value(hi) - value(lo)) / (2.0 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(2e-3).scale(1.0));
    }
}

TEST_CASE("missing networks are rejected") {
    Tensor sr = random_batch(1, 8, 8, 3, 25);
    Tensor hr = random_batch(1, 8, 8, 3, 26);
    QuasiNormSpec spec{0.5, 1e-3};
    CHECK_THROWS(generator_objective(sr, hr, nullptr, nullptr, spec, LossWeights{0.2, 0, 0}));
    CHECK_THROWS(generator_objective(sr, hr, nullptr, nullptr, spec, LossWeights{0, 0, 0.016}));
    CHECK_THROWS(LossWeights{-0.1, 0, 0}.validate());
}

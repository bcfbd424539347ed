#include "srq/adam.hpp"
#include "srq/layers.hpp"
#include "srq/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

using namespace srq;

namespace {

Tensor random_batch(int n, int h, int w, int c, std::uint64_t seed) {
    Tensor t({n, h, w, c});
    Rng rng(seed);
    for (double& v : t.flat()) v = rng.uniform(-1.0, 1.0);
    return t;
}

// finite-difference check of d loss / d input for loss = sum(y * coeffs)
void check_input_gradient(Layer& layer, const Tensor& x, Mode mode, double tol = 1e-5) {
    Tensor y = layer.forward(x, mode);
    Tensor dy(y.shape());
    Rng rng(999);
    for (double& v : dy.flat()) v = rng.uniform(-1.0, 1.0);
    Tensor dx = layer.backward(dy);
    REQUIRE(dx.same_shape(x));

    auto loss = [&](const Tensor& in) {
        Tensor out = layer.forward(in, mode);
        double s = 0.0;
        for (std::int64_t i = 0; i < out.numel(); ++i) s += out[i] * dy[i];
        return s;
    };
    const double h = 1e-6;
    Rng pick(1000);
    for (int trial = 0; trial < 25; ++trial) {
        auto i = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(x.numel())));
        Tensor hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        double fd = (loss(hi) - loss(lo)) / (2.0 * h);
        // re-prime the caches for the analytic pass
        layer.forward(x, mode);
        layer.backward(dy);
        CHECK(dx[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
    }
}

// finite-difference check of d loss / d params
void check_param_gradient(Layer& layer, const Tensor& x, Mode mode, double tol = 1e-5) {
    Tensor y = layer.forward(x, mode);
    Tensor dy(y.shape());
    Rng rng(998);
    for (double& v : dy.flat()) v = rng.uniform(-1.0, 1.0);

    std::vector<ParamView> params;
    layer.collect_params(params);
    REQUIRE(!params.empty());

    auto loss = [&]() {
        Tensor out = layer.forward(x, mode);
        double s = 0.0;
        for (std::int64_t i = 0; i < out.numel(); ++i) s += out[i] * dy[i];
        return s;
    };
    const double h = 1e-6;
    Rng pick(997);
    for (const auto& p : params) {
        for (int trial = 0; trial < 8; ++trial) {
            auto i = static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(p.size)));
            for (std::int64_t k = 0; k < p.size; ++k) p.grad[k] = 0.0;
            layer.forward(x, mode);
            layer.backward(dy);
            double analytic = p.grad[i];
            double saved = p.value[i];
            p.value[i] = saved + h;
            double hi = loss();
            p.value[i] = saved - h;
            double lo = loss();
            p.value[i] = saved;
            CHECK(analytic == doctest::Approx((hi - lo) / (2.0 * h)).epsilon(tol).scale(1.0));
        }
    }
}

}  // namespace

TEST_CASE("conv2d matches a dense convolution oracle") {
    Rng rng(1);
    Conv2d conv(3, 2, 3, 1, rng);
    Tensor x = random_batch(2, 5, 4, 2, 2);
    Tensor y = conv.forward(x, Mode::eval);
    REQUIRE(y.shape() == std::vector<int>{2, 5, 4, 3});

    std::vector<ParamView> params;
    conv.collect_params(params);
    REQUIRE(params.size() == 2);
    const double* w = params[0].value;  // (ky, kx, cin, cout)
    const double* b = params[1].value;

    for (int n = 0; n < 2; ++n)
        for (int oy = 0; oy < 5; ++oy)
            for (int ox = 0; ox < 4; ++ox)
                for (int co = 0; co < 3; ++co) {
                    double acc = b[co];
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx)
                            for (int ci = 0; ci < 2; ++ci) {
                                int iy = oy + ky - 1, ix = ox + kx - 1;
                                if (iy < 0 || iy >= 5 || ix < 0 || ix >= 4) continue;  // zero pad
                                acc += x.at(n, iy, ix, ci) * w[((ky * 3 + kx) * 2 + ci) * 3 + co];
                            }
                    CHECK(y.at(n, oy, ox, co) == doctest::Approx(acc).epsilon(1e-12));
                }
}

TEST_CASE("conv2d stride 2 halves spatial dims") {
    Rng rng(3);
    Conv2d conv(3, 1, 2, 2, rng);
    Tensor x = random_batch(1, 8, 8, 1, 4);
    Tensor y = conv.forward(x, Mode::eval);
    CHECK(y.shape() == std::vector<int>{1, 4, 4, 2});
}

TEST_CASE("conv2d gradients") {
    Rng rng(5);
    Conv2d conv(3, 2, 2, 1, rng);
    Tensor x = random_batch(2, 4, 4, 2, 6);
    check_input_gradient(conv, x, Mode::eval);
    check_param_gradient(conv, x, Mode::eval);

    Conv2d strided(3, 2, 2, 2, rng);
    check_input_gradient(strided, x, Mode::eval);
    check_param_gradient(strided, x, Mode::eval);
}

TEST_CASE("relu and leaky relu") {
    Tensor x({1, 1, 2, 2}, std::vector<double>{-1.0, 2.0, -0.5, 0.0});
    Relu relu;
    Tensor y = relu.forward(x, Mode::eval);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 2.0);
    LeakyRelu leaky(0.2);
    Tensor z = leaky.forward(x, Mode::eval);
    CHECK(z[0] == doctest::Approx(-0.2));
    CHECK(z[1] == 2.0);

    Tensor r = random_batch(2, 3, 3, 2, 7);
    check_input_gradient(relu, r, Mode::eval);
    check_input_gradient(leaky, r, Mode::eval);
}

TEST_CASE("batchnorm normalizes in train mode") {
    BatchNorm bn(3);
    Tensor x = random_batch(4, 5, 5, 3, 8);
    Tensor y = bn.forward(x, Mode::train);
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        double n = 4.0 * 5 * 5;
        for (int b = 0; b < 4; ++b)
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) mean += y.at(b, i, j, c);
        mean /= n;
        for (int b = 0; b < 4; ++b)
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    double d = y.at(b, i, j, c) - mean;
                    var += d * d;
                }
        var /= n;
        CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shrinks it slightly
    }
}

TEST_CASE("batchnorm gradients (train and eval)") {
    BatchNorm bn(2);
    Tensor x = random_batch(3, 4, 4, 2, 9);
    check_input_gradient(bn, x, Mode::train, 1e-4);
    check_param_gradient(bn, x, Mode::train, 1e-4);
    bn.forward(x, Mode::train);  // populate running stats
    check_input_gradient(bn, x, Mode::eval, 1e-4);
    check_param_gradient(bn, x, Mode::eval, 1e-4);
}

TEST_CASE("upsample2x nearest neighbor") {
    Tensor x({1, 2, 2, 1}, std::vector<double>{1, 2, 3, 4});
    Upsample2x up;
    Tensor y = up.forward(x, Mode::eval);
    REQUIRE(y.shape() == std::vector<int>{1, 4, 4, 1});
    CHECK(y.at(0, 0, 0, 0) == 1);
    CHECK(y.at(0, 0, 1, 0) == 1);
    CHECK(y.at(0, 1, 1, 0) == 1);
    CHECK(y.at(0, 2, 3, 0) == 4);
    Tensor r = random_batch(2, 3, 3, 2, 10);
    check_input_gradient(up, r, Mode::eval);
}

TEST_CASE("flatten, dense, sigmoid, smooth clamp") {
    Rng rng(11);
    Flatten flat;
    Tensor x = random_batch(2, 2, 2, 3, 12);
    Tensor y = flat.forward(x, Mode::eval);
    CHECK(y.shape() == std::vector<int>{2, 12});
    check_input_gradient(flat, x, Mode::eval);

    Dense dense(12, 4, rng);
    check_input_gradient(dense, y, Mode::eval);
    check_param_gradient(dense, y, Mode::eval);

    Sigmoid sig;
    Tensor z({1, 2}, std::vector<double>{0.0, 2.0});
    Tensor s = sig.forward(z, Mode::eval);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    check_input_gradient(sig, y, Mode::eval);

    SmoothClamp clamp;
    Tensor half({1, 1, 1, 1}, std::vector<double>{0.5});
    CHECK(clamp.forward(half, Mode::eval)[0] == doctest::Approx(0.5));  // fixed point
    check_input_gradient(clamp, x, Mode::eval);
}

TEST_CASE("residual block is the identity at init") {
    Rng rng(13);
    auto block = make_res_block(4, rng);
    Tensor x = random_batch(2, 6, 6, 4, 14);
    Tensor y = block->forward(x, Mode::eval);
    for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("residual block gradients after perturbation") {
    Rng rng(15);
    auto block = make_res_block(2, rng);
    std::vector<ParamView> params;
    block->collect_params(params);
    Rng perturb(16);
    for (auto& p : params)
        for (std::int64_t i = 0; i < p.size; ++i) p.value[i] += 0.05 * perturb.normal();
    Tensor x = random_batch(2, 4, 4, 2, 17);
    check_input_gradient(*block, x, Mode::train, 1e-4);
}

TEST_CASE("adam minimizes a quadratic bowl") {
    std::vector<double> theta = {5.0, -3.0};
    std::vector<double> grad(2, 0.0);
    std::vector<ParamView> views{{"theta", theta.data(), grad.data(), 2}};
    Adam opt(views, {0.1, 0.9, 0.999, 1e-8});
    for (int it = 0; it < 500; ++it) {
        grad[0] = 2.0 * theta[0];
        grad[1] = 2.0 * theta[1];
        opt.step();
    }
    CHECK(std::abs(theta[0]) < 1e-2);
    CHECK(std::abs(theta[1]) < 1e-2);
    CHECK(opt.step_count() == 500);
    grad[0] = std::nan("");
    CHECK_THROWS(opt.step());
}

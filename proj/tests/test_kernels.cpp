#include "srq/kernels.hpp"
#include "srq/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace srq;

namespace {

Tensor random_image(int h, int w, int c, std::uint64_t seed) {
    Tensor t({h, w, c});
    Rng rng(seed);
    for (double& v : t.flat()) v = rng.uniform();
    return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("gaussian kernel is odd, symmetric, normalized") {
    for (double sigma : {0.5, 1.2, 3.0}) {
        auto k = gaussian_kernel_1d(sigma);
        CHECK(k.size() % 2 == 1);
        CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
        for (std::size_t i = 0; i < k.size() / 2; ++i) CHECK(k[i] == k[k.size() - 1 - i]);
        // truncation at 4 sigma
        CHECK(static_cast<int>(k.size()) == 2 * static_cast<int>(std::ceil(4.0 * sigma)) + 1);
    }
}

TEST_CASE("reflect index") {
    CHECK(reflect_index(0, 5) == 0);
    CHECK(reflect_index(-1, 5) == 1);
    CHECK(reflect_index(-2, 5) == 2);
    CHECK(reflect_index(5, 5) == 3);
    CHECK(reflect_index(6, 5) == 2);
    CHECK(reflect_index(3, 1) == 0);
}

TEST_CASE("blur preserves constants and mass") {
    Tensor img({16, 16, 3}, 0.5);
    Tensor out = kernels::gaussian_blur(img, 1.2);
    for (std::int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == doctest::Approx(0.5).epsilon(1e-14));
    // reflective boundaries conserve the total mass of a symmetric kernel
    Tensor rnd = random_image(12, 12, 1, 3);
    Tensor b = kernels::gaussian_blur(rnd, 0.8);
    CHECK(b.same_shape(rnd));
}

TEST_CASE("parallel blur matches serial dense-convolution reference") {
    for (double sigma : {0.7, 1.2, 2.5}) {
        Tensor img = random_image(20, 17, 3, 99);
        CHECK(max_abs_diff(kernels::gaussian_blur(img, sigma), serial::gaussian_blur(img, sigma)) <
              1e-12);
    }
}

TEST_CASE("blur is shift covariant in the interior") {
    Tensor img = random_image(24, 24, 1, 5);
    Tensor shifted({24, 24, 1});
    const int s = 3;
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x)
            shifted.at(y, x, 0) = img.at(reflect_index(y - s, 24), reflect_index(x - s, 24), 0);
    Tensor a = kernels::gaussian_blur(img, 1.0);
    Tensor b = kernels::gaussian_blur(shifted, 1.0);
    const int m = 8;  // margin beyond kernel radius + shift
    for (int y = m; y < 24 - m; ++y)
        for (int x = m; x < 24 - m; ++x)
            CHECK(b.at(y, x, 0) == doctest::Approx(a.at(y - s, x - s, 0)).epsilon(1e-12));
}

TEST_CASE("decimate picks the offset-0 grid") {
    Tensor img({8, 8, 1});
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) img.at(y, x, 0) = y * 8 + x;
    Tensor d = kernels::decimate(img, 4);
    CHECK(d.dim(0) == 2);
    CHECK(d.dim(1) == 2);
    CHECK(d.at(0, 0, 0) == 0);
    CHECK(d.at(0, 1, 0) == 4);
    CHECK(d.at(1, 0, 0) == 32);
    CHECK(d.at(1, 1, 0) == 36);
}

TEST_CASE("box downsample averages 2x2 blocks") {
    Tensor img({4, 4, 1});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(y, x, 0) = y * 4 + x;
    Tensor d = kernels::box_downsample_2x(img);
    CHECK(d.dim(0) == 2);
    CHECK(d.at(0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(d.at(1, 1, 0) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));
}

TEST_CASE("checkerboard local variance matches the window oracle") {
    // {0,1} checkerboard: a 3x3 window holds 4 or 5 ones; population variance
    // is p(1-p) with p = 4/9 or 5/9, both equal to 20/81.
    Tensor img({10, 10, 1});
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) img.at(y, x, 0) = (x + y) % 2;
    Tensor v = kernels::local_variance_map(img, 3);
    for (int y = 1; y < 9; ++y)
        for (int x = 1; x < 9; ++x)
            CHECK(v.at(y, x, 0) == doctest::Approx(20.0 / 81.0).epsilon(1e-12));
}

TEST_CASE("parallel local variance matches the naive reference") {
    Tensor img = random_image(23, 19, 1, 8);
    CHECK(max_abs_diff(kernels::local_variance_map(img, 5), serial::local_variance_map(img, 5)) <
          1e-12);
    CHECK(max_abs_diff(kernels::local_variance_map(img, 3), serial::local_variance_map(img, 3)) <
          1e-12);
}

TEST_CASE("luminance is the channel mean") {
    Tensor img = random_image(6, 6, 3, 21);
    Tensor l = kernels::luminance(img);
    CHECK(l.dim(2) == 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            CHECK(l.at(y, x, 0) ==
                  doctest::Approx((img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0));
}

TEST_CASE("clamp01") {
    Tensor img({1, 3, 1}, std::vector<double>{-0.5, 0.25, 1.7});
    kernels::clamp01(img);
    CHECK(img[0] == 0.0);
    CHECK(img[1] == 0.25);
    CHECK(img[2] == 1.0);
}

#ifdef _OPENMP
TEST_CASE("kernels are bit-identical across thread counts") {
    Tensor img = random_image(33, 29, 3, 77);
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    Tensor blur1 = kernels::gaussian_blur(img, 1.4);
    Tensor var1 = kernels::local_variance_map(kernels::luminance(img), 5);
    omp_set_num_threads(4);
    Tensor blur4 = kernels::gaussian_blur(img, 1.4);
    Tensor var4 = kernels::local_variance_map(kernels::luminance(img), 5);
    omp_set_num_threads(saved);
    CHECK(max_abs_diff(blur1, blur4) == 0.0);
    CHECK(max_abs_diff(var1, var4) == 0.0);
}
#endif

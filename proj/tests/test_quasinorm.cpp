#include "srq/quasinorm.hpp"
#include "srq/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace srq;

namespace {

double fd_partial(const std::vector<double>& a, std::size_t i, const QuasiNormSpec& spec,
                  double h = 1e-6) {
    std::vector<double> hi = a, lo = a;
    hi[i] += h;
    lo[i] -= h;
    return (quasi_norm_pow(hi, spec) - quasi_norm_pow(lo, spec)) / (2.0 * h);
}

}  // namespace

TEST_CASE("zero vector scalar oracle") {
    std::vector<double> a(3, 0.0);
    QuasiNormSpec spec{0.5, 1e-3};
    // 3 * (0 + 1e-3)^{0.25}
    CHECK(quasi_norm_pow(a, spec) == doctest::Approx(3.0 * std::pow(1e-3, 0.25)).epsilon(1e-12));
}

TEST_CASE("q=2 eps=0 recovers the squared L2 norm") {
    std::vector<double> a = {0.3, -1.5, 2.0, 0.0};
    QuasiNormSpec spec{2.0, 0.0};
    double sse = 0.0;
    for (double v : a) sse += v * v;
    CHECK(quasi_norm_pow(a, spec) == doctest::Approx(sse).epsilon(1e-15));
    auto g = quasi_norm_grad(a, spec);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(g[i] == 2.0 * a[i]);
}

TEST_CASE("gradient matches central finite differences") {
    QuasiNormSpec spec{0.5, 1e-3};
    std::vector<double> a = {0.5, -0.25};
    auto g = quasi_norm_grad(a, spec);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(g[i] == doctest::Approx(fd_partial(a, i, spec)).epsilon(1e-4));

    Rng rng(11);
    for (double q : {0.3, 0.5, 0.8, 1.0, 2.0}) {
        QuasiNormSpec s{q, 1e-3};
        std::vector<double> v(16);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        auto gv = quasi_norm_grad(v, s);
        for (std::size_t i = 0; i < v.size(); ++i) {
            double fd = fd_partial(v, i, s);
            CHECK(gv[i] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("influence peaks at sqrt(eps/(1-q)) and decays for q<1") {
    for (double q : {0.3, 0.5, 0.8}) {
        QuasiNormSpec spec{q, 1e-3};
        double rstar = std::sqrt(spec.epsilon / (1.0 - q));
        double prev = 0.0;
        for (int i = 1; i <= 50; ++i) {
            double r = rstar * i / 50.0;
            double g = quasi_norm_influence(r, spec);
            CHECK(g > prev);  // strictly increasing up to the peak
            prev = g;
        }
        prev = quasi_norm_influence(rstar, spec);
        for (int i = 1; i <= 50; ++i) {
            double r = rstar * (1.0 + 99.0 * i / 50.0);
            double g = quasi_norm_influence(r, spec);
            CHECK(g < prev);  // strictly decreasing beyond it
            prev = g;
        }
    }
    QuasiNormSpec l2{2.0, 1e-3};
    for (double r : {0.1, 0.5, 3.0}) CHECK(quasi_norm_influence(r, l2) == 2.0 * r);
}

TEST_CASE("validation rejects bad parameters") {
    CHECK_THROWS(QuasiNormSpec{0.0, 1e-3}.validate());
    CHECK_THROWS(QuasiNormSpec{2.5, 1e-3}.validate());
    CHECK_THROWS(QuasiNormSpec{-0.5, 1e-3}.validate());
    CHECK_THROWS(QuasiNormSpec{0.5, -1e-3}.validate());
    CHECK_THROWS(QuasiNormSpec{0.5, 0.0}.validate());  // eps=0 only for q=2
    CHECK_NOTHROW(QuasiNormSpec{2.0, 0.0}.validate());
    std::vector<double> bad = {0.1, std::nan("")};
    CHECK_THROWS(quasi_norm_pow(bad, QuasiNormSpec{0.5, 1e-3}));
    CHECK_THROWS(quasi_norm_grad(bad, QuasiNormSpec{0.5, 1e-3}));
}

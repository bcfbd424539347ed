// Benchmark of the OpenMP kernels against the serial reference
// implementations, with a max-abs-difference agreement check per kernel.
#include "srq/kernels.hpp"
#include "srq/rng.hpp"
#include "srq/ssim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

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
    double m = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

template <typename F>
double time_ms(F&& fn, int repeats) {
    fn();  // warm-up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   max|diff| %.3e\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
    int size = argc > 1 ? std::atoi(argv[1]) : 512;
    int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
#ifdef _OPENMP
    std::printf("image %dx%dx3, %d repeats, %d OpenMP threads\n", size, size, repeats,
                omp_get_max_threads());
#else
    std::printf("image %dx%dx3, %d repeats, OpenMP disabled\n", size, size, repeats);
#endif

    Tensor img = random_image(size, size, 3, 42);
    Tensor ref = random_image(size, size, 3, 43);

    {
        Tensor a, b;
        double s = time_ms([&] { a = serial::gaussian_blur(img, 1.6); }, repeats);
        double p = time_ms([&] { b = kernels::gaussian_blur(img, 1.6); }, repeats);
        report("gaussian_blur", s, p, max_abs_diff(a, b));
    }
    {
        Tensor la = kernels::luminance(img);
        Tensor a, b;
        double s = time_ms([&] { a = serial::local_variance_map(la, 5); }, repeats);
        double p = time_ms([&] { b = kernels::local_variance_map(la, 5); }, repeats);
        report("local_variance_map", s, p, max_abs_diff(a, b));
    }
    {
        double a = 0, b = 0;
        double s = time_ms([&] { a = serial::sssim(img, ref); }, repeats);
        double p = time_ms([&] { b = sssim(img, ref); }, repeats);
        std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   |diff| %.3e\n",
                    "sssim", s, p, s / p, std::abs(a - b));
    }
    return 0;
}

#include "srq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srq {

std::vector<double> gaussian_kernel_1d(double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian sigma must be positive");
    int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

void require_rank3(const Tensor& img, const char* what) {
    if (img.rank() != 3) throw std::invalid_argument(std::string(what) + ": expected rank-3 image");
}

// Horizontal then vertical pass; each output element gathers in a fixed order.
Tensor blur_separable(const Tensor& img, const std::vector<double>& k) {
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    const int radius = static_cast<int>(k.size()) / 2;
    Tensor tmp({h, w, c});
    Tensor out({h, w, c});

#pragma omp parallel for collapse(2) schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t)
                    acc += k[static_cast<std::size_t>(t + radius)] *
                           img.at(y, reflect_index(x + t, w), ch);
                tmp.at(y, x, ch) = acc;
            }

#pragma omp parallel for collapse(2) schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t)
                    acc += k[static_cast<std::size_t>(t + radius)] *
                           tmp.at(reflect_index(y + t, h), x, ch);
                out.at(y, x, ch) = acc;
            }
    return out;
}

Tensor variance_map(const Tensor& img, int window) {
    require_rank3(img, "local_variance_map");
    if (img.dim(2) != 1) throw std::invalid_argument("local_variance_map: expected single channel");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("local_variance_map: window must be odd and >= 3");
    const int h = img.dim(0), w = img.dim(1);
    const int radius = window / 2;
    const double n = static_cast<double>(window) * window;
    Tensor out({h, w, 1});

#pragma omp parallel for collapse(2) schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sum = 0.0, sum2 = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    double v = img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), 0);
                    sum += v;
                    sum2 += v * v;
                }
            double mean = sum / n;
            out.at(y, x, 0) = std::max(0.0, sum2 / n - mean * mean);
        }
    return out;
}

}  // namespace

namespace kernels {

Tensor gaussian_blur(const Tensor& img, double sigma) {
    require_rank3(img, "gaussian_blur");
    return blur_separable(img, gaussian_kernel_1d(sigma));
}

Tensor decimate(const Tensor& img, int stride) {
    require_rank3(img, "decimate");
    if (stride < 1) throw std::invalid_argument("decimate: stride must be >= 1");
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    const int oh = (h + stride - 1) / stride, ow = (w + stride - 1) / stride;
    Tensor out({oh, ow, c});
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch)
                out.at(y, x, ch) = img.at(y * stride, x * stride, ch);
    return out;
}

Tensor box_downsample_2x(const Tensor& img) {
    require_rank3(img, "box_downsample_2x");
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    if (h < 2 || w < 2) throw std::invalid_argument("box_downsample_2x: image too small");
    const int oh = h / 2, ow = w / 2;
    Tensor out({oh, ow, c});
#pragma omp parallel for collapse(2) schedule(static)
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch)
                out.at(y, x, ch) = 0.25 * (img.at(2 * y, 2 * x, ch) + img.at(2 * y, 2 * x + 1, ch) +
                                           img.at(2 * y + 1, 2 * x, ch) + img.at(2 * y + 1, 2 * x + 1, ch));
    return out;
}

Tensor local_variance_map(const Tensor& img, int window) {
    return variance_map(img, window);
}

Tensor luminance(const Tensor& img) {
    require_rank3(img, "luminance");
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    Tensor out({h, w, 1});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int ch = 0; ch < c; ++ch) s += img.at(y, x, ch);
            out.at(y, x, 0) = s / c;
        }
    return out;
}

void clamp01(Tensor& img) {
    for (auto& v : img.flat()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace kernels

// Dense, single-threaded baselines. gaussian_blur convolves with the full
// 2-D outer-product kernel instead of two separable passes, so it agrees
// with the parallel kernel only up to rounding.
namespace serial {

Tensor gaussian_blur(const Tensor& img, double sigma) {
    require_rank3(img, "gaussian_blur");
    const auto k = gaussian_kernel_1d(sigma);
    const int radius = static_cast<int>(k.size()) / 2;
    const int h = img.dim(0), w = img.dim(1), c = img.dim(2);
    Tensor out({h, w, c});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx)
                        acc += k[static_cast<std::size_t>(dy + radius)] *
                               k[static_cast<std::size_t>(dx + radius)] *
                               img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), ch);
                out.at(y, x, ch) = acc;
            }
    return out;
}

Tensor local_variance_map(const Tensor& img, int window) {
    require_rank3(img, "local_variance_map");
    if (img.dim(2) != 1) throw std::invalid_argument("local_variance_map: expected single channel");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("local_variance_map: window must be odd and >= 3");
    const int h = img.dim(0), w = img.dim(1);
    const int radius = window / 2;
    const double n = static_cast<double>(window) * window;
    Tensor out({h, w, 1});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double mean = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    mean += img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), 0);
            mean /= n;
            double var = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    double d = img.at(reflect_index(y + dy, h), reflect_index(x + dx, w), 0) - mean;
                    var += d * d;
                }
            out.at(y, x, 0) = var / n;
        }
    return out;
}

}  // namespace serial

}  // namespace srq

#include "srq/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace srq {

namespace {

struct WindowStats {
    double mu_x, mu_y;   // window means
    double a1, a2;       // 2*mu_x*mu_y + c1, 2*cov + c2
    double b1, b2;       // mu_x^2 + mu_y^2 + c1, var_x + var_y + c2
    double value;        // a1*a2 / (b1*b2)
};

WindowStats window_stats(const Tensor& x, const Tensor& y, int y0, int x0, int ch,
                         double c1, double c2) {
    constexpr int k = kSsimWindow;
    constexpr double n = static_cast<double>(k * k);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx) {
            double a = x.at(y0 + dy, x0 + dx, ch);
            double b = y.at(y0 + dy, x0 + dx, ch);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
    WindowStats s{};
    s.mu_x = sx / n;
    s.mu_y = sy / n;
    double var_x = sxx / n - s.mu_x * s.mu_x;
    double var_y = syy / n - s.mu_y * s.mu_y;
    double cov = sxy / n - s.mu_x * s.mu_y;
    s.a1 = 2.0 * s.mu_x * s.mu_y + c1;
    s.a2 = 2.0 * cov + c2;
    s.b1 = s.mu_x * s.mu_x + s.mu_y * s.mu_y + c1;
    s.b2 = var_x + var_y + c2;
    s.value = (s.a1 * s.a2) / (s.b1 * s.b2);
    return s;
}

void check_pair(const Tensor& sr, const Tensor& hr) {
    if (sr.rank() != 3 || hr.rank() != 3)
        throw std::invalid_argument("sssim: expected rank-3 images");
    check_same_shape(sr, hr, "sssim");
    if (sr.dim(0) < kSsimWindow || sr.dim(1) < kSsimWindow)
        throw std::invalid_argument("sssim: spatial dims must be >= 5");
}

}  // namespace

double ssim_window(std::span<const double> x, std::span<const double> y,
                   double c1, double c2) {
    if (x.size() != y.size()) throw std::invalid_argument("ssim_window: size mismatch");
    if (x.empty()) throw std::invalid_argument("ssim_window: empty window");
    if (c1 <= 0.0 || c2 <= 0.0) throw std::invalid_argument("ssim_window: constants must be positive");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    double mx = sx / n, my = sy / n;
    double vx = sxx / n - mx * mx;
    double vy = syy / n - my * my;
    double cov = sxy / n - mx * my;
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

double sssim(const Tensor& sr, const Tensor& hr) {
    check_pair(sr, hr);
    const int h = sr.dim(0), w = sr.dim(1), c = sr.dim(2);
    const int wh = h - kSsimWindow + 1, ww = w - kSsimWindow + 1;
    std::vector<double> vals(static_cast<std::size_t>(wh) * ww * c);
#pragma omp parallel for collapse(2) schedule(static)
    for (int y0 = 0; y0 < wh; ++y0)
        for (int x0 = 0; x0 < ww; ++x0)
            for (int ch = 0; ch < c; ++ch)
                vals[(static_cast<std::size_t>(y0) * ww + x0) * c + ch] =
                    window_stats(sr, hr, y0, x0, ch, kSsimC1, kSsimC2).value;
    double total = 0.0;
    for (double v : vals) total += v;
    return total;
}

Tensor sssim_grad(const Tensor& sr, const Tensor& hr) {
    check_pair(sr, hr);
    constexpr int k = kSsimWindow;
    constexpr double n = static_cast<double>(k * k);
    const int h = sr.dim(0), w = sr.dim(1), c = sr.dim(2);
    const int wh = h - k + 1, ww = w - k + 1;

    std::vector<WindowStats> stats(static_cast<std::size_t>(wh) * ww * c);
#pragma omp parallel for collapse(2) schedule(static)
    for (int y0 = 0; y0 < wh; ++y0)
        for (int x0 = 0; x0 < ww; ++x0)
            for (int ch = 0; ch < c; ++ch)
                stats[(static_cast<std::size_t>(y0) * ww + x0) * c + ch] =
                    window_stats(sr, hr, y0, x0, ch, kSsimC1, kSsimC2);

    // Gather per pixel over the <= 25 windows containing it; deterministic
    // for any thread count.
    Tensor grad({h, w, c});
#pragma omp parallel for collapse(2) schedule(static)
    for (int py = 0; py < h; ++py)
        for (int px = 0; px < w; ++px)
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                const double xi = sr.at(py, px, ch);
                const double yi = hr.at(py, px, ch);
                const int y_lo = std::max(0, py - k + 1), y_hi = std::min(py, wh - 1);
                const int x_lo = std::max(0, px - k + 1), x_hi = std::min(px, ww - 1);
                for (int wy = y_lo; wy <= y_hi; ++wy)
                    for (int wx = x_lo; wx <= x_hi; ++wx) {
                        const WindowStats& s =
                            stats[(static_cast<std::size_t>(wy) * ww + wx) * c + ch];
                        // d ssim / d x_i with uniform window statistics
                        acc += (2.0 / n) *
                               ((s.mu_y * s.a2 + s.a1 * (yi - s.mu_y)) / (s.b1 * s.b2) -
                                s.value * (s.mu_x / s.b1 + (xi - s.mu_x) / s.b2));
                    }
                grad.at(py, px, ch) = acc;
            }
    return grad;
}

double perceptual_loss(const Tensor& sr, const Tensor& hr) { return -sssim(sr, hr); }

Tensor perceptual_loss_grad(const Tensor& sr, const Tensor& hr) {
    Tensor g = sssim_grad(sr, hr);
    for (auto& v : g.flat()) v = -v;
    return g;
}

namespace serial {

double sssim(const Tensor& sr, const Tensor& hr) {
    check_pair(sr, hr);
    const int h = sr.dim(0), w = sr.dim(1), c = sr.dim(2);
    constexpr int k = kSsimWindow;
    std::vector<double> wx(k * k), wy(k * k);
    double total = 0.0;
    for (int ch = 0; ch < c; ++ch)
        for (int y0 = 0; y0 + k <= h; ++y0)
            for (int x0 = 0; x0 + k <= w; ++x0) {
                for (int dy = 0; dy < k; ++dy)
                    for (int dx = 0; dx < k; ++dx) {
                        wx[static_cast<std::size_t>(dy * k + dx)] = sr.at(y0 + dy, x0 + dx, ch);
                        wy[static_cast<std::size_t>(dy * k + dx)] = hr.at(y0 + dy, x0 + dx, ch);
                    }
                total += ssim_window(wx, wy);
            }
    return total;
}

}  // namespace serial

}  // namespace srq

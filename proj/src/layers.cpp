#include "srq/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace srq {

namespace {

void require_rank4(const Tensor& x, const char* what) {
    if (x.rank() != 4) throw std::invalid_argument(std::string(what) + ": expected (N,H,W,C) input");
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int kernel, int channels_in, int channels_out, int stride, Rng& rng,
               bool zero_init)
    : kernel_(kernel), cin_(channels_in), cout_(channels_out), stride_(stride) {
    if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("conv kernel must be odd");
    if (stride != 1 && stride != 2) throw std::invalid_argument("conv stride must be 1 or 2");
    if (channels_in < 1 || channels_out < 1) throw std::invalid_argument("conv channels must be positive");
    std::size_t wsize = static_cast<std::size_t>(kernel) * kernel * channels_in * channels_out;
    weight_.resize(wsize);
    weight_grad_.resize(wsize, 0.0);
    bias_.resize(static_cast<std::size_t>(channels_out), 0.0);
    bias_grad_.resize(static_cast<std::size_t>(channels_out), 0.0);
    if (!zero_init) {
        double bound = std::sqrt(1.0 / (static_cast<double>(kernel) * kernel * channels_in));
        for (auto& w : weight_) w = rng.uniform(-bound, bound);
    }
}

Tensor Conv2d::forward(const Tensor& x, Mode) {
    require_rank4(x, "conv2d");
    if (x.dim(3) != cin_)
        throw std::invalid_argument("conv2d: input has " + std::to_string(x.dim(3)) +
                                    " channels, expected " + std::to_string(cin_));
    cached_input_ = x;
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int p = kernel_ / 2;
    const int oh = (h + 2 * p - kernel_) / stride_ + 1;
    const int ow = (w + 2 * p - kernel_) / stride_ + 1;
    Tensor out({n, oh, ow, cout_});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox)
                for (int co = 0; co < cout_; ++co) {
                    double acc = bias_[static_cast<std::size_t>(co)];
                    for (int ky = 0; ky < kernel_; ++ky) {
                        int iy = oy * stride_ + ky - p;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kernel_; ++kx) {
                            int ix = ox * stride_ + kx - p;
                            if (ix < 0 || ix >= w) continue;
                            const double* wp =
                                &weight_[static_cast<std::size_t>(((ky * kernel_ + kx) * cin_) * cout_ + co)];
                            for (int ci = 0; ci < cin_; ++ci)
                                acc += wp[static_cast<std::size_t>(ci) * cout_] * x.at(b, iy, ix, ci);
                        }
                    }
                    out.at(b, oy, ox, co) = acc;
                }
    return out;
}

Tensor Conv2d::backward(const Tensor& dy) {
    const Tensor& x = cached_input_;
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int oh = dy.dim(1), ow = dy.dim(2);
    const int p = kernel_ / 2;

    // weight gradients: one weight per task, serial accumulation inside
#pragma omp parallel for collapse(2) schedule(static)
    for (int ky = 0; ky < kernel_; ++ky)
        for (int kx = 0; kx < kernel_; ++kx)
            for (int ci = 0; ci < cin_; ++ci)
                for (int co = 0; co < cout_; ++co) {
                    double acc = 0.0;
                    for (int b = 0; b < n; ++b)
                        for (int oy = 0; oy < oh; ++oy) {
                            int iy = oy * stride_ + ky - p;
                            if (iy < 0 || iy >= h) continue;
                            for (int ox = 0; ox < ow; ++ox) {
                                int ix = ox * stride_ + kx - p;
                                if (ix < 0 || ix >= w) continue;
                                acc += dy.at(b, oy, ox, co) * x.at(b, iy, ix, ci);
                            }
                        }
                    weight_grad_[static_cast<std::size_t>(((ky * kernel_ + kx) * cin_ + ci) * cout_ + co)] += acc;
                }

    for (int co = 0; co < cout_; ++co) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) acc += dy.at(b, oy, ox, co);
        bias_grad_[static_cast<std::size_t>(co)] += acc;
    }

    // input gradient, gather form
    Tensor dx({n, h, w, cin_});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b)
        for (int iy = 0; iy < h; ++iy)
            for (int ix = 0; ix < w; ++ix)
                for (int ci = 0; ci < cin_; ++ci) {
                    double acc = 0.0;
                    for (int ky = 0; ky < kernel_; ++ky) {
                        int t = iy + p - ky;
                        if (t < 0 || t % stride_ != 0) continue;
                        int oy = t / stride_;
                        if (oy >= oh) continue;
                        for (int kx = 0; kx < kernel_; ++kx) {
                            int u = ix + p - kx;
                            if (u < 0 || u % stride_ != 0) continue;
                            int ox = u / stride_;
                            if (ox >= ow) continue;
                            const double* wp =
                                &weight_[static_cast<std::size_t>(((ky * kernel_ + kx) * cin_ + ci) * cout_)];
                            for (int co = 0; co < cout_; ++co)
                                acc += wp[static_cast<std::size_t>(co)] * dy.at(b, oy, ox, co);
                        }
                    }
                    dx.at(b, iy, ix, ci) = acc;
                }
    return dx;
}

void Conv2d::collect_params(std::vector<ParamView>& out) {
    out.push_back({descriptor() + ".weight", weight_.data(), weight_grad_.data(),
                   static_cast<std::int64_t>(weight_.size())});
    out.push_back({descriptor() + ".bias", bias_.data(), bias_grad_.data(),
                   static_cast<std::int64_t>(bias_.size())});
}

std::string Conv2d::descriptor() const {
    return "conv k" + std::to_string(kernel_) + " " + std::to_string(cin_) + "->" +
           std::to_string(cout_) + " s" + std::to_string(stride_);
}

// ---------------------------------------------------------------- activations

Tensor Relu::forward(const Tensor& x, Mode) {
    cached_input_ = x;
    Tensor y = x;
    for (auto& v : y.flat())
        if (v < 0.0) v = 0.0;
    return y;
}

Tensor Relu::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::int64_t i = 0; i < dx.numel(); ++i)
        if (cached_input_[i] <= 0.0) dx[i] = 0.0;
    return dx;
}

Tensor LeakyRelu::forward(const Tensor& x, Mode) {
    cached_input_ = x;
    Tensor y = x;
    for (auto& v : y.flat())
        if (v < 0.0) v *= slope_;
    return y;
}

Tensor LeakyRelu::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::int64_t i = 0; i < dx.numel(); ++i)
        if (cached_input_[i] <= 0.0) dx[i] *= slope_;
    return dx;
}

std::string LeakyRelu::descriptor() const {
    return "leaky_relu " + std::to_string(slope_);
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_.assign(static_cast<std::size_t>(channels), 1.0);
    beta_.assign(static_cast<std::size_t>(channels), 0.0);
    gamma_grad_.assign(static_cast<std::size_t>(channels), 0.0);
    beta_grad_.assign(static_cast<std::size_t>(channels), 0.0);
    running_mean_.assign(static_cast<std::size_t>(channels), 0.0);
    running_var_.assign(static_cast<std::size_t>(channels), 1.0);
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
    require_rank4(x, "batchnorm");
    if (x.dim(3) != channels_) throw std::invalid_argument("batchnorm: channel mismatch");
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2);
    const double m = static_cast<double>(n) * h * w;
    cached_mode_ = mode;
    cached_input_ = x;
    cached_mean_.assign(static_cast<std::size_t>(channels_), 0.0);
    cached_invstd_.assign(static_cast<std::size_t>(channels_), 0.0);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels_; ++c) {
        double mean, var;
        if (mode == Mode::train) {
            double s = 0.0;
            for (int b = 0; b < n; ++b)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) s += x.at(b, y, xx, c);
            mean = s / m;
            double v = 0.0;
            for (int b = 0; b < n; ++b)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        double d = x.at(b, y, xx, c) - mean;
                        v += d * d;
                    }
            var = v / m;
            running_mean_[static_cast<std::size_t>(c)] =
                momentum_ * running_mean_[static_cast<std::size_t>(c)] + (1.0 - momentum_) * mean;
            running_var_[static_cast<std::size_t>(c)] =
                momentum_ * running_var_[static_cast<std::size_t>(c)] + (1.0 - momentum_) * var;
        } else {
            mean = running_mean_[static_cast<std::size_t>(c)];
            var = running_var_[static_cast<std::size_t>(c)];
        }
        cached_mean_[static_cast<std::size_t>(c)] = mean;
        cached_invstd_[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(var + eps_);
    }

    Tensor xhat({n, h, w, channels_});
    Tensor out({n, h, w, channels_});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                for (int c = 0; c < channels_; ++c) {
                    double xh = (x.at(b, y, xx, c) - cached_mean_[static_cast<std::size_t>(c)]) *
                                cached_invstd_[static_cast<std::size_t>(c)];
                    xhat.at(b, y, xx, c) = xh;
                    out.at(b, y, xx, c) =
                        gamma_[static_cast<std::size_t>(c)] * xh + beta_[static_cast<std::size_t>(c)];
                }
    cached_xhat_ = xhat;
    return out;
}

Tensor BatchNorm::backward(const Tensor& dy) {
    const Tensor& x = cached_input_;
    const int n = dy.dim(0), h = dy.dim(1), w = dy.dim(2);
    const double m = static_cast<double>(n) * h * w;
    Tensor dx({n, h, w, channels_});

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels_; ++c) {
        const std::size_t cc = static_cast<std::size_t>(c);
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < n; ++b)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) {
                    sum_dy += dy.at(b, y, xx, c);
                    sum_dy_xhat += dy.at(b, y, xx, c) * cached_xhat_.at(b, y, xx, c);
                }
        gamma_grad_[cc] += sum_dy_xhat;
        beta_grad_[cc] += sum_dy;

        if (cached_mode_ == Mode::train) {
            // gradient through batch statistics
            for (int b = 0; b < n; ++b)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        double dxhat = dy.at(b, y, xx, c) * gamma_[cc];
                        dx.at(b, y, xx, c) =
                            cached_invstd_[cc] *
                            (dxhat - (gamma_[cc] / m) * sum_dy -
                             (gamma_[cc] / m) * cached_xhat_.at(b, y, xx, c) * sum_dy_xhat);
                    }
        } else {
            for (int b = 0; b < n; ++b)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx)
                        dx.at(b, y, xx, c) = dy.at(b, y, xx, c) * gamma_[cc] * cached_invstd_[cc];
        }
    }
    (void)x;
    return dx;
}

void BatchNorm::collect_params(std::vector<ParamView>& out) {
    out.push_back({"bn.gamma", gamma_.data(), gamma_grad_.data(),
                   static_cast<std::int64_t>(gamma_.size())});
    out.push_back({"bn.beta", beta_.data(), beta_grad_.data(),
                   static_cast<std::int64_t>(beta_.size())});
}

void BatchNorm::collect_state(std::vector<ParamView>& out) {
    out.push_back({"bn.running_mean", running_mean_.data(), nullptr,
                   static_cast<std::int64_t>(running_mean_.size())});
    out.push_back({"bn.running_var", running_var_.data(), nullptr,
                   static_cast<std::int64_t>(running_var_.size())});
}

std::string BatchNorm::descriptor() const { return "bn " + std::to_string(channels_); }

// ---------------------------------------------------------------- Upsample2x

Tensor Upsample2x::forward(const Tensor& x, Mode) {
    require_rank4(x, "upsample_2x");
    cached_shape_ = x.shape();
    const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    Tensor out({n, 2 * h, 2 * w, c});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b)
        for (int y = 0; y < 2 * h; ++y)
            for (int xx = 0; xx < 2 * w; ++xx)
                for (int ch = 0; ch < c; ++ch)
                    out.at(b, y, xx, ch) = x.at(b, y / 2, xx / 2, ch);
    return out;
}

Tensor Upsample2x::backward(const Tensor& dy) {
    const int n = cached_shape_[0], h = cached_shape_[1], w = cached_shape_[2], c = cached_shape_[3];
    Tensor dx({n, h, w, c});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                for (int ch = 0; ch < c; ++ch)
                    dx.at(b, y, xx, ch) = dy.at(b, 2 * y, 2 * xx, ch) + dy.at(b, 2 * y, 2 * xx + 1, ch) +
                                          dy.at(b, 2 * y + 1, 2 * xx, ch) +
                                          dy.at(b, 2 * y + 1, 2 * xx + 1, ch);
    return dx;
}

// ---------------------------------------------------------------- Flatten / Dense

Tensor Flatten::forward(const Tensor& x, Mode) {
    require_rank4(x, "flatten");
    cached_shape_ = x.shape();
    int d = x.dim(1) * x.dim(2) * x.dim(3);
    return Tensor({x.dim(0), d}, x.flat());
}

Tensor Flatten::backward(const Tensor& dy) {
    return Tensor(cached_shape_, dy.flat());
}

Dense::Dense(int in, int out, Rng& rng) : in_(in), out_(out) {
    if (in < 1 || out < 1) throw std::invalid_argument("dense dims must be positive");
    weight_.resize(static_cast<std::size_t>(in) * out);
    weight_grad_.assign(weight_.size(), 0.0);
    bias_.assign(static_cast<std::size_t>(out), 0.0);
    bias_grad_.assign(bias_.size(), 0.0);
    double bound = std::sqrt(1.0 / in);
    for (auto& w : weight_) w = rng.uniform(-bound, bound);
}

Tensor Dense::forward(const Tensor& x, Mode) {
    if (x.rank() != 2 || x.dim(1) != in_)
        throw std::invalid_argument("dense: expected (N," + std::to_string(in_) + ") input");
    cached_input_ = x;
    const int n = x.dim(0);
    Tensor out({n, out_});
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n; ++b)
        for (int o = 0; o < out_; ++o) {
            double acc = bias_[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_; ++i)
                acc += weight_[static_cast<std::size_t>(i) * out_ + o] * x[b * in_ + i];
            out[b * out_ + o] = acc;
        }
    return out;
}

Tensor Dense::backward(const Tensor& dy) {
    const Tensor& x = cached_input_;
    const int n = x.dim(0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_; ++i)
        for (int o = 0; o < out_; ++o) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b) acc += x[b * in_ + i] * dy[b * out_ + o];
            weight_grad_[static_cast<std::size_t>(i) * out_ + o] += acc;
        }
    for (int o = 0; o < out_; ++o) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b) acc += dy[b * out_ + o];
        bias_grad_[static_cast<std::size_t>(o)] += acc;
    }
    Tensor dx({n, in_});
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n; ++b)
        for (int i = 0; i < in_; ++i) {
            double acc = 0.0;
            for (int o = 0; o < out_; ++o)
                acc += weight_[static_cast<std::size_t>(i) * out_ + o] * dy[b * out_ + o];
            dx[b * in_ + i] = acc;
        }
    return dx;
}

void Dense::collect_params(std::vector<ParamView>& out) {
    out.push_back({descriptor() + ".weight", weight_.data(), weight_grad_.data(),
                   static_cast<std::int64_t>(weight_.size())});
    out.push_back({descriptor() + ".bias", bias_.data(), bias_grad_.data(),
                   static_cast<std::int64_t>(bias_.size())});
}

std::string Dense::descriptor() const {
    return "dense " + std::to_string(in_) + "->" + std::to_string(out_);
}

// ---------------------------------------------------------------- pointwise tails

Tensor Sigmoid::forward(const Tensor& x, Mode) {
    Tensor y = x;
    for (auto& v : y.flat()) v = 1.0 / (1.0 + std::exp(-v));
    cached_output_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::int64_t i = 0; i < dx.numel(); ++i) {
        double y = cached_output_[i];
        dx[i] *= y * (1.0 - y);
    }
    return dx;
}

Tensor SmoothClamp::forward(const Tensor& x, Mode) {
    cached_input_ = x;
    Tensor y = x;
    for (auto& v : y.flat()) v = 0.5 * (1.0 + std::tanh(2.0 * v - 1.0));
    return y;
}

Tensor SmoothClamp::backward(const Tensor& dy) {
    Tensor dx = dy;
    for (std::int64_t i = 0; i < dx.numel(); ++i) {
        double t = std::tanh(2.0 * cached_input_[i] - 1.0);
        dx[i] *= 1.0 - t * t;
    }
    return dx;
}

// ---------------------------------------------------------------- Residual

Tensor Residual::forward(const Tensor& x, Mode mode) {
    Tensor y = x;
    for (auto& layer : body_) y = layer->forward(y, mode);
    check_same_shape(x, y, "residual");
    for (std::int64_t i = 0; i < y.numel(); ++i) y[i] += x[i];
    return y;
}

Tensor Residual::backward(const Tensor& dy) {
    Tensor d = dy;
    for (auto it = body_.rbegin(); it != body_.rend(); ++it) d = (*it)->backward(d);
    for (std::int64_t i = 0; i < d.numel(); ++i) d[i] += dy[i];
    return d;
}

void Residual::collect_params(std::vector<ParamView>& out) {
    for (auto& layer : body_) layer->collect_params(out);
}

void Residual::collect_state(std::vector<ParamView>& out) {
    for (auto& layer : body_) layer->collect_state(out);
}

std::string Residual::descriptor() const {
    std::string s = "residual [";
    for (std::size_t i = 0; i < body_.size(); ++i) {
        if (i) s += "; ";
        s += body_[i]->descriptor();
    }
    return s + "]";
}

std::unique_ptr<Layer> make_res_block(int channels, Rng& rng) {
    std::vector<std::unique_ptr<Layer>> body;
    body.push_back(std::make_unique<Conv2d>(3, channels, channels, 1, rng));
    body.push_back(std::make_unique<BatchNorm>(channels));
    body.push_back(std::make_unique<Relu>());
    body.push_back(std::make_unique<Conv2d>(3, channels, channels, 1, rng, /*zero_init=*/true));
    body.push_back(std::make_unique<BatchNorm>(channels));
    return std::make_unique<Residual>(std::move(body));
}

}  // namespace srq

#ifndef SRQ_LAYERS_HPP
#define SRQ_LAYERS_HPP

#include "srq/rng.hpp"
#include "srq/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace srq {

enum class Mode { train, eval };

// View into a layer-owned parameter (or state buffer) and its gradient.
struct ParamView {
    std::string name;
    double* value = nullptr;
    double* grad = nullptr;  // null for state buffers (bn running stats)
    std::int64_t size = 0;
};

// All layers operate on (N, H, W, C) batches. forward caches whatever
// backward needs; backward accumulates parameter gradients and returns the
// gradient w.r.t. the layer input.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Mode mode) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual void collect_params(std::vector<ParamView>& out) {}
    virtual void collect_state(std::vector<ParamView>& out) {}
    virtual std::string descriptor() const = 0;
};

class Conv2d : public Layer {
public:
    // odd kernel, zero padding k/2, stride 1 or 2
    Conv2d(int kernel, int channels_in, int channels_out, int stride, Rng& rng,
           bool zero_init = false);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<ParamView>& out) override;
    std::string descriptor() const override;

    int kernel() const { return kernel_; }

private:
    int kernel_, cin_, cout_, stride_;
    std::vector<double> weight_, bias_;        // weight layout (ky, kx, cin, cout)
    std::vector<double> weight_grad_, bias_grad_;
    Tensor cached_input_;
};

class Relu : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override { return "relu"; }

private:
    Tensor cached_input_;
};

class LeakyRelu : public Layer {
public:
    explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override;

private:
    double slope_;
    Tensor cached_input_;
};

class BatchNorm : public Layer {
public:
    explicit BatchNorm(int channels, double momentum = 0.9, double eps = 1e-5);

    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<ParamView>& out) override;
    void collect_state(std::vector<ParamView>& out) override;
    std::string descriptor() const override;

private:
    int channels_;
    double momentum_, eps_;
    std::vector<double> gamma_, beta_, gamma_grad_, beta_grad_;
    std::vector<double> running_mean_, running_var_;
    // caches for backward
    Mode cached_mode_ = Mode::train;
    Tensor cached_xhat_;
    std::vector<double> cached_invstd_, cached_mean_;
    Tensor cached_input_;
};

// Nearest-neighbor 2x spatial upsampling.
class Upsample2x : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override { return "upsample_2x"; }

private:
    std::vector<int> cached_shape_;
};

class Flatten : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override { return "flatten"; }

private:
    std::vector<int> cached_shape_;
};

class Dense : public Layer {
public:
    Dense(int in, int out, Rng& rng);
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<ParamView>& out) override;
    std::string descriptor() const override;

private:
    int in_, out_;
    std::vector<double> weight_, bias_, weight_grad_, bias_grad_;
    Tensor cached_input_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override { return "sigmoid"; }

private:
    Tensor cached_output_;
};

// Smooth saturating map onto (0, 1): y = 0.5 * (1 + tanh(2x - 1)).
// Identity-like around mid-gray (unit slope at x = 0.5).
class SmoothClamp : public Layer {
public:
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    std::string descriptor() const override { return "smooth_clamp"; }

private:
    Tensor cached_input_;
};

// y = x + body(x). With the body's final conv zero-initialized this is the
// identity at init.
class Residual : public Layer {
public:
    explicit Residual(std::vector<std::unique_ptr<Layer>> body) : body_(std::move(body)) {}
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(std::vector<ParamView>& out) override;
    void collect_state(std::vector<ParamView>& out) override;
    std::string descriptor() const override;

private:
    std::vector<std::unique_ptr<Layer>> body_;
};

// conv3-bn-relu-conv3(zero init)-bn with additive skip
std::unique_ptr<Layer> make_res_block(int channels, Rng& rng);

}  // namespace srq

#endif

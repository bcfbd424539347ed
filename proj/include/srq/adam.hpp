#ifndef SRQ_ADAM_HPP
#define SRQ_ADAM_HPP

#include "srq/layers.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace srq {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam over a fixed set of parameter views; moment buffers are shaped to
// the views at construction.
class Adam {
public:
    Adam(std::vector<ParamView> params, AdamConfig config)
        : params_(std::move(params)), config_(config) {
        for (const auto& p : params_) {
            m_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
            v_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
        }
    }

    // one descent step along the accumulated gradients
    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = params_[k];
            for (std::int64_t i = 0; i < p.size; ++i) {
                double g = p.grad[i];
                if (!std::isfinite(g)) throw std::runtime_error("adam: non-finite gradient");
                auto idx = static_cast<std::size_t>(i);
                m_[k][idx] = config_.beta1 * m_[k][idx] + (1.0 - config_.beta1) * g;
                v_[k][idx] = config_.beta2 * v_[k][idx] + (1.0 - config_.beta2) * g * g;
                double mhat = m_[k][idx] / bc1;
                double vhat = v_[k][idx] / bc2;
                p.value[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.eps);
            }
        }
    }

    std::int64_t step_count() const { return t_; }

private:
    std::vector<ParamView> params_;
    AdamConfig config_;
    std::vector<std::vector<double>> m_, v_;
    std::int64_t t_ = 0;
};

}  // namespace srq

#endif

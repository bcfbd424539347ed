#ifndef SRQ_QUASINORM_HPP
#define SRQ_QUASINORM_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace srq {

// Parameters of the epsilon-regularized q-quasi-norm penalty
// sum_i (a_i^2 + eps)^(q/2). q < 1 models heavier-than-Gaussian residual
// tails; q = 2 recovers the squared L2 penalty.
struct QuasiNormSpec {
    double q = 0.5;
    double epsilon = 1e-3;

    void validate() const {
        if (!(q > 0.0 && q <= 2.0)) throw std::invalid_argument("quasi-norm q must be in (0,2]");
        if (epsilon < 0.0) throw std::invalid_argument("quasi-norm epsilon must be >= 0");
        // eps = 0 only makes sense for the q = 2 reference case
        if (epsilon == 0.0 && q != 2.0)
            throw std::invalid_argument("quasi-norm epsilon must be positive for q < 2");
    }
};

inline double quasi_norm_pow(std::span<const double> a, const QuasiNormSpec& spec) {
    spec.validate();
    double s = 0.0;
    for (double v : a) {
        if (!std::isfinite(v)) throw std::invalid_argument("quasi_norm_pow: non-finite input");
        s += std::pow(v * v + spec.epsilon, spec.q / 2.0);
    }
    return s;
}

// d/da_i of quasi_norm_pow: q * a_i * (a_i^2 + eps)^(q/2 - 1).
inline std::vector<double> quasi_norm_grad(std::span<const double> a, const QuasiNormSpec& spec) {
    spec.validate();
    if (spec.epsilon == 0.0 && spec.q < 2.0)
        throw std::invalid_argument("quasi_norm_grad: non-differentiable configuration");
    std::vector<double> g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) throw std::invalid_argument("quasi_norm_grad: non-finite input");
        g[i] = spec.q * a[i] * std::pow(a[i] * a[i] + spec.epsilon, spec.q / 2.0 - 1.0);
    }
    return g;
}

// Influence of a single residual of magnitude r: the gradient magnitude
// q * r * (r^2 + eps)^(q/2 - 1). For q < 1 it peaks at r = sqrt(eps/(1-q))
// and decays beyond it, which is what suppresses outlier examples.
inline double quasi_norm_influence(double r, const QuasiNormSpec& spec) {
    return spec.q * r * std::pow(r * r + spec.epsilon, spec.q / 2.0 - 1.0);
}

}  // namespace srq

#endif

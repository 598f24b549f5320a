#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ranspinn/common/error.hpp"
#include "ranspinn/trainer/config.hpp"

namespace ranspinn::trainer {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moment estimates for one parameter vector.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update at 0-based step index `step` with learning rate `lr`.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& mom, std::size_t step,
                      double lr, const AdamHyper& h = {}) {
    if (params.size() != grads.size() || mom.m.size() != params.size() || mom.v.size() != params.size())
        throw ValidationError("adam_step: parameter, gradient and moment sizes differ");
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 - std::pow(h.beta1, t);
    const double c2 = 1.0 - std::pow(h.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        mom.m[i] = h.beta1 * mom.m[i] + (1.0 - h.beta1) * grads[i];
        mom.v[i] = h.beta2 * mom.v[i] + (1.0 - h.beta2) * grads[i] * grads[i];
        const double m_hat = mom.m[i] / c1;
        const double v_hat = mom.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
}

/// Adam step with the decaying schedule lr(t) = lr0 * decay^floor(t / interval).
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& mom, std::size_t step,
                      const TrainConfig& config) {
    adam_step(params, grads, mom, step, learning_rate(step, config));
}

}  // namespace ranspinn::trainer

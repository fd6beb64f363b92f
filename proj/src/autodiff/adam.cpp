#include "ign/autodiff/adam.hpp"

#include <cmath>

#include "ign/errors.hpp"

namespace ign::ad {

AdamState make_adam_state(const AdamConfig& config, std::span<Parameter* const> params) {
    AdamState state;
    state.config = config;
    for (const Parameter* p : params) {
        state.first.emplace_back(p->value.shape(), 0.0);
        state.second.emplace_back(p->value.shape(), 0.0);
    }
    return state;
}

void adam_step(AdamState& state, std::span<Parameter* const> params, const Gradients& grads) {
    if (params.size() != state.first.size()) {
        throw ShapeError("adam_step: state tracks " + std::to_string(state.first.size()) + " parameters, got " +
                         std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Parameter& p = *params[i];
        if (p.value.shape() != state.first[i].shape()) {
            throw ShapeError("adam_step: parameter '" + p.name + "' has shape " + to_string(p.value.shape()) +
                             ", moments have " + to_string(state.first[i].shape()));
        }
        if (auto it = grads.find(&p); it != grads.end()) {
            if (it->second.shape() != p.value.shape()) {
                throw ShapeError("adam_step: gradient for '" + p.name + "' has shape " +
                                 to_string(it->second.shape()) + ", parameter has " + to_string(p.value.shape()));
            }
            if (!it->second.all_finite()) {
                throw NumericalError("adam_step: non-finite gradient for parameter '" + p.name + "'");
            }
        }
    }

    const AdamConfig& c = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (!p.trainable) continue;
        const auto it = grads.find(&p);
        Array& m = state.first[i];
        Array& v = state.second[i];
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = it == grads.end() ? 0.0 : it->second[k];
            m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
            v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            p.value[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

double clip_global_norm(Gradients& grads, std::span<Parameter* const> params, double max_norm) {
    double total = 0.0;
    for (const Parameter* p : params) {
        if (auto it = grads.find(p); it != grads.end())
            for (double v : it->second.values()) total += v * v;
    }
    const double norm = std::sqrt(total);
    if (max_norm > 0.0 && norm > max_norm) {
        const double factor = max_norm / norm;
        for (const Parameter* p : params) {
            if (auto it = grads.find(p); it != grads.end())
                for (double& v : it->second.values()) v *= factor;
        }
    }
    return norm;
}

}  // namespace ign::ad

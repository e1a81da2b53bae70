#include "coae/nn/adam.hpp"

#include "coae/errors.hpp"

#include <cmath>
#include <string>

namespace coae::nn {

void adam_step(AdamState& state, std::span<const ParamSlot> slots) {
    if (state.m.empty()) {
        state.m.resize(slots.size());
        state.v.resize(slots.size());
        for (std::size_t i = 0; i < slots.size(); ++i) {
            state.m[i].assign(slots[i].value.size(), 0.0);
            state.v[i].assign(slots[i].value.size(), 0.0);
        }
    }
    if (state.m.size() != slots.size())
        throw DimensionError("adam_step: parameter count changed between steps");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].value.size() != state.m[i].size() || slots[i].grad.size() != slots[i].value.size())
            throw DimensionError("adam_step: size mismatch in parameter slot " + std::to_string(i));
        for (double g : slots[i].grad)
            if (!std::isfinite(g))
                throw NonFiniteError("adam_step: non-finite gradient in parameter slot " + std::to_string(i));
    }

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto value = slots[i].value;
        const auto grad = slots[i].grad;
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad[k];
            m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g;
            v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            value[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

} // namespace coae::nn

#pragma once

#include "coae/nn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace coae::nn {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    double learning_rate = 1e-3;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// Bias-corrected Adam update over all slots. Moment buffers are allocated on the first
// call; later calls must pass slots of the same sizes in the same order. Throws
// NonFiniteError (leaving parameters and state untouched) if any gradient is not finite.
void adam_step(AdamState& state, std::span<const ParamSlot> slots);

} // namespace coae::nn

#pragma once

#include "coae/nn/tensor.hpp"

namespace coae::nn {

RealBatch relu_forward(const RealBatch& x);

// Passes grad_out where x > 0; the subgradient at x == 0 is taken as 0.
RealBatch relu_backward(const RealBatch& x, const RealBatch& grad_out);

} // namespace coae::nn

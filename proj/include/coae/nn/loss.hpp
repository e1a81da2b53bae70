#pragma once

#include "coae/nn/tensor.hpp"

namespace coae::nn {

struct LossAndGrad {
    double loss = 0.0;
    RealBatch grad;
};

// Mean squared error over complex samples stored as real pairs. Each row holds the
// real/imaginary split of one block, so a row of width 2N carries N complex values and
//   loss = (1 / (B N)) * sum |x_hat - x|^2,   grad = (2 / (B N)) * (x_hat - x).
LossAndGrad mse_loss(const RealBatch& x_hat, const RealBatch& x);

} // namespace coae::nn

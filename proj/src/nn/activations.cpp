#include "coae/nn/activations.hpp"

namespace coae::nn {

RealBatch relu_forward(const RealBatch& x) { return x.cwiseMax(0.0); }

RealBatch relu_backward(const RealBatch& x, const RealBatch& grad_out) {
    require_shape(grad_out, x.rows(), x.cols(), "relu_backward grad_out");
    return (x.array() > 0.0).select(grad_out, 0.0);
}

} // namespace coae::nn

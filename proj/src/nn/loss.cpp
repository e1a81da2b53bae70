#include "coae/nn/loss.hpp"

#include "coae/errors.hpp"

namespace coae::nn {

LossAndGrad mse_loss(const RealBatch& x_hat, const RealBatch& x) {
    require_shape(x_hat, x.rows(), x.cols(), "mse_loss");
    if (x.cols() % 2 != 0) throw DimensionError("mse_loss: rows must hold real/imag pairs");
    const double n_complex = static_cast<double>(x.rows()) * static_cast<double>(x.cols() / 2);
    LossAndGrad out;
    RealBatch diff = x_hat - x;
    out.loss = diff.squaredNorm() / n_complex;
    out.grad = (2.0 / n_complex) * diff;
    return out;
}

} // namespace coae::nn

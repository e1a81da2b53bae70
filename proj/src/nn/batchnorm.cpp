#include "coae/nn/batchnorm.hpp"

#include "coae/errors.hpp"

#include <stdexcept>
#include <utility>
#include <string>

namespace coae::nn {

namespace {

void check_width(const BatchNormLayer& layer, const RealBatch& x) {
    if (x.cols() != layer.dim())
        throw DimensionError("batchnorm: input has " + std::to_string(x.cols()) +
                             " columns, layer expects " + std::to_string(layer.dim()));
}

RealBatch affine(const BatchNormLayer& layer, const RealBatch& x_hat) {
    RealBatch out = x_hat.array().rowwise() * layer.gamma.array();
    out.rowwise() += layer.beta;
    return out;
}

} // namespace

RealBatch batchnorm_forward(BatchNormLayer& layer, const RealBatch& x, Mode mode,
                            BatchNormCache* cache) {
    if (mode == Mode::inference) {
        RealBatch out = batchnorm_forward(std::as_const(layer), x);
        if (cache) {
            cache->mode = Mode::inference;
            cache->inv_std = (layer.running_var.array() + layer.epsilon).rsqrt();
            cache->x_hat.resize(0, 0);
        }
        return out;
    }
    check_width(layer, x);
    if (x.rows() < 2) throw DimensionError("batchnorm: training mode needs a batch of at least 2");

    const RowVector mean = x.colwise().mean();
    RealBatch centered = x.rowwise() - mean;
    const RowVector var = centered.array().square().colwise().mean();
    const RowVector inv_std = (var.array() + layer.epsilon).rsqrt();
    RealBatch x_hat = centered.array().rowwise() * inv_std.array();

    layer.running_mean = layer.momentum * layer.running_mean + (1.0 - layer.momentum) * mean;
    layer.running_var = layer.momentum * layer.running_var + (1.0 - layer.momentum) * var;

    RealBatch out = affine(layer, x_hat);
    if (cache) {
        cache->mode = Mode::training;
        cache->inv_std = inv_std;
        cache->x_hat = std::move(x_hat);
    }
    return out;
}

RealBatch batchnorm_forward(const BatchNormLayer& layer, const RealBatch& x) {
    check_width(layer, x);
    const RowVector inv_std = (layer.running_var.array() + layer.epsilon).rsqrt();
    RealBatch x_hat = (x.rowwise() - layer.running_mean).array().rowwise() * inv_std.array();
    return affine(layer, x_hat);
}

BatchNormGrads batchnorm_backward(const BatchNormLayer& layer, const BatchNormCache& cache,
                                  const RealBatch& grad_out) {
    if (cache.mode != Mode::training)
        throw std::logic_error("batchnorm_backward: cache comes from an inference-mode pass");
    require_shape(grad_out, cache.x_hat.rows(), layer.dim(), "batchnorm_backward grad_out");

    const double b = static_cast<double>(grad_out.rows());
    BatchNormGrads g;
    g.grad_beta = grad_out.colwise().sum();
    g.grad_gamma = grad_out.cwiseProduct(cache.x_hat).colwise().sum();

    // dx = gamma * inv_std / B * (B dy - sum(dy) - x_hat * sum(dy * x_hat))
    RealBatch t = (b * grad_out).rowwise() - g.grad_beta;
    t -= (cache.x_hat.array().rowwise() * g.grad_gamma.array()).matrix();
    const RowVector scale = layer.gamma.cwiseProduct(cache.inv_std) / b;
    g.grad_x = t.array().rowwise() * scale.array();
    return g;
}

} // namespace coae::nn

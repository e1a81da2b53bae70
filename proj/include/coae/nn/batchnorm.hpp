#pragma once

#include "coae/nn/tensor.hpp"

namespace coae::nn {

struct BatchNormLayer {
    RowVector gamma;
    RowVector beta;
    RowVector running_mean;
    RowVector running_var;
    double epsilon = 1e-3;
    double momentum = 0.99;

    BatchNormLayer() = default;
    explicit BatchNormLayer(Eigen::Index dim)
        : gamma(RowVector::Ones(dim)), beta(RowVector::Zero(dim)),
          running_mean(RowVector::Zero(dim)), running_var(RowVector::Ones(dim)) {}

    Eigen::Index dim() const { return gamma.size(); }

    friend bool operator==(const BatchNormLayer&, const BatchNormLayer&) = default;
};

// Values saved by a forward pass for the matching backward pass.
struct BatchNormCache {
    Mode mode = Mode::inference;
    RealBatch x_hat;
    RowVector inv_std;
};

// Training mode normalizes each column with the batch mean and biased variance and
// folds them into the running statistics: running = momentum * running + (1 - momentum) * batch.
// Inference mode uses the running statistics and leaves the layer untouched.
RealBatch batchnorm_forward(BatchNormLayer& layer, const RealBatch& x, Mode mode,
                            BatchNormCache* cache = nullptr);

// Inference-only overload usable on a shared, read-only layer.
RealBatch batchnorm_forward(const BatchNormLayer& layer, const RealBatch& x);

struct BatchNormGrads {
    RealBatch grad_x;
    RowVector grad_gamma;
    RowVector grad_beta;
};

// Exact gradient of the training-mode transform, including the dependence of the
// batch mean and variance on x. Throws std::logic_error for an inference-mode cache.
BatchNormGrads batchnorm_backward(const BatchNormLayer& layer, const BatchNormCache& cache,
                                  const RealBatch& grad_out);

} // namespace coae::nn

#pragma once

#include "coae/nn/tensor.hpp"
#include "coae/rng.hpp"

namespace coae::nn {

// Affine layer y = x W + b. W is D_in x D_out.
struct DenseLayer {
    Matrix weights;
    RowVector bias;

    DenseLayer() = default;
    DenseLayer(Eigen::Index in_dim, Eigen::Index out_dim)
        : weights(Matrix::Zero(in_dim, out_dim)), bias(RowVector::Zero(out_dim)) {}

    Eigen::Index in_dim() const { return weights.rows(); }
    Eigen::Index out_dim() const { return weights.cols(); }

    // Weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias.
    static DenseLayer he_uniform(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng);

    // Square layers only: a random orthogonal matrix scaled by sqrt(2), zero bias. Each
    // weight then has the He variance 2/fan_in, but all singular values equal sqrt(2), so a
    // deep stack starts well conditioned.
    static DenseLayer he_orthogonal(Eigen::Index dim, Rng& rng);

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct DenseGrads {
    RealBatch grad_x;
    Matrix grad_w;
    RowVector grad_b;
};

RealBatch dense_forward(const DenseLayer& layer, const RealBatch& x);

DenseGrads dense_backward(const DenseLayer& layer, const RealBatch& x, const RealBatch& grad_out);

} // namespace coae::nn

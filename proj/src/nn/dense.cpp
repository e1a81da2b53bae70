#include "coae/nn/dense.hpp"

#include "coae/errors.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>

namespace coae::nn {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, std::string_view what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
    }
}

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

DenseLayer DenseLayer::he_uniform(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng) {
    DenseLayer layer(in_dim, out_dim);
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < in_dim; ++i)
        for (Eigen::Index j = 0; j < out_dim; ++j) layer.weights(i, j) = dist(rng);
    return layer;
}

DenseLayer DenseLayer::he_orthogonal(Eigen::Index dim, Rng& rng) {
    if (dim < 1) throw DimensionError("he_orthogonal: dimension must be positive");
    std::normal_distribution<double> normal;
    Matrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = normal(rng);
    const Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    // Fix the column signs against diag(R) so Q is Haar distributed.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    DenseLayer layer(dim, dim);
    layer.weights = std::sqrt(2.0) * q;
    return layer;
}

RealBatch dense_forward(const DenseLayer& layer, const RealBatch& x) {
    if (x.cols() != layer.in_dim())
        throw DimensionError("dense_forward: input has " + std::to_string(x.cols()) +
                             " columns, layer expects " + std::to_string(layer.in_dim()));
    RealBatch out = x * layer.weights;
    out.rowwise() += layer.bias;
    return out;
}

DenseGrads dense_backward(const DenseLayer& layer, const RealBatch& x, const RealBatch& grad_out) {
    if (x.cols() != layer.in_dim())
        throw DimensionError("dense_backward: input width does not match layer");
    require_shape(grad_out, x.rows(), layer.out_dim(), "dense_backward grad_out");
    DenseGrads g;
    g.grad_w = x.transpose() * grad_out;
    g.grad_b = grad_out.colwise().sum();
    g.grad_x = grad_out * layer.weights.transpose();
    return g;
}

} // namespace coae::nn

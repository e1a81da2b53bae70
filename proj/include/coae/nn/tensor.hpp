#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string_view>

namespace coae::nn {

// B x D batch of real activations, one sample per row.
using RealBatch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = RealBatch;
using RowVector = Eigen::RowVectorXd;

// One trainable tensor viewed as a flat array, paired with its gradient.
struct ParamSlot {
    std::span<double> value;
    std::span<const double> grad;
};

enum class Mode { training, inference };

// Throws DimensionError unless `m` is rows x cols.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, std::string_view what);

// Throws NonFiniteError if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

} // namespace coae::nn

#include "coae/signal.hpp"

#include "coae/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coae {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> c2r(std::span<const Complex> block) {
    const std::size_t n = block.size();
    std::vector<double> row(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        row[i] = block[i].real();
        row[n + i] = block[i].imag();
    }
    return row;
}

std::vector<Complex> r2c(std::span<const double> row) {
    if (row.size() % 2 != 0)
        throw DimensionError("r2c: odd row length " + std::to_string(row.size()));
    const std::size_t n = row.size() / 2;
    std::vector<Complex> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = {row[i], row[n + i]};
    return block;
}

nn::RealBatch c2r(const ComplexBatch& batch) {
    const std::size_t n = batch.block_size;
    nn::RealBatch rows(batch.blocks, 2 * n);
    for (std::size_t b = 0; b < batch.blocks; ++b) {
        const auto block = batch.block(b);
        for (std::size_t i = 0; i < n; ++i) {
            rows(b, i) = block[i].real();
            rows(b, n + i) = block[i].imag();
        }
    }
    return rows;
}

ComplexBatch r2c(const nn::RealBatch& rows) {
    if (rows.cols() % 2 != 0)
        throw DimensionError("r2c: odd row length " + std::to_string(rows.cols()));
    const std::size_t n = static_cast<std::size_t>(rows.cols() / 2);
    ComplexBatch batch(static_cast<std::size_t>(rows.rows()), n);
    for (std::size_t b = 0; b < batch.blocks; ++b) {
        auto block = batch.block(b);
        for (std::size_t i = 0; i < n; ++i) block[i] = {rows(b, i), rows(b, n + i)};
    }
    return batch;
}

FftPlan::FftPlan(std::size_t n) : n_(n), bit_reverse_(n), twiddles_(n / 2) {
    if (!is_power_of_two(n) || n < 2)
        throw DimensionError("FFT size must be a power of two >= 2, got " + std::to_string(n));
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
        bit_reverse_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k)
        twiddles_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
    if (data.size() != n_)
        throw DimensionError("FFT input has " + std::to_string(data.size()) + " samples, plan expects " +
                             std::to_string(n_));
    for (std::size_t i = 0; i < n_; ++i)
        if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);

    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex w = twiddles_[k * stride];
                if (inverse) w = std::conj(w);
                const Complex u = data[start + k];
                const Complex v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& s : data) s *= scale;
}

std::vector<Complex> fft_unitary(std::span<const Complex> block) {
    std::vector<Complex> out(block.begin(), block.end());
    FftPlan(out.size()).forward(out);
    return out;
}

std::vector<Complex> ifft_unitary(std::span<const Complex> block) {
    std::vector<Complex> out(block.begin(), block.end());
    FftPlan(out.size()).inverse(out);
    return out;
}

double mean_power(std::span<const Complex> samples) {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

namespace {

double unit_power_scale(double power) {
    if (!(power > 0.0) || !std::isfinite(power))
        throw std::domain_error("normalize_power: signal power is zero or not finite");
    return 1.0 / std::sqrt(power);
}

} // namespace

std::vector<double> normalize_power(ComplexBatch& batch, PowerNormalization mode) {
    std::vector<double> scales;
    if (mode == PowerNormalization::per_batch) {
        const double s = unit_power_scale(mean_power(batch.samples));
        for (auto& x : batch.samples) x *= s;
        scales.push_back(s);
    } else {
        for (std::size_t b = 0; b < batch.blocks; ++b) {
            auto block = batch.block(b);
            const double s = unit_power_scale(mean_power(block));
            for (auto& x : block) x *= s;
            scales.push_back(s);
        }
    }
    return scales;
}

std::vector<double> normalize_power(nn::RealBatch& rows, PowerNormalization mode) {
    if (rows.cols() % 2 != 0) throw DimensionError("normalize_power: rows must hold real/imag pairs");
    const double per_row = static_cast<double>(rows.cols() / 2);
    std::vector<double> scales;
    if (mode == PowerNormalization::per_batch) {
        const double s = unit_power_scale(rows.squaredNorm() / (per_row * static_cast<double>(rows.rows())));
        rows *= s;
        scales.push_back(s);
    } else {
        for (Eigen::Index b = 0; b < rows.rows(); ++b) {
            const double s = unit_power_scale(rows.row(b).squaredNorm() / per_row);
            rows.row(b) *= s;
            scales.push_back(s);
        }
    }
    return scales;
}

nn::RealBatch normalize_power_backward(const nn::RealBatch& normalized, std::span<const double> scales,
                                       const nn::RealBatch& grad_out, PowerNormalization mode) {
    nn::require_shape(grad_out, normalized.rows(), normalized.cols(), "normalize_power_backward");
    // w = s z with s = P^{-1/2}, P the mean power of z over the group of M complex samples:
    //   dL/dz = s (g - <g, w> w / M)
    const double per_row = static_cast<double>(normalized.cols() / 2);
    nn::RealBatch grad(normalized.rows(), normalized.cols());
    if (mode == PowerNormalization::per_batch) {
        if (scales.size() != 1) throw DimensionError("normalize_power_backward: expected one scale");
        const double m = per_row * static_cast<double>(normalized.rows());
        const double proj = grad_out.cwiseProduct(normalized).sum() / m;
        grad = scales[0] * (grad_out - proj * normalized);
    } else {
        if (scales.size() != static_cast<std::size_t>(normalized.rows()))
            throw DimensionError("normalize_power_backward: expected one scale per block");
        for (Eigen::Index b = 0; b < normalized.rows(); ++b) {
            const double proj = grad_out.row(b).dot(normalized.row(b)) / per_row;
            grad.row(b) = scales[b] * (grad_out.row(b) - proj * normalized.row(b));
        }
    }
    return grad;
}

} // namespace coae

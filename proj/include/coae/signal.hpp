#pragma once

#include "coae/nn/tensor.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace coae {

using Complex = std::complex<double>;

// `blocks` OFDM blocks of `block_size` complex samples, stored block after block.
struct ComplexBatch {
    std::size_t blocks = 0;
    std::size_t block_size = 0;
    std::vector<Complex> samples;

    ComplexBatch() = default;
    ComplexBatch(std::size_t n_blocks, std::size_t n)
        : blocks(n_blocks), block_size(n), samples(n_blocks * n) {}

    std::span<Complex> block(std::size_t b) { return {samples.data() + b * block_size, block_size}; }
    std::span<const Complex> block(std::size_t b) const {
        return {samples.data() + b * block_size, block_size};
    }

    friend bool operator==(const ComplexBatch&, const ComplexBatch&) = default;
};

bool is_power_of_two(std::size_t n);

// Packs one block as [Re(s_0..s_{N-1}) | Im(s_0..s_{N-1})].
std::vector<double> c2r(std::span<const Complex> block);
// Inverse of c2r. Throws DimensionError for odd-length input.
std::vector<Complex> r2c(std::span<const double> row);

// Batch forms: one block per row.
nn::RealBatch c2r(const ComplexBatch& batch);
ComplexBatch r2c(const nn::RealBatch& rows);

// Radix-2 in-place transform with 1/sqrt(N) scaling in both directions, so forward and
// inverse are exact adjoints and preserve power.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }
    void forward(std::span<Complex> data) const { transform(data, false); }
    void inverse(std::span<Complex> data) const { transform(data, true); }

private:
    void transform(std::span<Complex> data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bit_reverse_;
    std::vector<Complex> twiddles_;  // exp(-2 pi i k / N), k < N/2
};

std::vector<Complex> fft_unitary(std::span<const Complex> block);
std::vector<Complex> ifft_unitary(std::span<const Complex> block);

enum class PowerNormalization { per_batch, per_block };

// Mean of |s|^2 over all samples.
double mean_power(std::span<const Complex> samples);

// Scales samples so that the mean per-sample power is 1, either over the whole batch
// (one common factor) or block by block. Returns the applied factor(s): one entry for
// per_batch, one per block for per_block. Throws std::domain_error on zero power.
std::vector<double> normalize_power(ComplexBatch& batch,
                                    PowerNormalization mode = PowerNormalization::per_batch);

// Same operation on the c2r layout (rows of 2N reals).
std::vector<double> normalize_power(nn::RealBatch& rows,
                                    PowerNormalization mode = PowerNormalization::per_batch);

// Backward pass of the real-layout normalize_power. `normalized` is the forward output,
// `scales` the factors it returned.
nn::RealBatch normalize_power_backward(const nn::RealBatch& normalized, std::span<const double> scales,
                                       const nn::RealBatch& grad_out, PowerNormalization mode);

} // namespace coae

#pragma once

#include "coae/rng.hpp"
#include "coae/signal.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace coae {

// One bit per byte, values 0 or 1.
using BitBlock = std::vector<std::uint8_t>;

inline constexpr std::size_t bits_per_symbol = 4;

// Gray 16-QAM with unit average energy. Bits b0 b1 select the in-phase level and b2 b3 the
// quadrature level through {00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3}, all scaled by 1/sqrt(10).
// The label of a point is b0 b1 b2 b3 read as a 4-bit number with b0 the most significant bit.
const std::array<Complex, 16>& qam16_constellation();

// count must be a multiple of 4. Uniform i.i.d. bits.
BitBlock gen_random_bits(std::size_t count, Rng& rng);

std::vector<Complex> map_16qam(std::span<const std::uint8_t> bits);

// Hard nearest-point decision. A coordinate lying exactly on a decision boundary resolves
// to the more negative of the two neighbouring levels.
BitBlock demap_16qam(std::span<const Complex> symbols);

struct BitErrorCount {
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
};

BitErrorCount count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

} // namespace coae

#include "coae/modem.hpp"

#include "coae/errors.hpp"

#include <cmath>
#include <string>

namespace coae {

namespace {

const double kScale = 1.0 / std::sqrt(10.0);

// Gray pair (b_hi b_lo) -> amplitude level.
constexpr double level_of(unsigned pair) {
    switch (pair) {
        case 0b00: return -3.0;
        case 0b01: return -1.0;
        case 0b11: return 1.0;
        default: return 3.0;  // 0b10
    }
}

// Amplitude decision in unscaled units; boundaries at -2, 0, 2 go to the lower level.
unsigned decide_pair(double unscaled) {
    if (unscaled <= -2.0) return 0b00;
    if (unscaled <= 0.0) return 0b01;
    if (unscaled <= 2.0) return 0b11;
    return 0b10;
}

} // namespace

const std::array<Complex, 16>& qam16_constellation() {
    static const std::array<Complex, 16> points = [] {
        std::array<Complex, 16> p{};
        for (unsigned label = 0; label < 16; ++label)
            p[label] = Complex(level_of(label >> 2), level_of(label & 0b11)) * kScale;
        return p;
    }();
    return points;
}

BitBlock gen_random_bits(std::size_t count, Rng& rng) {
    if (count % bits_per_symbol != 0)
        throw std::invalid_argument("gen_random_bits: count " + std::to_string(count) +
                                    " is not a multiple of 4");
    BitBlock bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

std::vector<Complex> map_16qam(std::span<const std::uint8_t> bits) {
    if (bits.size() % bits_per_symbol != 0)
        throw DimensionError("map_16qam: bit count is not a multiple of 4");
    const auto& points = qam16_constellation();
    std::vector<Complex> symbols(bits.size() / bits_per_symbol);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const auto* b = bits.data() + s * bits_per_symbol;
        const unsigned label = (b[0] & 1u) << 3 | (b[1] & 1u) << 2 | (b[2] & 1u) << 1 | (b[3] & 1u);
        symbols[s] = points[label];
    }
    return symbols;
}

BitBlock demap_16qam(std::span<const Complex> symbols) {
    BitBlock bits(symbols.size() * bits_per_symbol);
    const double inv_scale = std::sqrt(10.0);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const unsigned i_pair = decide_pair(symbols[s].real() * inv_scale);
        const unsigned q_pair = decide_pair(symbols[s].imag() * inv_scale);
        auto* b = bits.data() + s * bits_per_symbol;
        b[0] = static_cast<std::uint8_t>(i_pair >> 1);
        b[1] = static_cast<std::uint8_t>(i_pair & 1u);
        b[2] = static_cast<std::uint8_t>(q_pair >> 1);
        b[3] = static_cast<std::uint8_t>(q_pair & 1u);
    }
    return bits;
}

BitErrorCount count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.size() != rx.size())
        throw DimensionError("count_bit_errors: lengths differ (" + std::to_string(tx.size()) + " vs " +
                             std::to_string(rx.size()) + ")");
    BitErrorCount c;
    c.bits = tx.size();
    for (std::size_t i = 0; i < tx.size(); ++i) c.errors += (tx[i] != rx[i]) ? 1u : 0u;
    c.ber = c.bits ? static_cast<double>(c.errors) / static_cast<double>(c.bits) : 0.0;
    return c;
}

} // namespace coae

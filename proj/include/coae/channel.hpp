#pragma once

#include "coae/rng.hpp"
#include "coae/signal.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace coae {

// Random-walk (Wiener) laser phase noise.
struct PhaseNoiseConfig {
    double linewidth_hz = 0.0;
    double symbol_period_s = 1.0 / 32e9;
    double initial_phase = 0.0;
    bool random_initial_phase = false;  // draw theta_0 ~ U[0, 2 pi) per path instead

    void validate() const;
};

// Per-step increment variance 2 pi * linewidth * T_s, in rad^2.
double phase_increment_variance(const PhaseNoiseConfig& cfg);

// theta_0 = initial phase, theta_{i+1} = theta_i + C_i with C_i ~ N(0, sigma^2) i.i.d.
std::vector<double> gen_phase_path(const PhaseNoiseConfig& cfg, std::size_t n, Rng& rng);

// Electrical SNR (dB) corresponding to an OSNR measured in reference bandwidth B_ref for a
// single-polarization signal at symbol rate R_s: SNR = OSNR * 2 B_ref / R_s.
double osnr_to_snr_db(double osnr_db, double symbol_rate_hz, double reference_bandwidth_hz);

// Per-real-component standard deviation of complex AWGN that realizes the given OSNR for a
// signal of mean power `signal_power`.
double osnr_to_noise_sigma(double osnr_db, double symbol_rate_hz, double reference_bandwidth_hz,
                           double signal_power);

struct ChannelConfig {
    PhaseNoiseConfig phase;
    std::optional<double> osnr_db;  // no value: noiseless
    double reference_bandwidth_hz = 12.5e9;
    bool use_ofdm_transforms = true;

    double symbol_rate_hz() const { return 1.0 / phase.symbol_period_s; }
    void validate() const;
};

// One draw of the channel's randomness for a whole batch, held fixed for the backward pass.
struct ChannelRealization {
    std::size_t blocks = 0;
    std::size_t block_size = 0;
    bool use_ofdm_transforms = true;
    std::vector<double> theta;    // blocks * block_size, one independent path per block
    std::vector<Complex> noise;   // blocks * block_size scaled AWGN samples, empty if noiseless
};

// Draws phase paths and noise. AWGN is calibrated against unit signal power, which is what
// the encoder's power normalization and the unit-energy constellation both provide.
ChannelRealization draw_realization(const ChannelConfig& cfg, std::size_t blocks, std::size_t block_size,
                                    Rng& rng);

// Per block: [IFFT] -> multiply by exp(j theta_i) -> [+ noise] -> [FFT].
ComplexBatch apply_channel(const ChannelRealization& realization, const ComplexBatch& w);

// The linear part of apply_channel (noise omitted).
ComplexBatch apply_channel_linear(const ChannelRealization& realization, const ComplexBatch& w);

struct ChannelOutput {
    ComplexBatch r;
    ChannelRealization realization;
};

ChannelOutput channel_forward(const ChannelConfig& cfg, const ComplexBatch& w, Rng& rng);

// Adjoint of apply_channel_linear: [IFFT] -> multiply by exp(-j theta_i) -> [FFT].
// Maps dL/dr (as complex gradients, Re + j Im) to dL/dw.
ComplexBatch channel_backward(const ChannelRealization& realization, const ComplexBatch& grad_r);

} // namespace coae

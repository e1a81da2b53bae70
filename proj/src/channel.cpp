#include "coae/channel.hpp"

#include "coae/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coae {

void PhaseNoiseConfig::validate() const {
    if (!(linewidth_hz >= 0.0) || !std::isfinite(linewidth_hz))
        throw std::invalid_argument("linewidth must be finite and non-negative");
    if (!(symbol_period_s > 0.0) || !std::isfinite(symbol_period_s))
        throw std::invalid_argument("symbol period must be positive");
}

double phase_increment_variance(const PhaseNoiseConfig& cfg) {
    cfg.validate();
    return 2.0 * std::numbers::pi * cfg.linewidth_hz * cfg.symbol_period_s;
}

std::vector<double> gen_phase_path(const PhaseNoiseConfig& cfg, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("gen_phase_path: path length must be positive");
    const double sigma = std::sqrt(phase_increment_variance(cfg));
    std::vector<double> theta(n);
    if (cfg.random_initial_phase) {
        std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
        theta[0] = uniform(rng);
    } else {
        theta[0] = cfg.initial_phase;
    }
    if (sigma == 0.0) {
        for (std::size_t i = 1; i < n; ++i) theta[i] = theta[0];
        return theta;
    }
    std::normal_distribution<double> step(0.0, sigma);
    for (std::size_t i = 1; i < n; ++i) theta[i] = theta[i - 1] + step(rng);
    return theta;
}

double osnr_to_snr_db(double osnr_db, double symbol_rate_hz, double reference_bandwidth_hz) {
    if (!(symbol_rate_hz > 0.0) || !(reference_bandwidth_hz > 0.0))
        throw std::invalid_argument("symbol rate and reference bandwidth must be positive");
    return osnr_db + 10.0 * std::log10(2.0 * reference_bandwidth_hz / symbol_rate_hz);
}

double osnr_to_noise_sigma(double osnr_db, double symbol_rate_hz, double reference_bandwidth_hz,
                           double signal_power) {
    if (!(signal_power > 0.0)) throw std::invalid_argument("signal power must be positive");
    const double snr = std::pow(10.0, osnr_to_snr_db(osnr_db, symbol_rate_hz, reference_bandwidth_hz) / 10.0);
    return std::sqrt(signal_power / snr / 2.0);
}

void ChannelConfig::validate() const {
    phase.validate();
    if (!(reference_bandwidth_hz > 0.0)) throw std::invalid_argument("reference bandwidth must be positive");
    if (osnr_db && !std::isfinite(*osnr_db)) throw std::invalid_argument("OSNR must be finite");
}

ChannelRealization draw_realization(const ChannelConfig& cfg, std::size_t blocks, std::size_t block_size,
                                    Rng& rng) {
    cfg.validate();
    ChannelRealization real;
    real.blocks = blocks;
    real.block_size = block_size;
    real.use_ofdm_transforms = cfg.use_ofdm_transforms;
    real.theta.reserve(blocks * block_size);
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto path = gen_phase_path(cfg.phase, block_size, rng);
        real.theta.insert(real.theta.end(), path.begin(), path.end());
    }
    if (cfg.osnr_db) {
        const double sigma =
            osnr_to_noise_sigma(*cfg.osnr_db, cfg.symbol_rate_hz(), cfg.reference_bandwidth_hz, 1.0);
        std::normal_distribution<double> gauss(0.0, sigma);
        real.noise.resize(blocks * block_size);
        for (auto& n : real.noise) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            n = {re, im};
        }
    }
    return real;
}

namespace {

void check_match(const ChannelRealization& real, const ComplexBatch& x) {
    if (x.blocks != real.blocks || x.block_size != real.block_size)
        throw DimensionError("channel: batch shape does not match the realization");
}

ComplexBatch run(const ChannelRealization& real, const ComplexBatch& w, bool with_noise, double sign) {
    check_match(real, w);
    ComplexBatch out = w;
    std::optional<FftPlan> plan;
    if (real.use_ofdm_transforms) plan.emplace(real.block_size);
    const bool add_noise = with_noise && !real.noise.empty();
    for (std::size_t b = 0; b < out.blocks; ++b) {
        auto block = out.block(b);
        if (plan) plan->inverse(block);
        for (std::size_t i = 0; i < block.size(); ++i) {
            const std::size_t k = b * real.block_size + i;
            block[i] *= std::polar(1.0, sign * real.theta[k]);
            if (add_noise) block[i] += real.noise[k];
        }
        if (plan) plan->forward(block);
    }
    return out;
}

} // namespace

ComplexBatch apply_channel(const ChannelRealization& realization, const ComplexBatch& w) {
    return run(realization, w, true, 1.0);
}

ComplexBatch apply_channel_linear(const ChannelRealization& realization, const ComplexBatch& w) {
    return run(realization, w, false, 1.0);
}

ChannelOutput channel_forward(const ChannelConfig& cfg, const ComplexBatch& w, Rng& rng) {
    ChannelOutput out;
    out.realization = draw_realization(cfg, w.blocks, w.block_size, rng);
    out.r = apply_channel(out.realization, w);
    return out;
}

ComplexBatch channel_backward(const ChannelRealization& realization, const ComplexBatch& grad_r) {
    // The forward map is F R F^{-1}; with F unitary its adjoint is F R^* F^{-1}, i.e. the
    // same pipeline with the rotation reversed.
    return run(realization, grad_r, false, -1.0);
}

} // namespace coae

#pragma once

#include "coae/autoencoder.hpp"
#include "coae/channel.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coae {

// Monte-Carlo stop rule: keep sending until target_errors errors have been seen (and at
// least min_bits sent), or until max_bits have been sent.
struct StopRule {
    std::uint64_t min_bits = 100'000;
    std::uint64_t max_bits = 10'000'000;
    std::uint64_t target_errors = 100;
};

struct BerPoint {
    double linewidth_hz = 0.0;
    double osnr_db = 0.0;  // NaN when the channel is noiseless
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    double ber = 0.0;

    // Relative standard error of the estimate, 1/sqrt(errors); infinite with no errors.
    double relative_std_error() const;
};

// Blocks per evaluation batch when none is given. The encoder normalizes power over the
// batch, so a large batch makes that normalization behave like the fixed gain it
// converges to during large-batch training.
inline constexpr std::size_t default_eval_batch_blocks = 1024;

// random bits -> 16-QAM -> encode -> channel -> decode -> hard decision, batch by batch
// (`batch_blocks` blocks per batch, 0 meaning default_eval_batch_blocks). The channel's
// OFDM-transform and noise settings are taken from `channel` as given. The bit count never
// exceeds max_bits by more than the rounding to whole blocks.
BerPoint measure_ber(const AeModel& model, const ChannelConfig& channel, const StopRule& stop, Rng& rng,
                     std::size_t batch_blocks = 0);

struct SweepSpec {
    std::vector<double> linewidths_hz{10e3, 100e3, 200e3, 500e3, 1e6, 2e6, 3e6};
    std::vector<double> osnr_db;
    StopRule stop;
    double fec_threshold = 3.8e-3;
    double symbol_rate_hz = 32e9;
    double reference_bandwidth_hz = 12.5e9;
    bool use_ofdm_transforms = true;
    bool random_initial_phase = false;
    std::size_t batch_blocks = 0;
    unsigned threads = 1;  // grid points evaluated concurrently; 0 = hardware concurrency
    std::uint64_t seed = 1;

    void validate(std::size_t block_size) const;
};

struct SweepResult {
    std::vector<double> linewidths_hz;
    std::vector<double> osnr_db;
    double fec_threshold = 0.0;
    StopRule stop;
    std::vector<BerPoint> points;                 // linewidth-major
    std::vector<std::optional<double>> required;  // per linewidth, required OSNR at the threshold

    const BerPoint& at(std::size_t linewidth_index, std::size_t osnr_index) const {
        return points[linewidth_index * osnr_db.size() + osnr_index];
    }
};

// Runs measure_ber over the full grid. Every grid point has its own RNG stream derived
// from (seed, linewidth index, OSNR index), so results do not depend on thread count or
// completion order.
SweepResult ber_osnr_sweep(const AeModel& model, const SweepSpec& spec);

struct CurvePoint {
    double osnr_db = 0.0;
    double ber = 0.0;
    std::uint64_t bits = 0;  // used to stand in for zero-BER points
};

// First crossing of `threshold`, interpolated linearly in (OSNR dB, log10 BER). A point
// with zero measured errors is placed at 1/(3 bits) for the interpolation. Returns no
// value if no point reaches the threshold. Throws std::invalid_argument for fewer than two
// points or an OSNR axis that is not strictly increasing.
std::optional<double> required_osnr(std::span<const CurvePoint> curve, double threshold);

std::vector<CurvePoint> curve_for_linewidth(const SweepResult& result, std::size_t linewidth_index);

// Column tag for a linewidth: 10000 -> "10k", 1e6 -> "1M", 0 -> "0".
std::string linewidth_tag(double hz);

// Shortest decimal text that round-trips to the same double; "nan" for NaN.
std::string format_double(double v);

struct LossSeries {
    std::string tag;
    std::vector<double> history;
};

// Plot tables. Whitespace-separated, one header line, rows in grid order. Missing values
// (shorter loss series, linewidths that never reach the threshold) are written as "nan".
std::string format_loss_dat(std::span<const LossSeries> series);          // e <tag>...
std::string format_ber_dat(const SweepResult& result);                    // OSNR <lw tag>...
struct TaggedSweep {
    std::string tag;
    const SweepResult* result = nullptr;
};
std::string format_lw_dat(std::span<const TaggedSweep> sweeps);          // lw <train tag>...

// Full result as JSON, including bit counts and per-point standard errors.
std::string format_sweep_json(const SweepResult& result, const std::string& model_tag);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

} // namespace coae

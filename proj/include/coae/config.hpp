#pragma once

#include "coae/experiments.hpp"
#include "coae/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace coae {

// A run configuration file: JSON with // comments allowed. Physical quantities carry
// their unit in the key name (_hz, _db, _s). Unknown keys are rejected. See
// configs/full_n1024_10k.json for an annotated example.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    std::string tag;  // column label for outputs; defaults to the training linewidth tag

    std::size_t fft_size = 0;
    double symbol_rate_hz = 32e9;
    double reference_bandwidth_hz = 12.5e9;
    bool use_ofdm_transforms = true;
    bool random_initial_phase = false;
    PowerNormalization power_normalization = PowerNormalization::per_batch;

    std::optional<TrainConfig> train;
    std::optional<SweepSpec> sweep;

    std::string effective_tag() const;
};

// Throws ConfigError naming the offending key path.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully-populated configuration (defaults filled in) as JSON text.
std::string effective_config_json(const RunConfig& cfg);

} // namespace coae

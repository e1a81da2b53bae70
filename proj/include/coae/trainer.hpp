#pragma once

#include "coae/autoencoder.hpp"
#include "coae/modem.hpp"
#include "coae/nn/adam.hpp"
#include "coae/nn/callbacks.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace coae {

struct TrainConfig {
    std::size_t block_size = 64;
    double linewidth_hz = 0.0;
    double symbol_rate_hz = 32e9;
    std::size_t batch_size = 0;  // 0: use block_size
    std::size_t steps_per_epoch = 100;
    std::size_t max_epochs = 300;
    double learning_rate = 1e-3;
    nn::AdamConfig adam;
    nn::CallbackConfig callbacks;
    bool use_ofdm_transforms = true;
    bool awgn_in_training = false;
    double training_osnr_db = 30.0;  // used only with awgn_in_training
    double reference_bandwidth_hz = 12.5e9;
    bool random_initial_phase = false;
    PowerNormalization power_normalization = PowerNormalization::per_batch;
    std::uint64_t seed = 1;

    std::size_t effective_batch_size() const { return batch_size ? batch_size : block_size; }
    ChannelConfig training_channel() const;
    void validate() const;
};

struct EpochReport {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;
    double learning_rate = 0.0;
    nn::EpochAction action = nn::EpochAction::proceed;
};

struct TrainResult {
    AeModel model;                     // parameters of the best epoch
    std::vector<double> loss_history;  // epoch-mean training loss, one entry per epoch run
    std::size_t best_epoch = 0;        // 1-based
    bool early_stopped = false;
};

// Raised when the loss or a gradient stops being finite. Carries the best parameters
// seen before the failure.
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(const std::string& what, AeModel last_good, std::size_t epoch)
        : std::runtime_error(what), last_good_(std::move(last_good)), epoch_(epoch) {}

    const AeModel& last_good() const { return last_good_; }
    std::size_t epoch() const { return epoch_; }

private:
    AeModel last_good_;
    std::size_t epoch_;
};

// End-to-end training: each step draws a fresh batch of random 16-QAM blocks, runs
// encoder -> phase-noise channel -> decoder, and applies one Adam update on the MSE.
// The epoch-mean loss drives learning-rate reduction and early stopping.
TrainResult train_autoencoder(const TrainConfig& cfg,
                              const std::function<void(const EpochReport&)>& on_epoch = {});

// Random 16-QAM blocks together with the bits they carry.
struct QamBatch {
    BitBlock bits;
    ComplexBatch symbols;
};

QamBatch random_qam_batch(std::size_t blocks, std::size_t block_size, Rng& rng);

} // namespace coae

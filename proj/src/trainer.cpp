#include "coae/trainer.hpp"

#include "coae/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace coae {

ChannelConfig TrainConfig::training_channel() const {
    ChannelConfig ch;
    ch.phase.linewidth_hz = linewidth_hz;
    ch.phase.symbol_period_s = 1.0 / symbol_rate_hz;
    ch.phase.random_initial_phase = random_initial_phase;
    ch.reference_bandwidth_hz = reference_bandwidth_hz;
    ch.use_ofdm_transforms = use_ofdm_transforms;
    if (awgn_in_training) ch.osnr_db = training_osnr_db;
    return ch;
}

void TrainConfig::validate() const {
    AeArchitecture{block_size, power_normalization}.validate();
    if (effective_batch_size() < 2) throw std::invalid_argument("batch size must be at least 2 (batch norm)");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
    if (steps_per_epoch < 1) throw std::invalid_argument("steps_per_epoch must be at least 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(symbol_rate_hz > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    callbacks.validate();
    training_channel().validate();
}

QamBatch random_qam_batch(std::size_t blocks, std::size_t block_size, Rng& rng) {
    QamBatch out;
    out.bits = gen_random_bits(blocks * block_size * bits_per_symbol, rng);
    out.symbols = ComplexBatch(blocks, block_size);
    out.symbols.samples = map_16qam(out.bits);
    return out;
}

TrainResult train_autoencoder(const TrainConfig& cfg, const std::function<void(const EpochReport&)>& on_epoch) {
    cfg.validate();
    Rng init_rng = make_rng(cfg.seed, {stream::init});
    Rng data_rng = make_rng(cfg.seed, {stream::data});
    Rng channel_rng = make_rng(cfg.seed, {stream::channel});

    AeModel model = AeModel::initialize({cfg.block_size, cfg.power_normalization}, init_rng);
    const ChannelConfig channel = cfg.training_channel();
    const std::size_t batch = cfg.effective_batch_size();

    nn::AdamState adam;
    adam.config = cfg.adam;
    double learning_rate = cfg.learning_rate;
    nn::TrainerCallbacks callbacks(cfg.callbacks);

    TrainResult result;
    result.model = model;
    double best = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double sum = 0.0;
        try {
            for (std::size_t step = 0; step < cfg.steps_per_epoch; ++step) {
                const auto data = random_qam_batch(batch, cfg.block_size, data_rng);
                auto fb = ae_forward_backward(model, data.symbols, channel, channel_rng);
                adam.learning_rate = learning_rate;
                const auto slots = parameter_slots(model, fb.grads);
                nn::adam_step(adam, slots);
                sum += fb.loss;
            }
        } catch (const NonFiniteError& e) {
            throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch) + ": " + e.what(),
                                   result.model, epoch);
        }
        const double epoch_loss = sum / static_cast<double>(cfg.steps_per_epoch);
        if (!std::isfinite(epoch_loss))
            throw TrainingDiverged("training diverged in epoch " + std::to_string(epoch), result.model, epoch);
        result.loss_history.push_back(epoch_loss);
        if (epoch_loss < best) {
            best = epoch_loss;
            result.model = model;
            result.best_epoch = epoch;
        }

        EpochReport report;
        report.epoch = epoch;
        report.loss = epoch_loss;
        report.action = callbacks.on_epoch_end(epoch_loss, learning_rate);
        report.learning_rate = learning_rate;
        if (on_epoch) on_epoch(report);
        if (report.action == nn::EpochAction::stop) {
            result.early_stopped = true;
            break;
        }
    }

    result.model.metadata.linewidth_hz = cfg.linewidth_hz;
    result.model.metadata.symbol_period_s = 1.0 / cfg.symbol_rate_hz;
    result.model.metadata.seed = cfg.seed;
    result.model.metadata.epochs_run = static_cast<std::uint32_t>(result.loss_history.size());
    result.model.metadata.final_loss = best;
    return result;
}

} // namespace coae

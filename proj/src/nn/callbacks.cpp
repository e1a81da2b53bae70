#include "coae/nn/callbacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coae::nn {

void CallbackConfig::validate() const {
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
        throw std::invalid_argument("plateau_factor must lie in (0, 1)");
    if (!(min_lr > 0.0)) throw std::invalid_argument("min_lr must be positive");
    if (plateau_patience < 1 || early_patience < 1)
        throw std::invalid_argument("patience values must be at least 1");
    if (!(early_min_delta >= 0.0)) throw std::invalid_argument("early_min_delta must be non-negative");
}

TrainerCallbacks::TrainerCallbacks(CallbackConfig config) : config_(config) { config_.validate(); }

EpochAction TrainerCallbacks::on_epoch_end(double epoch_loss, double& learning_rate) {
    if (!std::isfinite(epoch_loss)) throw std::invalid_argument("on_epoch_end: loss is not finite");

    if (epoch_loss < plateau_best_) {
        plateau_best_ = epoch_loss;
        plateau_wait_ = 0;
    } else {
        ++plateau_wait_;
    }

    if (epoch_loss < early_best_ - config_.early_min_delta) {
        early_best_ = epoch_loss;
        early_wait_ = 0;
    } else {
        ++early_wait_;
    }

    if (early_wait_ >= config_.early_patience) return EpochAction::stop;

    if (plateau_wait_ >= config_.plateau_patience) {
        plateau_wait_ = 0;
        if (learning_rate > config_.min_lr) {
            learning_rate = std::max(learning_rate * config_.plateau_factor, config_.min_lr);
            return EpochAction::reduce_lr;
        }
    }
    return EpochAction::proceed;
}

} // namespace coae::nn

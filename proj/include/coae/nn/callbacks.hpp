#pragma once

#include <cstddef>
#include <limits>

namespace coae::nn {

// Learning-rate-on-plateau and early-stopping settings.
struct CallbackConfig {
    double plateau_factor = 0.1;
    std::size_t plateau_patience = 10;
    double min_lr = 1e-10;
    double early_min_delta = 1e-4;
    std::size_t early_patience = 50;

    void validate() const;
};

enum class EpochAction { proceed, reduce_lr, stop };

// Tracks the monitored loss across epochs. The plateau rule counts epochs without any
// improvement over its best value; the early-stop rule counts epochs whose improvement
// over its best is not larger than early_min_delta.
class TrainerCallbacks {
public:
    explicit TrainerCallbacks(CallbackConfig config = {});

    // Updates the counters with this epoch's loss and possibly lowers `learning_rate`
    // (never below min_lr). Stop takes precedence over a learning-rate reduction.
    EpochAction on_epoch_end(double epoch_loss, double& learning_rate);

    const CallbackConfig& config() const { return config_; }
    double best_loss() const { return plateau_best_; }
    std::size_t plateau_wait() const { return plateau_wait_; }
    std::size_t early_wait() const { return early_wait_; }

private:
    CallbackConfig config_;
    double plateau_best_ = std::numeric_limits<double>::infinity();
    double early_best_ = std::numeric_limits<double>::infinity();
    std::size_t plateau_wait_ = 0;
    std::size_t early_wait_ = 0;
};

} // namespace coae::nn

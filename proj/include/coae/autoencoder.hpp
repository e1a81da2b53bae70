#pragma once

#include "coae/channel.hpp"
#include "coae/nn/batchnorm.hpp"
#include "coae/nn/dense.hpp"
#include "coae/rng.hpp"
#include "coae/signal.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace coae {

// Every layer is 2N -> 2N: two Dense+ReLU layers, each followed by batch normalization, and
// a linear Dense output, for both the encoder and the mirrored decoder.
struct AeArchitecture {
    static constexpr std::uint32_t version = 1;
    static constexpr std::size_t hidden_layers = 2;

    std::size_t block_size = 0;
    PowerNormalization power_normalization = PowerNormalization::per_batch;

    std::size_t width() const { return 2 * block_size; }
    void validate() const;
    // FNV-1a fingerprint of the layout, stored in checkpoints.
    std::uint64_t digest() const;

    friend bool operator==(const AeArchitecture&, const AeArchitecture&) = default;
};

// Dense -> ReLU -> BN, Dense -> ReLU -> BN, Dense.
struct LayerStack {
    std::array<nn::DenseLayer, AeArchitecture::hidden_layers + 1> dense;
    std::array<nn::BatchNormLayer, AeArchitecture::hidden_layers> norm;

    friend bool operator==(const LayerStack&, const LayerStack&) = default;
};

struct TrainingMetadata {
    double linewidth_hz = 0.0;
    double symbol_period_s = 1.0 / 32e9;
    std::uint64_t seed = 0;
    std::uint32_t epochs_run = 0;
    double final_loss = 0.0;

    friend bool operator==(const TrainingMetadata&, const TrainingMetadata&) = default;
};

struct AeModel {
    AeArchitecture architecture;
    LayerStack encoder;
    LayerStack decoder;
    TrainingMetadata metadata;

    // He-scaled orthogonal dense weights, hidden biases +1, output bias 0, identity batch norm.
    static AeModel initialize(const AeArchitecture& architecture, Rng& rng);

    // Throws DimensionError if any parameter shape disagrees with the architecture.
    void validate() const;

    friend bool operator==(const AeModel&, const AeModel&) = default;
};

// Gradients share the parameter layout; batch-norm running statistics are unused.
struct ModelGradients {
    LayerStack encoder;
    LayerStack decoder;
};

// Trainable tensors in a fixed order: encoder then decoder, each dense W, b then BN gamma, beta.
std::vector<nn::ParamSlot> parameter_slots(AeModel& model, const ModelGradients& grads);

// Inference-mode passes; pure functions of (model, input).
ComplexBatch encode(const AeModel& model, const ComplexBatch& x);
ComplexBatch decode(const AeModel& model, const ComplexBatch& r);

// Mode-selecting forms. Training mode uses batch statistics and updates the running ones.
ComplexBatch encoder_forward(AeModel& model, const ComplexBatch& x, nn::Mode mode);
ComplexBatch decoder_forward(AeModel& model, const ComplexBatch& r, nn::Mode mode);

struct ForwardBackward {
    double loss = 0.0;
    ModelGradients grads;
    std::uint64_t relu_signature = 0;  // fingerprint of every ReLU mask in the pass
};

// Training-mode encoder -> channel -> decoder pass with MSE against x and exact gradients
// for every trainable parameter, the channel realization held fixed.
ForwardBackward ae_forward_backward(AeModel& model, const ComplexBatch& x,
                                    const ChannelRealization& realization);

// Draws a fresh realization from `channel` and runs the pass above.
ForwardBackward ae_forward_backward(AeModel& model, const ComplexBatch& x, const ChannelConfig& channel,
                                    Rng& rng);

// Inference-mode reconstruction MSE through a given channel realization.
double reconstruction_mse(const AeModel& model, const ComplexBatch& x, const ChannelRealization& realization);

} // namespace coae

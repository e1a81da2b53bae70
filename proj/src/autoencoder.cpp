#include "coae/autoencoder.hpp"

#include "coae/errors.hpp"
#include "coae/nn/activations.hpp"
#include "coae/nn/loss.hpp"

#include <cmath>
#include <string>

namespace coae {

using nn::Mode;
using nn::RealBatch;

void AeArchitecture::validate() const {
    if (block_size < 2 || !is_power_of_two(block_size))
        throw DimensionError("block size must be a power of two >= 2, got " + std::to_string(block_size));
}

std::uint64_t AeArchitecture::digest() const {
    const std::string layout = "coae-dense-ae/v" + std::to_string(version) + "/N=" + std::to_string(block_size) +
                               "/width=" + std::to_string(width()) + "/hidden=" + std::to_string(hidden_layers) +
                               "/relu-bn/linear-out/power=" +
                               (power_normalization == PowerNormalization::per_batch ? "batch" : "block");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : layout) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

// Hidden biases start at +1, about one standard deviation of the pre-activations, so
// every ReLU begins in its linear region. With widths equal to the input width, a unit
// that dies early would otherwise cost a whole signal dimension for the rest of training.
constexpr double hidden_bias_init = 1.0;

LayerStack make_stack(Eigen::Index width, Rng& rng) {
    LayerStack s;
    for (auto& d : s.dense) d = nn::DenseLayer::he_orthogonal(width, rng);
    for (std::size_t l = 0; l < AeArchitecture::hidden_layers; ++l) s.dense[l].bias.setConstant(hidden_bias_init);
    for (auto& n : s.norm) n = nn::BatchNormLayer(width);
    return s;
}

LayerStack zero_like(const LayerStack& p) {
    LayerStack g;
    for (std::size_t i = 0; i < p.dense.size(); ++i) g.dense[i] = nn::DenseLayer(p.dense[i].in_dim(), p.dense[i].out_dim());
    for (std::size_t i = 0; i < p.norm.size(); ++i) {
        g.norm[i] = nn::BatchNormLayer(p.norm[i].dim());
        g.norm[i].gamma.setZero();
    }
    return g;
}

void validate_stack(const LayerStack& s, Eigen::Index width, const char* name) {
    for (const auto& d : s.dense) {
        nn::require_shape(d.weights, width, width, name);
        if (d.bias.size() != width) throw DimensionError(std::string(name) + ": bias width mismatch");
    }
    for (const auto& n : s.norm) {
        if (n.gamma.size() != width || n.beta.size() != width || n.running_mean.size() != width ||
            n.running_var.size() != width)
            throw DimensionError(std::string(name) + ": batch-norm width mismatch");
    }
}

struct StackCache {
    std::array<RealBatch, AeArchitecture::hidden_layers + 1> dense_in;
    std::array<nn::BatchNormCache, AeArchitecture::hidden_layers> norm;
    std::array<RealBatch, AeArchitecture::hidden_layers> pre_relu;
};

RealBatch stack_infer(const LayerStack& s, const RealBatch& x) {
    RealBatch h = x;
    for (std::size_t l = 0; l < AeArchitecture::hidden_layers; ++l)
        h = nn::batchnorm_forward(s.norm[l], nn::relu_forward(nn::dense_forward(s.dense[l], h)));
    return nn::dense_forward(s.dense.back(), h);
}

RealBatch stack_train(LayerStack& s, const RealBatch& x, StackCache& cache) {
    RealBatch h = x;
    for (std::size_t l = 0; l < AeArchitecture::hidden_layers; ++l) {
        cache.dense_in[l] = h;
        cache.pre_relu[l] = nn::dense_forward(s.dense[l], h);
        h = nn::batchnorm_forward(s.norm[l], nn::relu_forward(cache.pre_relu[l]), Mode::training, &cache.norm[l]);
    }
    cache.dense_in.back() = h;
    return nn::dense_forward(s.dense.back(), h);
}

RealBatch stack_forward(LayerStack& s, const RealBatch& x, Mode mode) {
    if (mode == Mode::inference) return stack_infer(s, x);
    StackCache unused;
    return stack_train(s, x, unused);
}

// Fills `grads` and returns the gradient with respect to the stack input.
RealBatch stack_backward(const LayerStack& s, const StackCache& cache, const RealBatch& grad_out,
                         LayerStack& grads) {
    auto out = nn::dense_backward(s.dense.back(), cache.dense_in.back(), grad_out);
    grads.dense.back().weights = std::move(out.grad_w);
    grads.dense.back().bias = std::move(out.grad_b);
    RealBatch g = std::move(out.grad_x);
    for (std::size_t l = AeArchitecture::hidden_layers; l-- > 0;) {
        auto bn = nn::batchnorm_backward(s.norm[l], cache.norm[l], g);
        grads.norm[l].gamma = std::move(bn.grad_gamma);
        grads.norm[l].beta = std::move(bn.grad_beta);
        auto d = nn::dense_backward(s.dense[l], cache.dense_in[l], nn::relu_backward(cache.pre_relu[l], bn.grad_x));
        grads.dense[l].weights = std::move(d.grad_w);
        grads.dense[l].bias = std::move(d.grad_b);
        g = std::move(d.grad_x);
    }
    return g;
}

void fold_mask(std::uint64_t& h, const RealBatch& pre_relu) {
    std::uint64_t word = 0;
    int nbits = 0;
    const double* p = pre_relu.data();
    for (Eigen::Index i = 0; i < pre_relu.size(); ++i) {
        word = (word << 1) | (p[i] > 0.0 ? 1u : 0u);
        if (++nbits == 64) {
            h = mix64(h ^ word);
            word = 0;
            nbits = 0;
        }
    }
    h = mix64(h ^ word ^ static_cast<std::uint64_t>(nbits));
}

void check_batch(const AeModel& model, const ComplexBatch& x, const char* what) {
    if (x.block_size != model.architecture.block_size)
        throw DimensionError(std::string(what) + ": block size " + std::to_string(x.block_size) +
                             " does not match model N=" + std::to_string(model.architecture.block_size));
    if (x.blocks == 0) throw DimensionError(std::string(what) + ": empty batch");
}

} // namespace

AeModel AeModel::initialize(const AeArchitecture& architecture, Rng& rng) {
    architecture.validate();
    AeModel m;
    m.architecture = architecture;
    const auto width = static_cast<Eigen::Index>(architecture.width());
    m.encoder = make_stack(width, rng);
    m.decoder = make_stack(width, rng);
    return m;
}

void AeModel::validate() const {
    architecture.validate();
    const auto width = static_cast<Eigen::Index>(architecture.width());
    validate_stack(encoder, width, "encoder");
    validate_stack(decoder, width, "decoder");
}

std::vector<nn::ParamSlot> parameter_slots(AeModel& model, const ModelGradients& grads) {
    std::vector<nn::ParamSlot> slots;
    auto add = [&](auto& value, const auto& grad) {
        if (value.size() != grad.size()) throw DimensionError("parameter_slots: gradient layout mismatch");
        slots.push_back({{value.data(), static_cast<std::size_t>(value.size())},
                         {grad.data(), static_cast<std::size_t>(grad.size())}});
    };
    auto add_stack = [&](LayerStack& p, const LayerStack& g) {
        for (std::size_t i = 0; i < p.dense.size(); ++i) {
            add(p.dense[i].weights, g.dense[i].weights);
            add(p.dense[i].bias, g.dense[i].bias);
        }
        for (std::size_t i = 0; i < p.norm.size(); ++i) {
            add(p.norm[i].gamma, g.norm[i].gamma);
            add(p.norm[i].beta, g.norm[i].beta);
        }
    };
    add_stack(model.encoder, grads.encoder);
    add_stack(model.decoder, grads.decoder);
    return slots;
}

ComplexBatch encode(const AeModel& model, const ComplexBatch& x) {
    check_batch(model, x, "encode");
    RealBatch z = stack_infer(model.encoder, c2r(x));
    normalize_power(z, model.architecture.power_normalization);
    return r2c(z);
}

ComplexBatch decode(const AeModel& model, const ComplexBatch& r) {
    check_batch(model, r, "decode");
    return r2c(stack_infer(model.decoder, c2r(r)));
}

ComplexBatch encoder_forward(AeModel& model, const ComplexBatch& x, Mode mode) {
    check_batch(model, x, "encoder_forward");
    RealBatch z = stack_forward(model.encoder, c2r(x), mode);
    normalize_power(z, model.architecture.power_normalization);
    return r2c(z);
}

ComplexBatch decoder_forward(AeModel& model, const ComplexBatch& r, Mode mode) {
    check_batch(model, r, "decoder_forward");
    return r2c(stack_forward(model.decoder, c2r(r), mode));
}

ForwardBackward ae_forward_backward(AeModel& model, const ComplexBatch& x,
                                    const ChannelRealization& realization) {
    check_batch(model, x, "ae_forward_backward");
    const PowerNormalization pn = model.architecture.power_normalization;
    const RealBatch x_real = c2r(x);

    StackCache enc_cache;
    RealBatch w_real = stack_train(model.encoder, x_real, enc_cache);
    if (!w_real.allFinite()) throw NonFiniteError("ae_forward_backward: encoder output is not finite");
    const auto scales = normalize_power(w_real, pn);
    const ComplexBatch r = apply_channel(realization, r2c(w_real));

    StackCache dec_cache;
    const RealBatch x_hat = stack_train(model.decoder, c2r(r), dec_cache);
    auto mse = nn::mse_loss(x_hat, x_real);
    if (!std::isfinite(mse.loss))
        throw NonFiniteError("ae_forward_backward: loss is not finite (max |x_hat| = " +
                             std::to_string(x_hat.cwiseAbs().maxCoeff()) + ")");

    ForwardBackward out;
    out.loss = mse.loss;
    out.grads.encoder = zero_like(model.encoder);
    out.grads.decoder = zero_like(model.decoder);

    const RealBatch grad_r = stack_backward(model.decoder, dec_cache, mse.grad, out.grads.decoder);
    const RealBatch grad_w = c2r(channel_backward(realization, r2c(grad_r)));
    const RealBatch grad_z = normalize_power_backward(w_real, scales, grad_w, pn);
    stack_backward(model.encoder, enc_cache, grad_z, out.grads.encoder);

    std::uint64_t sig = 0;
    for (const auto& p : enc_cache.pre_relu) fold_mask(sig, p);
    for (const auto& p : dec_cache.pre_relu) fold_mask(sig, p);
    out.relu_signature = sig;
    return out;
}

ForwardBackward ae_forward_backward(AeModel& model, const ComplexBatch& x, const ChannelConfig& channel,
                                    Rng& rng) {
    const auto realization = draw_realization(channel, x.blocks, x.block_size, rng);
    return ae_forward_backward(model, x, realization);
}

double reconstruction_mse(const AeModel& model, const ComplexBatch& x, const ChannelRealization& realization) {
    const ComplexBatch x_hat = decode(model, apply_channel(realization, encode(model, x)));
    return nn::mse_loss(c2r(x_hat), c2r(x)).loss;
}

} // namespace coae

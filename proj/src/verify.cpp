#include "coae/verify.hpp"

#include "coae/autoencoder.hpp"
#include "coae/channel.hpp"
#include "coae/experiments.hpp"
#include "coae/modem.hpp"
#include "coae/trainer.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace coae {

namespace {

CheckResult below(std::string name, double measured, double tolerance, std::string detail = {}) {
    return {std::move(name), measured < tolerance, measured, tolerance, std::move(detail)};
}

} // namespace

nn::GradientCheckReport end_to_end_gradient_check(std::size_t block_size, std::uint64_t seed, bool corrupt_gradient) {
    Rng init = make_rng(seed, {stream::verify, 1});
    AeModel model = AeModel::initialize({block_size, PowerNormalization::per_batch}, init);
    // Nudge batch-norm parameters away from their identity initialization so their
    // gradients are exercised in a generic configuration.
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (auto* stack : {&model.encoder, &model.decoder})
        for (auto& n : stack->norm) {
            for (auto& g : n.gamma) g += jitter(init);
            for (auto& b : n.beta) b += jitter(init);
        }

    Rng data_rng = make_rng(seed, {stream::verify, 2});
    const std::size_t blocks = block_size;
    const auto data = random_qam_batch(blocks, block_size, data_rng);

    ChannelConfig channel;
    channel.phase.linewidth_hz = 1e9;  // sigma^2 ~ 0.2 rad^2 per sample at 32 GBd
    channel.use_ofdm_transforms = true;
    Rng channel_rng = make_rng(seed, {stream::verify, 3});
    const auto realization = draw_realization(channel, blocks, block_size, channel_rng);

    AeModel probe = model;
    auto analytic = ae_forward_backward(probe, data.symbols, realization);
    if (corrupt_gradient) analytic.grads.encoder.dense[0].weights(0, 0) *= 1.05;

    std::uint64_t last_signature = 0;
    auto loss = [&] {
        const auto fb = ae_forward_backward(probe, data.symbols, realization);
        last_signature = fb.relu_signature;
        return fb.loss;
    };
    const auto slots = parameter_slots(probe, analytic.grads);
    return nn::gradient_check(loss, slots, {}, [&] { return last_signature; });
}

std::vector<CheckResult> verify_gradients(const VerifyOptions& options) {
    const auto report = end_to_end_gradient_check(8, options.seed, options.corrupt_gradient);
    return {below("gradient.end_to_end_N8", report.max_rel_error, 1e-4,
                  std::to_string(report.checked) + " parameters, worst index " + std::to_string(report.worst_index) +
                      ", " + std::to_string(report.kink_retries) + " kink retries")};
}

std::vector<CheckResult> verify_fft() {
    std::vector<CheckResult> out;
    Rng rng(12345);
    std::normal_distribution<double> gauss;
    for (std::size_t n : {4u, 64u, 1024u}) {
        std::vector<Complex> x(n);
        for (auto& v : x) v = {gauss(rng), gauss(rng)};
        const auto spectrum = fft_unitary(x);
        const auto back = ifft_unitary(spectrum);
        double round_trip = 0.0;
        for (std::size_t i = 0; i < n; ++i) round_trip = std::max(round_trip, std::abs(back[i] - x[i]));
        double e_time = 0.0;
        double e_freq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e_time += std::norm(x[i]);
            e_freq += std::norm(spectrum[i]);
        }
        const std::string suffix = "_N" + std::to_string(n);
        out.push_back(below("fft.round_trip" + suffix, round_trip, 1e-12, "max abs error"));
        out.push_back(below("fft.parseval" + suffix, std::abs(e_time - e_freq) / e_time, 1e-12, "relative energy error"));
    }
    return out;
}

std::vector<CheckResult> verify_phase_statistics(const VerifyOptions& options) {
    std::vector<CheckResult> out;
    PhaseNoiseConfig cfg;
    cfg.linewidth_hz = 100e3;
    cfg.symbol_period_s = 1.0 / 32e9;
    const double sigma2 = phase_increment_variance(cfg);

    // Var(theta_1000 - theta_0) over 20000 paths.
    Rng rng = make_rng(options.seed, {stream::verify, 10});
    const std::size_t paths = 20000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        const auto theta = gen_phase_path(cfg, 1001, rng);
        const double d = theta[1000] - theta[0];
        sum += d;
        sum_sq += d * d;
    }
    const double mean = sum / paths;
    const double var = sum_sq / paths - mean * mean;
    const double expected = 1000.0 * sigma2;
    out.push_back(below("phase.path_variance_n1000", std::abs(var / expected - 1.0), 0.05,
                        "sample variance " + format_double(var) + " vs " + format_double(expected) + " rad^2"));

    // Increment variance and lag-1 correlation over 1e6 increments.
    Rng rng2 = make_rng(options.seed, {stream::verify, 11});
    const auto theta = gen_phase_path(cfg, 1'000'001, rng2);
    std::vector<double> inc(theta.size() - 1);
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = theta[i + 1] - theta[i];
    double s = 0.0, s2 = 0.0;
    for (double v : inc) {
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(inc.size());
    const double inc_mean = s / n;
    const double inc_var = s2 / n - inc_mean * inc_mean;
    double lag = 0.0;
    for (std::size_t i = 0; i + 1 < inc.size(); ++i) lag += (inc[i] - inc_mean) * (inc[i + 1] - inc_mean);
    const double rho = lag / ((n - 1.0) * inc_var);
    out.push_back(below("phase.increment_variance", std::abs(inc_var / sigma2 - 1.0), 0.05,
                        "sample variance " + format_double(inc_var) + " vs " + format_double(sigma2) + " rad^2"));
    out.push_back(below("phase.lag1_autocorrelation", std::abs(rho), 0.01));
    return out;
}

double qam16_ber_approximation(double es_n0_db) {
    const double es_n0 = std::pow(10.0, es_n0_db / 10.0);
    return 0.375 * std::erfc(std::sqrt(es_n0 / 10.0));
}

std::vector<CheckResult> verify_qam_awgn_baseline(const VerifyOptions& options) {
    ChannelConfig ch;
    ch.use_ofdm_transforms = true;
    // OSNR that maps to Es/N0 = 10 dB under the single-polarization convention.
    ch.osnr_db = 10.0 - 10.0 * std::log10(2.0 * ch.reference_bandwidth_hz / ch.symbol_rate_hz());
    Rng rng = make_rng(options.seed, {stream::verify, 20});
    const std::size_t n = 1024;
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    while (bits < 1'000'000) {
        const auto data = random_qam_batch(1, n, rng);
        const auto r = channel_forward(ch, data.symbols, rng).r;
        const auto c = count_bit_errors(data.bits, demap_16qam(r.samples));
        bits += c.bits;
        errors += c.errors;
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits);
    const double reference = qam16_ber_approximation(10.0);
    return {below("qam16.awgn_ber_es_n0_10dB", std::abs(ber / reference - 1.0), 0.10,
                  "BER " + format_double(ber) + " over " + std::to_string(bits) + " bits vs " + format_double(reference))};
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
    std::vector<CheckResult> all;
    for (auto&& part : {verify_gradients(options), verify_fft(), verify_phase_statistics(options),
                        verify_qam_awgn_baseline(options)})
        all.insert(all.end(), part.begin(), part.end());
    return all;
}

std::string verification_report_json(const std::vector<CheckResult>& results) {
    nlohmann::ordered_json j;
    bool ok = true;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        checks.push_back({{"name", r.name},
                          {"passed", r.passed},
                          {"measured", r.measured},
                          {"tolerance", r.tolerance},
                          {"detail", r.detail}});
    }
    j["passed"] = ok;
    j["checks"] = std::move(checks);
    return j.dump(2) + "\n";
}

} // namespace coae

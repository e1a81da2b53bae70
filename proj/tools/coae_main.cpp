// coae: train, sweep and verify end-to-end OFDM autoencoders over laser phase noise.

#include "coae/checkpoint.hpp"
#include "coae/config.hpp"
#include "coae/errors.hpp"
#include "coae/experiments.hpp"
#include "coae/trainer.hpp"
#include "coae/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kRuntimeError = 3,
    kVerificationFailed = 4,
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

ordered_json manifest_base(const std::string& command, const coae::RunConfig& cfg, const std::string& config_path) {
    ordered_json m;
    m["tool"] = "coae";
    m["version"] = COAE_VERSION;
    m["revision"] = COAE_GIT_REVISION;
    m["command"] = command;
    m["config_path"] = config_path;
    m["seed"] = cfg.seed;
    m["seed_derivation"] =
        "SplitMix64 chain over (seed, stream id[, indices]); streams: init=1, data=2, channel=3, sweep=4 "
        "with (linewidth index, OSNR index)";
    m["config"] = ordered_json::parse(coae::effective_config_json(cfg));
    m["started_utc"] = utc_now();
    return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_train(const std::string& config_path, const std::string& output_override, bool quiet) {
    auto cfg = coae::load_run_config(config_path);
    if (!cfg.train) throw coae::ConfigError("train", "missing required section");
    if (!output_override.empty()) cfg.output_dir = output_override;
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);

    auto manifest = manifest_base("train", cfg, config_path);
    const auto start = std::chrono::steady_clock::now();
    auto progress = [&](const coae::EpochReport& r) {
        if (quiet) return;
        std::fprintf(stderr, "epoch %4zu  loss %.6e  lr %.1e%s\n", r.epoch, r.loss, r.learning_rate,
                     r.action == coae::nn::EpochAction::reduce_lr ? "  (lr reduced)"
                     : r.action == coae::nn::EpochAction::stop   ? "  (early stop)"
                                                                  : "");
    };
    const auto result = coae::train_autoencoder(*cfg.train, progress);
    const double elapsed = seconds_since(start);

    const std::string tag = cfg.effective_tag();
    const fs::path model_path = out / "model.coae";
    coae::save_model(result.model, model_path);
    const coae::LossSeries series{tag, result.loss_history};
    coae::write_text_file(out / "loss.dat", coae::format_loss_dat({&series, 1}));

    manifest["durations_s"] = {{"train", elapsed}};
    manifest["result"] = {{"epochs_run", result.loss_history.size()},
                          {"best_epoch", result.best_epoch},
                          {"best_loss", result.model.metadata.final_loss},
                          {"early_stopped", result.early_stopped}};
    manifest["outputs"] = {(out / "model.coae").string(), (out / "loss.dat").string()};
    coae::write_text_file(out / "manifest_train.json", manifest.dump(2) + "\n");
    if (!quiet)
        std::fprintf(stderr, "best loss %.6e at epoch %zu; wrote %s\n", result.model.metadata.final_loss,
                     result.best_epoch, model_path.c_str());
    return kOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& model_paths,
              const std::string& output_override, bool quiet) {
    auto cfg = coae::load_run_config(config_path);
    if (!cfg.sweep) throw coae::ConfigError("sweep", "missing required section");
    if (!output_override.empty()) cfg.output_dir = output_override;
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);

    auto manifest = manifest_base("sweep", cfg, config_path);
    ordered_json durations;
    ordered_json outputs = ordered_json::array();
    std::vector<std::pair<std::string, coae::SweepResult>> results;
    for (const auto& path : model_paths) {
        const auto model = coae::load_model(path);
        if (model.architecture.block_size != cfg.fft_size)
            throw std::runtime_error("checkpoint '" + path + "' has N=" + std::to_string(model.architecture.block_size) +
                                     " but the config sets system.fft_size=" + std::to_string(cfg.fft_size));
        const std::string tag = coae::linewidth_tag(model.metadata.linewidth_hz);
        if (!quiet) std::fprintf(stderr, "sweeping model %s (trained at %s)\n", path.c_str(), tag.c_str());
        const auto start = std::chrono::steady_clock::now();
        auto result = coae::ber_osnr_sweep(model, *cfg.sweep);
        durations[tag] = seconds_since(start);

        const fs::path ber_path = out / ("BER_" + tag + ".dat");
        const fs::path json_path = out / ("sweep_" + tag + ".json");
        coae::write_text_file(ber_path, coae::format_ber_dat(result));
        coae::write_text_file(json_path, coae::format_sweep_json(result, tag));
        outputs.push_back(ber_path.string());
        outputs.push_back(json_path.string());
        results.emplace_back(tag, std::move(result));
    }
    std::vector<coae::TaggedSweep> tagged;
    for (const auto& [tag, r] : results) tagged.push_back({tag, &r});
    coae::write_text_file(out / "lw.dat", coae::format_lw_dat(tagged));
    outputs.push_back((out / "lw.dat").string());

    manifest["models"] = model_paths;
    manifest["durations_s"] = durations;
    manifest["outputs"] = outputs;
    coae::write_text_file(out / "manifest_sweep.json", manifest.dump(2) + "\n");
    return kOk;
}

int cmd_verify(const std::string& report_path, std::uint64_t seed, bool inject_fault) {
    coae::VerifyOptions options;
    options.seed = seed;
    options.corrupt_gradient = inject_fault;
    const auto results = coae::run_verification(options);
    const std::string report = coae::verification_report_json(results);
    if (report_path.empty()) {
        std::cout << report;
    } else {
        coae::write_text_file(report_path, report);
    }
    bool ok = true;
    for (const auto& r : results) {
        std::fprintf(stderr, "[%s] %-32s measured %.3e  tolerance %.1e  %s\n", r.passed ? "PASS" : "FAIL",
                     r.name.c_str(), r.measured, r.tolerance, r.detail.c_str());
        ok = ok && r.passed;
    }
    return ok ? kOk : kVerificationFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"End-to-end OFDM autoencoder training and evaluation over laser phase noise"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    std::string config_path;
    std::string output_dir;
    auto* train = app.add_subcommand("train", "Train an autoencoder; writes model.coae, loss.dat, manifest");
    train->add_option("config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");

    std::vector<std::string> models;
    auto* sweep = app.add_subcommand("sweep", "BER vs OSNR sweep; writes BER_<tag>.dat, lw.dat, sweep_<tag>.json");
    sweep->add_option("config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-m,--model", models, "Checkpoint(s) to evaluate")->required();
    sweep->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");

    std::string report_path;
    std::uint64_t verify_seed = 1;
    bool inject_fault = false;
    auto* verify = app.add_subcommand("verify", "Run the gradient, FFT, phase-noise and QAM verification suites");
    verify->add_option("-r,--report", report_path, "Write the JSON report here instead of stdout");
    verify->add_option("--seed", verify_seed, "Seed for the randomized suites");
    verify->add_flag("--inject-gradient-fault", inject_fault, "Corrupt one analytic gradient (self-test)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*train) return cmd_train(config_path, output_dir, quiet);
        if (*sweep) return cmd_sweep(config_path, models, output_dir, quiet);
        return cmd_verify(report_path, verify_seed, inject_fault);
    } catch (const coae::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
}

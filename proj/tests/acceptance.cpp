// Acceptance checks for the whole system. Prints one PASS/FAIL line per criterion and exits
// non-zero if any gating criterion fails. The full-scale reproduction takes hours on a
// single core and only runs with --full-scale or COAE_FULL_SCALE=1.

#include "coae/autoencoder.hpp"
#include "coae/channel.hpp"
#include "coae/checkpoint.hpp"
#include "coae/config.hpp"
#include "coae/experiments.hpp"
#include "coae/modem.hpp"
#include "coae/signal.hpp"
#include "coae/trainer.hpp"
#include "coae/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace coae;

namespace {

// Pinned reference values and tolerances.
constexpr double kGradientTolerance = 1e-4;
constexpr double kPathVarianceReference = 1.9635e-2;  // 1000 * 2 pi * 100 kHz / 32 GBd
constexpr double kPathVarianceTolerance = 0.05;
constexpr double kFftTolerance = 1e-12;
constexpr double kAwgnBerReference = 5.9e-2;
constexpr double kAwgnBerTolerance = 0.10;
constexpr std::uint64_t kAwgnMinBits = 1'000'000;
constexpr double kDeskLossTarget = 5e-3;
constexpr std::size_t kDeskEpochLimit = 300;
constexpr double kDeskImprovementFactor = 10.0;
constexpr double kFecThreshold = 3.8e-3;
constexpr double kDeskMaxOsnrDb = 30.0;
constexpr double kMseAdvantage = 10.0;
constexpr double kRequiredOsnrReference = 10.84;
constexpr double kRequiredOsnrTolerance = 0.01;
constexpr double kFullScaleLossTarget = 1e-3;
constexpr double kFullScaleEpochTarget = 24.0;
constexpr double kFullScaleSlack = 3.0;

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::fail;
    std::string detail;
};

Outcome judge(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

struct Context {
    fs::path config_dir;
    fs::path cli;
    fs::path work_dir;
    std::uint64_t seed = 1;
    bool full_scale = false;

    // Shared between the desk-scale criteria.
    std::optional<RunConfig> desk;
    std::optional<TrainResult> desk_training;
    std::optional<SweepResult> desk_sweep;
};

Outcome gradient_exactness(Context& ctx) {
    const auto report = end_to_end_gradient_check(8, ctx.seed);
    return judge(report.max_rel_error < kGradientTolerance,
                 "max relative error " + sci(report.max_rel_error) + " over " + std::to_string(report.checked) +
                     " parameters (limit " + sci(kGradientTolerance) + ")");
}

Outcome phase_statistics(Context& ctx) {
    PhaseNoiseConfig cfg;
    cfg.linewidth_hz = 100e3;
    cfg.symbol_period_s = 1.0 / 32e9;
    Rng rng = make_rng(ctx.seed, {100, 2});
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
    const double var = (sum_sq - paths * mean * mean) / (paths - 1);
    const double rel = std::abs(var / kPathVarianceReference - 1.0);
    return judge(rel < kPathVarianceTolerance, "sample variance " + sci(var) + " rad^2 vs " +
                                                   sci(kPathVarianceReference) + " (relative error " + sci(rel) +
                                                   ", limit " + sci(kPathVarianceTolerance) + ")");
}

Outcome signal_layer(Context& ctx) {
    Rng rng = make_rng(ctx.seed, {100, 3});
    std::normal_distribution<double> gauss;
    double worst_round_trip = 0.0;
    double worst_parseval = 0.0;
    bool packing_exact = true;
    for (const std::size_t n : {std::size_t{4}, std::size_t{64}, std::size_t{1024}}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Complex> x(n);
            for (auto& v : x) v = {gauss(rng), gauss(rng)};
            const auto y = fft_unitary(x);
            const auto back = ifft_unitary(y);
            double err = 0.0;
            double ref = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                err = std::max(err, std::abs(back[i] - x[i]));
                ref = std::max(ref, std::abs(x[i]));
            }
            worst_round_trip = std::max(worst_round_trip, err / ref);
            double ex = 0.0;
            double ey = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                ex += std::norm(x[i]);
                ey += std::norm(y[i]);
            }
            worst_parseval = std::max(worst_parseval, std::abs(ey - ex) / ex);
            packing_exact = packing_exact && r2c(c2r(x)) == x;
        }
    }
    const bool ok = worst_round_trip < kFftTolerance && worst_parseval < kFftTolerance && packing_exact;
    return judge(ok, "round trip " + sci(worst_round_trip) + ", Parseval " + sci(worst_parseval) + " (limit " +
                         sci(kFftTolerance) + "); c2r/r2c " + (packing_exact ? "bit-exact" : "NOT bit-exact"));
}

Outcome awgn_oracle(Context& ctx) {
    ChannelConfig ch;
    ch.use_ofdm_transforms = false;
    // Es/N0 = 10 dB expressed as OSNR in the 12.5 GHz reference bandwidth.
    ch.osnr_db = 10.0 - 10.0 * std::log10(2.0 * ch.reference_bandwidth_hz / ch.symbol_rate_hz());
    const double snr_check = osnr_to_snr_db(*ch.osnr_db, ch.symbol_rate_hz(), ch.reference_bandwidth_hz);
    Rng rng = make_rng(ctx.seed, {100, 4});
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    while (bits < kAwgnMinBits) {
        const auto data = random_qam_batch(64, 1024, rng);
        const auto r = channel_forward(ch, data.symbols, rng).r;
        const auto c = count_bit_errors(data.bits, demap_16qam(r.samples));
        bits += c.bits;
        errors += c.errors;
    }
    const double ber = static_cast<double>(errors) / static_cast<double>(bits);
    const double rel = std::abs(ber / kAwgnBerReference - 1.0);
    return judge(rel < kAwgnBerTolerance && std::abs(snr_check - 10.0) < 1e-12,
                 "BER " + sci(ber) + " over " + std::to_string(bits) + " bits at OSNR " + sci(*ch.osnr_db) +
                     " dB vs " + sci(kAwgnBerReference) + " (relative error " + sci(rel) + ", limit " +
                     sci(kAwgnBerTolerance) + ")");
}

const RunConfig& desk_config(Context& ctx) {
    if (!ctx.desk) ctx.desk = load_run_config(ctx.config_dir / "desk_n64_10k.json");
    return *ctx.desk;
}

Outcome desk_convergence(Context& ctx) {
    const auto& cfg = desk_config(ctx);
    const auto start = std::chrono::steady_clock::now();
    ctx.desk_training = train_autoencoder(*cfg.train);
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
    const auto& h = ctx.desk_training->loss_history;
    const double best = *std::min_element(h.begin(), h.end());
    const auto first_below = std::find_if(h.begin(), h.end(), [](double v) { return v < kDeskLossTarget; });
    const double improvement = h.front() / best;
    const bool ok = first_below != h.end() && h.size() <= kDeskEpochLimit && improvement >= kDeskImprovementFactor;
    std::string when = first_below == h.end()
                           ? "never below target"
                           : "below target from epoch " + std::to_string(first_below - h.begin() + 1);
    return judge(ok, "best epoch-mean MSE " + sci(best) + " at epoch " +
                         std::to_string(ctx.desk_training->best_epoch) + " (" + when + ", target " +
                         sci(kDeskLossTarget) + "), " + std::to_string(h.size()) + " epochs run, improvement " +
                         sci(improvement) + "x over epoch 1, " + sci(minutes) + " min");
}

// Smallest BER over OSNR <= limit for one linewidth column.
double best_ber(const SweepResult& r, std::size_t lw, double osnr_limit) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.osnr_db.size(); ++k)
        if (r.osnr_db[k] <= osnr_limit) best = std::min(best, r.at(lw, k).ber);
    return best;
}

Outcome desk_mitigation(Context& ctx) {
    if (!ctx.desk_training) return {Status::fail, "no trained desk model"};
    const auto& cfg = desk_config(ctx);
    ctx.desk_sweep = ber_osnr_sweep(ctx.desk_training->model, *cfg.sweep);

    Rng rng = make_rng(cfg.seed, {100, 6});
    AeModel random_model = AeModel::initialize(ctx.desk_training->model.architecture, rng);
    const auto random_sweep = ber_osnr_sweep(random_model, *cfg.sweep);

    bool ok = true;
    std::string detail;
    for (const double lw : {10e3, 100e3}) {
        const auto it = std::find(cfg.sweep->linewidths_hz.begin(), cfg.sweep->linewidths_hz.end(), lw);
        if (it == cfg.sweep->linewidths_hz.end()) return {Status::fail, "sweep grid lacks " + linewidth_tag(lw)};
        const auto i = static_cast<std::size_t>(it - cfg.sweep->linewidths_hz.begin());
        const double trained = best_ber(*ctx.desk_sweep, i, kDeskMaxOsnrDb);
        const double untrained = best_ber(random_sweep, i, kDeskMaxOsnrDb);
        ok = ok && trained < kFecThreshold && untrained >= kFecThreshold;
        const auto req = ctx.desk_sweep->required[i];
        detail += linewidth_tag(lw) + ": trained best BER " + sci(trained) + " (required OSNR " +
                  (req ? sci(*req) + " dB" : std::string("none")) + "), random-init best BER " + sci(untrained) +
                  "; ";
    }
    // Reconstruction MSE of both models on the same draw at 10 kHz and 30 dB OSNR.
    ChannelConfig ch;
    ch.phase.linewidth_hz = 10e3;
    ch.phase.symbol_period_s = 1.0 / cfg.symbol_rate_hz;
    ch.osnr_db = 30.0;
    ch.reference_bandwidth_hz = cfg.reference_bandwidth_hz;
    Rng draw = make_rng(cfg.seed, {100, 7});
    const auto x = random_qam_batch(default_eval_batch_blocks, cfg.fft_size, draw).symbols;
    const auto realization = draw_realization(ch, x.blocks, x.block_size, draw);
    const double mse_trained = reconstruction_mse(ctx.desk_training->model, x, realization);
    const double mse_random = reconstruction_mse(random_model, x, realization);
    ok = ok && mse_random >= kMseAdvantage * mse_trained;
    detail += "MSE at 10k/30 dB trained " + sci(mse_trained) + " vs random-init " + sci(mse_random) + "; ";
    return judge(ok, detail + "threshold " + sci(kFecThreshold) + ", OSNR <= " + sci(kDeskMaxOsnrDb) + " dB");
}

Outcome determinism(Context& ctx) {
    const auto config = ctx.config_dir / "desk_n64_10k.json";
    const fs::path train_dir = ctx.work_dir / "train";
    const fs::path sweep_a = ctx.work_dir / "sweep_a";
    const fs::path sweep_b = ctx.work_dir / "sweep_b";
    for (const auto& dir : {train_dir, sweep_a, sweep_b}) fs::remove_all(dir);

    // A second, independent training run in a separate process.
    if (int rc = run_command(quote(ctx.cli) + " train " + quote(config) + " -o " + quote(train_dir) + " -q"); rc != 0)
        return {Status::fail, "coae train exited with " + std::to_string(rc)};
    const fs::path model = train_dir / "model.coae";
    for (const auto& out : {sweep_a, sweep_b}) {
        if (int rc = run_command(quote(ctx.cli) + " sweep " + quote(config) + " -m " + quote(model) + " -o " +
                                 quote(out) + " -q");
            rc != 0)
            return {Status::fail, "coae sweep exited with " + std::to_string(rc)};
    }

    std::vector<std::string> mismatches;
    std::size_t compared = 0;
    auto expect_same = [&](const std::string& label, const std::string& a, const std::string& b) {
        ++compared;
        if (a != b) mismatches.push_back(label);
    };

    std::string tag = desk_config(ctx).effective_tag();
    if (ctx.desk_training) {
        const LossSeries series{tag, ctx.desk_training->loss_history};
        expect_same("loss.dat", format_loss_dat({&series, 1}), read_file(train_dir / "loss.dat"));
        const auto bytes = serialize_model(ctx.desk_training->model);
        expect_same("model.coae", std::string(bytes.begin(), bytes.end()), read_file(model));
    } else {
        mismatches.push_back("loss.dat (no in-process run to compare)");
    }
    if (ctx.desk_sweep) expect_same("BER_" + tag + ".dat", format_ber_dat(*ctx.desk_sweep),
                                    read_file(sweep_a / ("BER_" + tag + ".dat")));
    for (const auto& name : {"BER_" + tag + ".dat", "sweep_" + tag + ".json", std::string("lw.dat")})
        expect_same(name + " (rerun)", read_file(sweep_a / name), read_file(sweep_b / name));

    if (!mismatches.empty()) {
        std::string list;
        for (const auto& m : mismatches) list += (list.empty() ? "" : ", ") + m;
        return {Status::fail, "differs: " + list};
    }
    return {Status::pass, std::to_string(compared) +
                              " artifacts byte-identical across in-process and CLI runs and a repeated sweep"};
}

Outcome required_osnr_hand_case(Context&) {
    const std::vector<CurvePoint> curve{{10.0, 1e-2, 1'000'000}, {12.0, 1e-3, 1'000'000}};
    const auto r = required_osnr(curve, kFecThreshold);
    if (!r) return {Status::fail, "no crossing found"};
    return judge(std::abs(*r - kRequiredOsnrReference) <= kRequiredOsnrTolerance,
                 "required OSNR " + sci(*r) + " dB vs " + sci(kRequiredOsnrReference) + " +/- " +
                     sci(kRequiredOsnrTolerance));
}

std::optional<double> required_at(const SweepResult& r, double lw) {
    for (std::size_t i = 0; i < r.linewidths_hz.size(); ++i)
        if (r.linewidths_hz[i] == lw) return r.required[i];
    return std::nullopt;
}

Outcome full_scale(Context& ctx) {
    if (!ctx.full_scale) return {Status::skip, "not run (pass --full-scale or set COAE_FULL_SCALE=1; takes hours)"};

    std::vector<std::pair<std::string, SweepResult>> sweeps;
    std::string detail;
    bool loss_ok = true;
    for (const char* name : {"full_n1024_10k.json", "full_n1024_100k.json"}) {
        const auto cfg = load_run_config(ctx.config_dir / name);
        std::fprintf(stderr, "full scale: training %s\n", name);
        const auto trained = train_autoencoder(*cfg.train, [](const EpochReport& r) {
            std::fprintf(stderr, "  epoch %zu loss %.4e\n", r.epoch, r.loss);
        });
        const auto& h = trained.loss_history;
        const auto hit = std::find_if(h.begin(), h.end(),
                                      [](double v) { return v <= kFullScaleLossTarget * kFullScaleSlack; });
        const bool this_ok = hit != h.end() && static_cast<double>(hit - h.begin() + 1) <=
                                                   kFullScaleEpochTarget * kFullScaleSlack;
        loss_ok = loss_ok && this_ok;
        detail += cfg.effective_tag() + " best loss " + sci(*std::min_element(h.begin(), h.end())) +
                  (hit == h.end() ? " never within 3x of 1e-3"
                                  : " within 3x of 1e-3 at epoch " + std::to_string(hit - h.begin() + 1)) +
                  "; ";
        std::fprintf(stderr, "full scale: sweeping %s\n", name);
        sweeps.emplace_back(cfg.effective_tag(), ber_osnr_sweep(trained.model, *cfg.sweep));
    }

    auto rank = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::infinity(); };
    bool monotone = true;
    bool usable = true;
    bool floor_3m = true;
    for (const auto& [tag, r] : sweeps) {
        for (std::size_t i = 0; i + 1 < r.linewidths_hz.size(); ++i)
            monotone = monotone && rank(r.required[i]) <= rank(r.required[i + 1]);
        for (std::size_t i = 0; i < r.linewidths_hz.size(); ++i) {
            if (r.linewidths_hz[i] <= 2e6) usable = usable && r.required[i].has_value();
            if (r.linewidths_hz[i] == 3e6) floor_3m = floor_3m && !r.required[i].has_value();
        }
    }
    const double at_1m_10k = rank(required_at(sweeps[0].second, 1e6));
    const double at_1m_100k = rank(required_at(sweeps[1].second, 1e6));
    const bool ordering = at_1m_10k <= at_1m_100k;
    detail += std::string("required OSNR non-decreasing in linewidth: ") + (monotone ? "yes" : "no") +
              "; threshold reached up to 2 MHz: " + (usable ? "yes" : "no") + "; 3 MHz floor above threshold: " +
              (floor_3m ? "yes" : "no") + "; at 1 MHz 10k model " + sci(at_1m_10k) + " dB vs 100k model " +
              sci(at_1m_100k) + " dB";
    return judge(loss_ok && monotone && usable && floor_3m && ordering, detail);
}

const char* label(Status s) {
    switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::skip: return "SKIP";
    }
    return "?";
}

} // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.config_dir = COAE_CONFIG_DIR;
    ctx.cli = COAE_CLI_PATH;
    ctx.work_dir = fs::current_path() / "acceptance_work";
    std::string config_dir = ctx.config_dir.string();
    std::string cli = ctx.cli.string();
    std::string work_dir = ctx.work_dir.string();

    CLI::App app{"End-to-end acceptance checks"};
    app.add_option("--config-dir", config_dir, "Directory holding the run configurations");
    app.add_option("--cli", cli, "Path to the coae executable");
    app.add_option("--work-dir", work_dir, "Scratch directory for CLI outputs");
    app.add_option("--seed", ctx.seed, "Seed for the statistical checks");
    app.add_flag("--full-scale", ctx.full_scale, "Also run the full-scale reproduction (hours)");
    CLI11_PARSE(app, argc, argv);
    ctx.config_dir = config_dir;
    ctx.cli = cli;
    ctx.work_dir = work_dir;
    if (const char* env = std::getenv("COAE_FULL_SCALE"); env && std::string(env) == "1") ctx.full_scale = true;

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome(Context&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "gradient exactness", gradient_exactness},
        {2, "phase-noise statistics", phase_statistics},
        {3, "signal layer", signal_layer},
        {4, "modem and OSNR calibration", awgn_oracle},
        {5, "desk-scale convergence", desk_convergence},
        {6, "desk-scale mitigation", desk_mitigation},
        {7, "determinism", determinism},
        {8, "required OSNR hand case", required_osnr_hand_case},
        {9, "full-scale reproduction", full_scale},
    };

    bool all_ok = true;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        all_ok = all_ok && o.status != Status::fail;
        std::printf("%s %d %s: %s\n", label(o.status), c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    return all_ok ? 0 : 1;
}

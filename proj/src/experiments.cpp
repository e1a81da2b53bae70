#include "coae/experiments.hpp"

#include "coae/errors.hpp"
#include "coae/modem.hpp"
#include "coae/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace coae {

double BerPoint::relative_std_error() const {
    return errors ? 1.0 / std::sqrt(static_cast<double>(errors)) : std::numeric_limits<double>::infinity();
}

BerPoint measure_ber(const AeModel& model, const ChannelConfig& channel, const StopRule& stop, Rng& rng,
                     std::size_t batch_blocks) {
    const std::size_t n = model.architecture.block_size;
    const std::size_t blocks = batch_blocks ? batch_blocks : default_eval_batch_blocks;
    if (stop.max_bits == 0) throw std::invalid_argument("measure_ber: max_bits must be positive");
    const std::uint64_t bits_per_block = n * bits_per_symbol;

    BerPoint point;
    point.linewidth_hz = channel.phase.linewidth_hz;
    point.osnr_db = channel.osnr_db.value_or(std::numeric_limits<double>::quiet_NaN());
    for (;;) {
        const auto data = random_qam_batch(blocks, n, rng);
        const auto w = encode(model, data.symbols);
        const auto r = channel_forward(channel, w, rng).r;
        const auto x_hat = decode(model, r);
        const auto rx = demap_16qam(x_hat.samples);
        // The whole batch goes through the model so the normalization statistics do not
        // depend on the budget, but only the blocks that fit under max_bits are counted.
        const std::uint64_t room = (stop.max_bits - point.bits + bits_per_block - 1) / bits_per_block;
        const std::size_t used = static_cast<std::size_t>(std::min<std::uint64_t>(blocks, room)) * bits_per_block;
        const auto count = count_bit_errors(std::span(data.bits).first(used), std::span(rx).first(used));
        point.bits += count.bits;
        point.errors += count.errors;
        if (point.bits >= stop.max_bits) break;
        if (point.errors >= stop.target_errors && point.bits >= stop.min_bits) break;
    }
    point.ber = static_cast<double>(point.errors) / static_cast<double>(point.bits);
    return point;
}

void SweepSpec::validate(std::size_t block_size) const {
    auto sorted_nonempty = [](const std::vector<double>& v, const char* name) {
        if (v.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
        if (!std::is_sorted(v.begin(), v.end())) throw std::invalid_argument(std::string(name) + " grid is not sorted");
    };
    sorted_nonempty(linewidths_hz, "linewidth");
    sorted_nonempty(osnr_db, "OSNR");
    if (stop.min_bits < bits_per_symbol * block_size)
        throw std::invalid_argument("min_bits must be at least 4 N");
    if (stop.max_bits < stop.min_bits) throw std::invalid_argument("max_bits must be >= min_bits");
    if (!(fec_threshold > 0.0 && fec_threshold < 1.0)) throw std::invalid_argument("FEC threshold must lie in (0, 1)");
}

SweepResult ber_osnr_sweep(const AeModel& model, const SweepSpec& spec) {
    spec.validate(model.architecture.block_size);
    SweepResult result;
    result.linewidths_hz = spec.linewidths_hz;
    result.osnr_db = spec.osnr_db;
    result.fec_threshold = spec.fec_threshold;
    result.stop = spec.stop;
    const std::size_t n_osnr = spec.osnr_db.size();
    const std::size_t total = spec.linewidths_hz.size() * n_osnr;
    result.points.resize(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) {
            const std::size_t li = idx / n_osnr;
            const std::size_t oi = idx % n_osnr;
            try {
                ChannelConfig ch;
                ch.phase.linewidth_hz = spec.linewidths_hz[li];
                ch.phase.symbol_period_s = 1.0 / spec.symbol_rate_hz;
                ch.phase.random_initial_phase = spec.random_initial_phase;
                ch.osnr_db = spec.osnr_db[oi];
                ch.reference_bandwidth_hz = spec.reference_bandwidth_hz;
                ch.use_ofdm_transforms = spec.use_ofdm_transforms;
                Rng rng = make_rng(spec.seed, {stream::sweep, li, oi});
                result.points[idx] = measure_ber(model, ch, spec.stop, rng, spec.batch_blocks);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    try {
                        throw std::runtime_error("sweep point (linewidth " + format_double(spec.linewidths_hz[li]) +
                                                 " Hz, OSNR " + format_double(spec.osnr_db[oi]) + " dB): " + e.what());
                    } catch (...) {
                        failure = std::current_exception();
                    }
                }
                next = total;
            }
        }
    };

    unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t li = 0; li < spec.linewidths_hz.size(); ++li) {
        const auto curve = curve_for_linewidth(result, li);
        result.required.push_back(curve.size() >= 2 ? required_osnr(curve, spec.fec_threshold)
                                  : (curve[0].ber <= spec.fec_threshold ? std::optional(curve[0].osnr_db)
                                                                        : std::nullopt));
    }
    return result;
}

std::vector<CurvePoint> curve_for_linewidth(const SweepResult& result, std::size_t linewidth_index) {
    std::vector<CurvePoint> curve;
    for (std::size_t oi = 0; oi < result.osnr_db.size(); ++oi) {
        const auto& p = result.at(linewidth_index, oi);
        curve.push_back({p.osnr_db, p.ber, p.bits});
    }
    return curve;
}

std::optional<double> required_osnr(std::span<const CurvePoint> curve, double threshold) {
    if (curve.size() < 2) throw std::invalid_argument("required_osnr: need at least two points");
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (!(curve[i].osnr_db > curve[i - 1].osnr_db))
            throw std::invalid_argument("required_osnr: OSNR values must be strictly increasing");
    if (!(threshold > 0.0)) throw std::invalid_argument("required_osnr: threshold must be positive");

    auto log_ber = [](const CurvePoint& p) {
        double ber = p.ber;
        if (ber <= 0.0) ber = p.bits ? 1.0 / (3.0 * static_cast<double>(p.bits)) : std::numeric_limits<double>::min();
        return std::log10(ber);
    };
    if (curve[0].ber <= threshold) return curve[0].osnr_db;
    const double target = std::log10(threshold);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].ber > threshold) continue;
        const double y0 = log_ber(curve[i - 1]);
        const double y1 = log_ber(curve[i]);
        if (y1 == target) return curve[i].osnr_db;
        const double frac = (y0 - target) / (y0 - y1);
        return curve[i - 1].osnr_db + frac * (curve[i].osnr_db - curve[i - 1].osnr_db);
    }
    return std::nullopt;
}

std::string linewidth_tag(double hz) {
    auto trim = [](double v) { return format_double(v); };
    if (hz >= 1e9 && std::fmod(hz, 1e8) == 0.0) return trim(hz / 1e9) + "G";
    if (hz >= 1e6 && std::fmod(hz, 1e5) == 0.0) return trim(hz / 1e6) + "M";
    if (hz >= 1e3 && std::fmod(hz, 1e2) == 0.0) return trim(hz / 1e3) + "k";
    return trim(hz);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_loss_dat(std::span<const LossSeries> series) {
    std::ostringstream out;
    out << "e";
    std::size_t rows = 0;
    for (const auto& s : series) {
        out << ' ' << s.tag;
        rows = std::max(rows, s.history.size());
    }
    out << '\n';
    for (std::size_t e = 0; e < rows; ++e) {
        out << e + 1;
        for (const auto& s : series) out << ' ' << (e < s.history.size() ? format_double(s.history[e]) : "nan");
        out << '\n';
    }
    return out.str();
}

std::string format_ber_dat(const SweepResult& result) {
    std::ostringstream out;
    out << "OSNR";
    for (double lw : result.linewidths_hz) out << ' ' << linewidth_tag(lw);
    out << '\n';
    for (std::size_t oi = 0; oi < result.osnr_db.size(); ++oi) {
        out << format_double(result.osnr_db[oi]);
        for (std::size_t li = 0; li < result.linewidths_hz.size(); ++li) out << ' ' << format_double(result.at(li, oi).ber);
        out << '\n';
    }
    return out.str();
}

std::string format_lw_dat(std::span<const TaggedSweep> sweeps) {
    if (sweeps.empty()) throw std::invalid_argument("format_lw_dat: no sweeps");
    const auto& grid = sweeps.front().result->linewidths_hz;
    for (const auto& s : sweeps)
        if (s.result->linewidths_hz != grid) throw std::invalid_argument("format_lw_dat: linewidth grids differ");
    std::ostringstream out;
    out << "lw";
    for (const auto& s : sweeps) out << ' ' << s.tag;
    out << '\n';
    for (std::size_t li = 0; li < grid.size(); ++li) {
        out << format_double(grid[li]);
        for (const auto& s : sweeps) {
            const auto& req = s.result->required[li];
            out << ' ' << (req ? format_double(*req) : "nan");
        }
        out << '\n';
    }
    return out.str();
}

std::string format_sweep_json(const SweepResult& result, const std::string& model_tag) {
    using nlohmann::ordered_json;
    auto number_or_null = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    ordered_json j;
    j["model"] = model_tag;
    j["fec_threshold"] = result.fec_threshold;
    j["stop_rule"] = {{"min_bits", result.stop.min_bits},
                      {"max_bits", result.stop.max_bits},
                      {"target_errors", result.stop.target_errors}};
    j["linewidths_hz"] = result.linewidths_hz;
    j["osnr_db"] = result.osnr_db;
    ordered_json points = ordered_json::array();
    for (const auto& p : result.points) {
        ordered_json e;
        e["linewidth_hz"] = p.linewidth_hz;
        e["osnr_db"] = number_or_null(p.osnr_db);
        e["bits"] = p.bits;
        e["errors"] = p.errors;
        e["ber"] = p.ber;
        e["relative_std_error"] = number_or_null(p.relative_std_error());
        e["note"] = p.errors == 0 ? "no errors observed; BER below ~1/bits"
                    : p.errors < result.stop.target_errors ? "bit budget exhausted before the target error count"
                                     : "target error count reached";
        points.push_back(std::move(e));
    }
    j["points"] = std::move(points);
    ordered_json req = ordered_json::array();
    for (std::size_t li = 0; li < result.linewidths_hz.size(); ++li) {
        ordered_json e;
        e["linewidth_hz"] = result.linewidths_hz[li];
        e["required_osnr_db"] = result.required[li] ? ordered_json(*result.required[li]) : ordered_json("not reached");
        req.push_back(std::move(e));
    }
    j["required_osnr"] = std::move(req);
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

} // namespace coae

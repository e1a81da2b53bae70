#include "coae/config.hpp"

#include "coae/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace coae {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <typename T>
    T get(const std::string& key, const T& fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return required<T>(key);
    }

    template <typename T>
    T required(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) throw ConfigError(key_path(key), "missing required key");
        const json& v = obj_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_float() || v.get<double>() < 0)
                        throw ConfigError(key_path(key), "expected a non-negative integer");
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(key_path(key), e.what());
        }
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(obj_.at(key), key_path(key));
    }

    void reject_unknown() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path, e.what());
    }
}

PowerNormalization parse_power_mode(const std::string& s, const std::string& path) {
    if (s == "batch") return PowerNormalization::per_batch;
    if (s == "block") return PowerNormalization::per_block;
    throw ConfigError(path, "expected \"batch\" or \"block\"");
}

} // namespace

std::string RunConfig::effective_tag() const {
    if (!tag.empty()) return tag;
    if (train) return linewidth_tag(train->linewidth_hz);
    return "model";
}

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
    Section top(root, "");
    RunConfig cfg;
    cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
    cfg.output_dir = top.get<std::string>("output_dir", cfg.output_dir);
    cfg.tag = top.get<std::string>("tag", cfg.tag);

    {
        if (!top.has("system")) throw ConfigError("system", "missing required section");
        Section sys = top.child("system");
        cfg.fft_size = sys.required<std::size_t>("fft_size");
        cfg.symbol_rate_hz = sys.get<double>("symbol_rate_hz", cfg.symbol_rate_hz);
        cfg.reference_bandwidth_hz = sys.get<double>("reference_bandwidth_hz", cfg.reference_bandwidth_hz);
        cfg.use_ofdm_transforms = sys.get<bool>("ofdm_transforms", cfg.use_ofdm_transforms);
        cfg.random_initial_phase = sys.get<bool>("random_initial_phase", cfg.random_initial_phase);
        cfg.power_normalization =
            parse_power_mode(sys.get<std::string>("power_normalization", "batch"), sys.key_path("power_normalization"));
        sys.reject_unknown();
        checked("system.fft_size", [&] { AeArchitecture{cfg.fft_size, cfg.power_normalization}.validate(); });
        if (!(cfg.symbol_rate_hz > 0.0)) throw ConfigError("system.symbol_rate_hz", "must be positive");
        if (!(cfg.reference_bandwidth_hz > 0.0)) throw ConfigError("system.reference_bandwidth_hz", "must be positive");
    }

    if (top.has("train")) {
        Section tr = top.child("train");
        TrainConfig t;
        t.block_size = cfg.fft_size;
        t.symbol_rate_hz = cfg.symbol_rate_hz;
        t.reference_bandwidth_hz = cfg.reference_bandwidth_hz;
        t.use_ofdm_transforms = cfg.use_ofdm_transforms;
        t.random_initial_phase = cfg.random_initial_phase;
        t.power_normalization = cfg.power_normalization;
        t.seed = cfg.seed;
        t.linewidth_hz = tr.required<double>("linewidth_hz");
        t.batch_size = tr.get<std::size_t>("batch_size", cfg.fft_size);
        t.steps_per_epoch = tr.get<std::size_t>("steps_per_epoch", t.steps_per_epoch);
        t.max_epochs = tr.get<std::size_t>("max_epochs", t.max_epochs);
        t.learning_rate = tr.get<double>("learning_rate", t.learning_rate);
        t.awgn_in_training = tr.get<bool>("awgn", t.awgn_in_training);
        t.training_osnr_db = tr.get<double>("osnr_db", t.training_osnr_db);
        if (tr.has("adam")) {
            Section a = tr.child("adam");
            t.adam.beta1 = a.get<double>("beta1", t.adam.beta1);
            t.adam.beta2 = a.get<double>("beta2", t.adam.beta2);
            t.adam.epsilon = a.get<double>("epsilon", t.adam.epsilon);
            a.reject_unknown();
        }
        if (tr.has("callbacks")) {
            Section c = tr.child("callbacks");
            auto& cb = t.callbacks;
            cb.plateau_factor = c.get<double>("plateau_factor", cb.plateau_factor);
            cb.plateau_patience = c.get<std::size_t>("plateau_patience", cb.plateau_patience);
            cb.min_lr = c.get<double>("min_lr", cb.min_lr);
            cb.early_min_delta = c.get<double>("early_min_delta", cb.early_min_delta);
            cb.early_patience = c.get<std::size_t>("early_patience", cb.early_patience);
            c.reject_unknown();
        }
        tr.reject_unknown();
        checked("train", [&] { t.validate(); });
        cfg.train = t;
    }

    if (top.has("sweep")) {
        Section sw = top.child("sweep");
        SweepSpec s;
        s.linewidths_hz = sw.required<std::vector<double>>("linewidths_hz");
        s.osnr_db = sw.required<std::vector<double>>("osnr_db");
        s.stop.min_bits = sw.get<std::uint64_t>("min_bits", s.stop.min_bits);
        s.stop.max_bits = sw.get<std::uint64_t>("max_bits", s.stop.max_bits);
        s.stop.target_errors = sw.get<std::uint64_t>("target_errors", s.stop.target_errors);
        s.fec_threshold = sw.get<double>("fec_threshold", s.fec_threshold);
        s.threads = sw.get<unsigned>("threads", s.threads);
        s.batch_blocks = sw.get<std::size_t>("batch_blocks", s.batch_blocks);
        sw.reject_unknown();
        s.symbol_rate_hz = cfg.symbol_rate_hz;
        s.reference_bandwidth_hz = cfg.reference_bandwidth_hz;
        s.use_ofdm_transforms = cfg.use_ofdm_transforms;
        s.random_initial_phase = cfg.random_initial_phase;
        s.seed = cfg.seed;
        checked("sweep", [&] { s.validate(cfg.fft_size); });
        cfg.sweep = s;
    }
    top.reject_unknown();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string effective_config_json(const RunConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["tag"] = cfg.effective_tag();
    j["system"] = {{"fft_size", cfg.fft_size},
                   {"symbol_rate_hz", cfg.symbol_rate_hz},
                   {"reference_bandwidth_hz", cfg.reference_bandwidth_hz},
                   {"ofdm_transforms", cfg.use_ofdm_transforms},
                   {"random_initial_phase", cfg.random_initial_phase},
                   {"power_normalization",
                    cfg.power_normalization == PowerNormalization::per_batch ? "batch" : "block"}};
    if (cfg.train) {
        const auto& t = *cfg.train;
        j["train"] = {{"linewidth_hz", t.linewidth_hz},
                      {"batch_size", t.effective_batch_size()},
                      {"steps_per_epoch", t.steps_per_epoch},
                      {"max_epochs", t.max_epochs},
                      {"learning_rate", t.learning_rate},
                      {"awgn", t.awgn_in_training},
                      {"osnr_db", t.training_osnr_db},
                      {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}}},
                      {"callbacks",
                       {{"plateau_factor", t.callbacks.plateau_factor},
                        {"plateau_patience", t.callbacks.plateau_patience},
                        {"min_lr", t.callbacks.min_lr},
                        {"early_min_delta", t.callbacks.early_min_delta},
                        {"early_patience", t.callbacks.early_patience}}}};
    }
    if (cfg.sweep) {
        const auto& s = *cfg.sweep;
        j["sweep"] = {{"linewidths_hz", s.linewidths_hz},
                      {"osnr_db", s.osnr_db},
                      {"min_bits", s.stop.min_bits},
                      {"max_bits", s.stop.max_bits},
                      {"target_errors", s.stop.target_errors},
                      {"fec_threshold", s.fec_threshold},
                      {"threads", s.threads},
                      {"batch_blocks", s.batch_blocks}};
    }
    return j.dump(2) + "\n";
}

} // namespace coae

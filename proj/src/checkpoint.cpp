#include "coae/checkpoint.hpp"

#include "coae/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>

namespace coae {

namespace {

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    template <typename T>
    void put(T value) {
        std::uint64_t bits = 0;
        if constexpr (std::is_same_v<T, double>) {
            bits = std::bit_cast<std::uint64_t>(value);
        } else {
            bits = static_cast<std::uint64_t>(value);
        }
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void put_string(std::string_view s) {
        put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        if constexpr (std::is_same_v<T, double>) {
            return std::bit_cast<double>(bits);
        } else {
            return static_cast<T>(bits);
        }
    }
    std::string get_string() {
        const auto n = get<std::uint16_t>();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > end_) throw CheckpointError("checkpoint is truncated or corrupt");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

template <typename Fn>
void for_each_tensor(LayerStack& stack, const std::string& prefix, Fn&& fn) {
    for (std::size_t i = 0; i < stack.dense.size(); ++i) {
        const std::string p = prefix + ".dense" + std::to_string(i);
        fn(p + ".weights", stack.dense[i].weights);
        fn(p + ".bias", stack.dense[i].bias);
    }
    for (std::size_t i = 0; i < stack.norm.size(); ++i) {
        const std::string p = prefix + ".norm" + std::to_string(i);
        auto& n = stack.norm[i];
        fn(p + ".gamma", n.gamma);
        fn(p + ".beta", n.beta);
        fn(p + ".running_mean", n.running_mean);
        fn(p + ".running_var", n.running_var);
        Eigen::Matrix<double, 1, 2> hyper(n.epsilon, n.momentum);
        fn(p + ".hyper", hyper);
        n.epsilon = hyper(0);
        n.momentum = hyper(1);
    }
}

// Weights and bias per dense layer; gamma, beta, running mean, running variance and the
// hyperparameter pair per batch-norm layer.
constexpr std::uint32_t tensors_per_stack = 2 * (AeArchitecture::hidden_layers + 1) + 5 * AeArchitecture::hidden_layers;

} // namespace

std::vector<std::uint8_t> serialize_model(const AeModel& model) {
    model.validate();
    Writer w;
    w.bytes.insert(w.bytes.end(), checkpoint_magic.begin(), checkpoint_magic.end());
    w.put<std::uint32_t>(checkpoint_format_version);
    w.put<std::uint32_t>(AeArchitecture::version);
    w.put<std::uint64_t>(model.architecture.block_size);
    w.put<std::uint8_t>(model.architecture.power_normalization == PowerNormalization::per_batch ? 0 : 1);
    w.put<std::uint64_t>(model.architecture.digest());
    w.put<double>(model.metadata.linewidth_hz);
    w.put<double>(model.metadata.symbol_period_s);
    w.put<std::uint64_t>(model.metadata.seed);
    w.put<std::uint32_t>(model.metadata.epochs_run);
    w.put<double>(model.metadata.final_loss);

    AeModel copy = model;  // for_each_tensor needs mutable access
    std::vector<std::pair<std::string, nn::Matrix>> tensors;
    auto collect = [&](const std::string& name, auto& t) { tensors.emplace_back(name, nn::Matrix(t)); };
    for_each_tensor(copy.encoder, "encoder", collect);
    for_each_tensor(copy.decoder, "decoder", collect);

    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        w.put_string(name);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rows()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t.cols()));
        for (Eigen::Index i = 0; i < t.size(); ++i) w.put<double>(t.data()[i]);
    }
    w.put<std::uint64_t>(fnv1a(w.bytes.data(), w.bytes.size()));
    return std::move(w.bytes);
}

AeModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < checkpoint_magic.size() + sizeof(std::uint64_t) ||
        std::memcmp(bytes.data(), checkpoint_magic.data(), checkpoint_magic.size()) != 0)
        throw CheckpointError("not a checkpoint file (bad magic or too short)");
    const std::size_t body = bytes.size() - sizeof(std::uint64_t);
    std::uint64_t stored = 0;
    for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
    if (stored != fnv1a(bytes.data(), body)) throw CheckpointError("checkpoint is truncated or corrupt (checksum)");

    Reader r(bytes, body);
    for (std::size_t i = 0; i < checkpoint_magic.size(); ++i) r.get<std::uint8_t>();
    const auto format = r.get<std::uint32_t>();
    if (format != checkpoint_format_version)
        throw CheckpointError("unsupported checkpoint format version " + std::to_string(format));
    const auto arch_version = r.get<std::uint32_t>();
    if (arch_version != AeArchitecture::version)
        throw CheckpointError("unsupported architecture version " + std::to_string(arch_version));

    AeModel model;
    model.architecture.block_size = static_cast<std::size_t>(r.get<std::uint64_t>());
    const auto pn = r.get<std::uint8_t>();
    if (pn > 1) throw CheckpointError("invalid power normalization tag");
    model.architecture.power_normalization = pn == 0 ? PowerNormalization::per_batch : PowerNormalization::per_block;
    try {
        model.architecture.validate();
    } catch (const DimensionError& e) {
        throw CheckpointError(std::string("invalid architecture: ") + e.what());
    }
    if (r.get<std::uint64_t>() != model.architecture.digest())
        throw CheckpointError("architecture digest mismatch");
    model.metadata.linewidth_hz = r.get<double>();
    model.metadata.symbol_period_s = r.get<double>();
    model.metadata.seed = r.get<std::uint64_t>();
    model.metadata.epochs_run = r.get<std::uint32_t>();
    model.metadata.final_loss = r.get<double>();

    const auto count = r.get<std::uint32_t>();
    if (count != 2 * tensors_per_stack) throw CheckpointError("unexpected tensor count " + std::to_string(count));

    auto load = [&](const std::string& name, auto& t) {
        const std::string stored_name = r.get_string();
        if (stored_name != name)
            throw CheckpointError("expected tensor '" + name + "', found '" + stored_name + "'");
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        using T = std::decay_t<decltype(t)>;
        const bool is_row = T::RowsAtCompileTime == 1;
        if (is_row && rows != 1) throw CheckpointError("tensor '" + name + "' must be a row vector");
        if (T::ColsAtCompileTime != Eigen::Dynamic && cols != static_cast<std::uint32_t>(T::ColsAtCompileTime))
            throw CheckpointError("tensor '" + name + "' has the wrong width");
        t.resize(rows, cols);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = r.get<double>();
    };
    for_each_tensor(model.encoder, "encoder", load);
    for_each_tensor(model.decoder, "decoder", load);
    if (r.position() != body) throw CheckpointError("trailing bytes after tensor data");
    try {
        model.validate();
    } catch (const DimensionError& e) {
        throw CheckpointError(std::string("shape inconsistency: ") + e.what());
    }
    return model;
}

void save_model(const AeModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write to '" + path.string() + "' failed");
}

AeModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize_model(bytes);
    } catch (const CheckpointError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }
}

} // namespace coae

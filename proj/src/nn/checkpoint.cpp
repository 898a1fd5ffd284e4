#include "labelsift/nn/checkpoint.hpp"

#include "labelsift/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace labelsift {

namespace {

constexpr char magic[8] = {'L', 'S', 'F', 'T', 'C', 'K', 'P', 'T'};

class Writer {
  public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }
    void raw(const char *data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

  private:
    template <typename U>
    void le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    std::vector<std::uint8_t> bytes_;
};

class Reader {
  public:
    explicit Reader(const std::vector<std::uint8_t> &bytes) : bytes_{bytes} {}
    std::uint8_t u8() { return take<std::uint8_t>(); }
    std::uint32_t u32() { return take<std::uint32_t>(); }
    std::uint64_t u64() { return take<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(take<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(take<std::uint64_t>()); }
    void expect_raw(const char *data, std::size_t n) {
        need(n);
        if (std::memcmp(bytes_.data() + pos_, data, n) != 0) {
            throw load_error(load_failure::bad_magic, "not a labelsift checkpoint");
        }
        pos_ += n;
    }
    [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw load_error(load_failure::truncated, "checkpoint is truncated");
        }
    }
    template <typename U>
    U take() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) {
            v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
        }
        pos_ += sizeof(U);
        return v;
    }
    const std::vector<std::uint8_t> &bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel &model) {
    Writer w;
    w.raw(magic, sizeof(magic));
    w.u32(checkpoint_version);
    const auto &spec = model.architecture();
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u32(static_cast<std::uint32_t>(spec.input_shape.size()));
    for (const auto d : spec.input_shape) {
        w.u64(d);
    }
    w.u64(spec.num_classes);
    w.u64(spec.depth);
    w.u64(spec.units);
    w.f64(spec.dropout);

    const auto &meta = model.metadata();
    w.u64(meta.epochs_run);
    w.u64(meta.best_epoch);
    w.f64(meta.best_accuracy);
    w.u8(meta.used_validation_split ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(meta.class_weights.size()));
    for (const double v : meta.class_weights) {
        w.f64(v);
    }
    w.u32(static_cast<std::uint32_t>(meta.epoch_losses.size()));
    for (const double v : meta.epoch_losses) {
        w.f64(v);
    }

    const auto params = model.network().parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto *p : params) {
        w.u64(static_cast<std::uint64_t>(p->rows()));
        w.u64(static_cast<std::uint64_t>(p->cols()));
        for (Eigen::Index i = 0; i < p->size(); ++i) {
            w.f32(p->data()[i]);
        }
    }
    return w.take();
}

TrainedModel deserialize_model(const std::vector<std::uint8_t> &bytes) {
    Reader r(bytes);
    r.expect_raw(magic, sizeof(magic));
    if (const auto version = r.u32(); version != checkpoint_version) {
        throw load_error(load_failure::parse, "unsupported checkpoint version " + std::to_string(version));
    }
    nn::ArchitectureSpec spec;
    const auto kind = r.u8();
    if (kind > 1) {
        throw load_error(load_failure::parse, "unknown architecture tag in checkpoint");
    }
    spec.kind = static_cast<nn::Architecture>(kind);
    const auto rank = r.u32();
    if (rank == 0 || rank > 3) {
        throw load_error(load_failure::parse, "invalid input rank in checkpoint");
    }
    for (std::uint32_t i = 0; i < rank; ++i) {
        spec.input_shape.push_back(r.u64());
    }
    spec.num_classes = r.u64();
    spec.depth = r.u64();
    spec.units = r.u64();
    spec.dropout = r.f64();

    TrainingMetadata meta;
    meta.epochs_run = r.u64();
    meta.best_epoch = r.u64();
    meta.best_accuracy = r.f64();
    meta.used_validation_split = r.u8() != 0;
    meta.class_weights.resize(r.u32());
    for (auto &v : meta.class_weights) {
        v = r.f64();
    }
    meta.epoch_losses.resize(r.u32());
    for (auto &v : meta.epoch_losses) {
        v = r.f64();
    }

    Rng unused(0);
    nn::Network<float> net;
    try {
        net = nn::build_network<float>(spec, unused);
    } catch (const std::invalid_argument &e) {
        throw load_error(load_failure::parse, std::string("checkpoint architecture is invalid: ") + e.what());
    }
    auto params = net.parameters();
    if (r.u32() != params.size()) {
        throw load_error(load_failure::parse, "checkpoint tensor count does not match its architecture");
    }
    for (auto *p : params) {
        const auto rows = r.u64();
        const auto cols = r.u64();
        if (rows != static_cast<std::uint64_t>(p->rows()) || cols != static_cast<std::uint64_t>(p->cols())) {
            throw load_error(load_failure::parse, "checkpoint tensor shape does not match its architecture");
        }
        for (Eigen::Index i = 0; i < p->size(); ++i) {
            p->data()[i] = r.f32();
        }
    }
    if (!r.done()) {
        throw load_error(load_failure::parse, "trailing bytes after checkpoint");
    }
    return {std::move(spec), std::move(net), std::move(meta)};
}

void save_model(const TrainedModel &model, const std::filesystem::path &path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw load_error(load_failure::io, "cannot write checkpoint '" + path.string() + "'");
    }
}

TrainedModel load_model(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw load_error(load_failure::io, "cannot open checkpoint '" + path.string() + "'");
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_model(bytes);
}

}  // namespace labelsift

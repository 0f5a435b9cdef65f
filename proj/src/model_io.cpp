#include "thermoguard/model_io.hpp"

#include "thermoguard/errors.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace thermoguard {

namespace {

struct Tensor {
    std::vector<std::uint64_t> shape;
    std::vector<double> values;
};

class Writer {
public:
    void bytes(std::string_view s) { out_.append(s); }
    template <typename T>
    void integer(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
    void real(double v) { integer(std::bit_cast<std::uint64_t>(v)); }
    void tensor(const Tensor& t) {
        integer(static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) integer(d);
        for (double v : t.values) real(v);
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::string_view bytes(std::size_t n, const char* what) {
        if (data_.size() - pos_ < n) throw TruncatedError(std::string("model container truncated while reading ") + what);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T integer(const char* what) {
        const auto s = bytes(sizeof(T), what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
        return static_cast<T>(v);
    }
    double real(const char* what) { return std::bit_cast<double>(integer<std::uint64_t>(what)); }
    Tensor tensor() {
        Tensor t;
        const auto ndim = integer<std::uint32_t>("tensor rank");
        if (ndim > 8) throw FormatError("model container has a tensor of rank " + std::to_string(ndim));
        std::uint64_t count = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            t.shape.push_back(integer<std::uint64_t>("tensor shape"));
            count *= t.shape.back();
        }
        if (count > (data_.size() - pos_) / 8) throw TruncatedError("model container truncated inside tensor data");
        t.values.resize(count);
        for (auto& v : t.values) v = real("tensor data");
        return t;
    }
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

Tensor from_matrix(const Matrix& m) {
    Tensor t{{static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
    t.values.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) t.values.push_back(m(i, j));
    return t;
}

Tensor from_vector(const Vector& v) {
    return {{static_cast<std::uint64_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

Matrix to_matrix(const Tensor& t, Index rows, Index cols, const char* what) {
    if (t.shape != std::vector<std::uint64_t>{static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols)}) {
        throw FormatError(std::string("unexpected shape for ") + what);
    }
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = t.values[k++];
    return m;
}

Vector to_vector(const Tensor& t, Index n, const char* what) {
    if (t.shape != std::vector<std::uint64_t>{static_cast<std::uint64_t>(n)}) {
        throw FormatError(std::string("unexpected shape for ") + what);
    }
    return Eigen::Map<const Vector>(t.values.data(), n);
}

std::vector<Tensor> model_tensors(const AnyModel& model) {
    std::vector<Tensor> out;
    if (const auto* bank = std::get_if<LinearBank>(&model)) {
        for (const auto& m : bank->targets) {
            out.push_back(from_vector(m.beta));
            out.push_back({{1}, {m.beta0}});
        }
    } else if (const auto* cnn = std::get_if<CnnModel>(&model)) {
        for (const auto& layer : cnn->params.layers) {
            const auto& tap0 = layer.taps.front();
            Tensor k{{static_cast<std::uint64_t>(tap0.rows()), static_cast<std::uint64_t>(tap0.cols()),
                      static_cast<std::uint64_t>(layer.taps.size())},
                     {}};
            for (Index o = 0; o < tap0.rows(); ++o)
                for (Index i = 0; i < tap0.cols(); ++i)
                    for (const auto& tap : layer.taps) k.values.push_back(tap(o, i));
            out.push_back(std::move(k));
            out.push_back(from_vector(layer.bias));
        }
        out.push_back(from_matrix(cnn->params.head_w));
        out.push_back(from_vector(cnn->params.head_b));
    } else {
        const auto& rnn = std::get<RnnModel>(model);
        for (const auto& layer : rnn.params.layers) {
            out.push_back(from_matrix(layer.W));
            out.push_back(from_matrix(layer.U));
            out.push_back(from_vector(layer.b));
        }
        out.push_back(from_matrix(rnn.params.head_w));
        out.push_back(from_vector(rnn.params.head_b));
    }
    return out;
}

AnyModel model_from_tensors(const ExperimentConfig& cfg, const std::vector<Tensor>& tensors) {
    std::size_t next = 0;
    auto take = [&]() -> const Tensor& {
        if (next >= tensors.size()) throw FormatError("model container holds too few tensors");
        return tensors[next++];
    };
    AnyModel result;
    switch (cfg.kind) {
        case ModelKind::linear: {
            LinearBank bank;
            for (Index j = 0; j < kTargetCount; ++j) {
                LinearModel m = cfg.linear_template();
                m.beta = to_vector(take(), cfg.input_count(), "linear weights");
                m.beta0 = to_vector(take(), 1, "linear intercept")(0);
                bank.targets.push_back(std::move(m));
            }
            result = std::move(bank);
            break;
        }
        case ModelKind::cnn: {
            CnnModel m;
            m.config = cfg.cnn_config();
            Index in = m.config.n_inputs;
            for (std::size_t l = 0; l < m.config.n_layers(); ++l) {
                const Index out = m.config.n_filter[l];
                const auto width = static_cast<std::uint64_t>(m.config.s_filter[l]);
                const Tensor& k = take();
                if (k.shape != std::vector<std::uint64_t>{static_cast<std::uint64_t>(out), static_cast<std::uint64_t>(in), width}) {
                    throw FormatError("unexpected shape for convolution kernel");
                }
                ConvLayer layer;
                layer.taps.assign(width, Matrix(out, in));
                std::size_t p = 0;
                for (Index o = 0; o < out; ++o)
                    for (Index i = 0; i < in; ++i)
                        for (auto& tap : layer.taps) tap(o, i) = k.values[p++];
                layer.bias = to_vector(take(), out, "convolution bias");
                m.params.layers.push_back(std::move(layer));
                in = out;
            }
            m.params.head_w = to_matrix(take(), m.config.n_outputs, in, "head weights");
            m.params.head_b = to_vector(take(), m.config.n_outputs, "head bias");
            result = std::move(m);
            break;
        }
        case ModelKind::rnn: {
            RnnModel m;
            m.config = cfg.rnn_config();
            Index in = m.config.n_inputs;
            for (const int hidden : m.config.neurons) {
                const Index H = hidden;
                LstmParams layer;
                layer.W = to_matrix(take(), 4 * H, in, "LSTM input weights");
                layer.U = to_matrix(take(), 4 * H, H, "LSTM recurrent weights");
                layer.b = to_vector(take(), 4 * H, "LSTM bias");
                m.params.layers.push_back(std::move(layer));
                in = H;
            }
            m.params.head_w = to_matrix(take(), m.config.n_outputs, in, "head weights");
            m.params.head_b = to_vector(take(), m.config.n_outputs, "head bias");
            result = std::move(m);
            break;
        }
    }
    if (next != tensors.size()) throw FormatError("model container holds unexpected extra tensors");
    return result;
}

}  // namespace

std::string serialize_model(const Estimator& estimator) {
    const auto kind = to_string(estimator.kind());
    if (estimator.kind() != estimator.config.kind) throw ConfigError("estimator model kind disagrees with its config");
    nlohmann::json config = {{"experiment", to_json(estimator.config)},
                             {"spans", estimator.config.spans.spans},
                             {"input_standardizer", to_json(estimator.input_standardizer)},
                             {"target_standardizer", to_json(estimator.target_standardizer)},
                             {"trained_on", estimator.trained_on}};
    const std::string config_text = config.dump();
    const auto tensors = model_tensors(estimator.model);

    Writer w;
    w.bytes(kContainerMagic);
    w.integer(kContainerVersion);
    w.integer(static_cast<std::uint32_t>(kind.size()));
    w.bytes(kind);
    w.integer(static_cast<std::uint64_t>(config_text.size()));
    w.bytes(config_text);
    w.integer(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) w.tensor(t);
    return w.take();
}

Estimator deserialize_model(std::string_view bytes, std::uint32_t expected_version) {
    if (bytes.size() < kContainerMagic.size() || bytes.substr(0, kContainerMagic.size()) != kContainerMagic) {
        throw FormatError("not a thermoguard model");
    }
    Reader r(bytes);
    r.bytes(kContainerMagic.size(), "magic");
    const auto version = r.integer<std::uint32_t>("version");
    if (version != expected_version) {
        throw VersionError("model container version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(expected_version) + ")");
    }
    const auto kind_len = r.integer<std::uint32_t>("kind tag length");
    if (kind_len > 16) throw FormatError("model container kind tag is too long");
    const std::string kind(r.bytes(kind_len, "kind tag"));
    ModelKind parsed_kind;
    try {
        parsed_kind = parse_model_kind(kind);
    } catch (const ConfigError&) {
        throw FormatError("model container has unknown kind tag '" + kind + "'");
    }
    const auto config_len = r.integer<std::uint64_t>("config length");
    const auto config_text = r.bytes(static_cast<std::size_t>(config_len), "config block");

    Estimator est;
    try {
        const auto config = nlohmann::json::parse(config_text);
        est.config = config_from_json(config.at("experiment"), parsed_kind);
        est.input_standardizer = standardizer_from_json(config.at("input_standardizer"));
        est.target_standardizer = standardizer_from_json(config.at("target_standardizer"));
        est.trained_on = config.value("trained_on", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model container config block is malformed: ") + e.what());
    }
    if (est.config.kind != parsed_kind) throw FormatError("model container kind tag disagrees with its config");
    if (est.input_standardizer.size() != est.config.input_count() || est.target_standardizer.size() != kTargetCount) {
        throw FormatError("model container standardizer sizes do not match the config");
    }

    const auto count = r.integer<std::uint32_t>("tensor count");
    std::vector<Tensor> tensors;
    for (std::uint32_t k = 0; k < count; ++k) tensors.push_back(r.tensor());
    if (!r.done()) throw FormatError("model container has trailing bytes");
    est.model = model_from_tensors(est.config, tensors);
    return est;
}

void save_model(const Estimator& estimator, const std::filesystem::path& path) {
    const std::string bytes = serialize_model(estimator);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot write model file " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw LoadError("write failed for model file " + path.string());
}

Estimator load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace thermoguard

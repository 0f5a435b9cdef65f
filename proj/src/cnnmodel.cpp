#include "thermoguard/cnnmodel.hpp"

#include "thermoguard/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace thermoguard {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation parse_activation(std::string_view text) {
    if (text == "relu") return Activation::relu;
    if (text == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(text) + "'");
}

void CnnConfig::validate() const {
    const auto n = n_filter.size();
    if (n == 0) throw ConfigError("CNN needs at least one layer");
    if (s_filter.size() != n || dilation.size() != n || dropout.size() != n) {
        throw ConfigError("CNN per-layer lists must all have n_layers entries");
    }
    for (std::size_t l = 0; l < n; ++l) {
        if (n_filter[l] < 1) throw ConfigError("filter counts must be >= 1");
        if (s_filter[l] < 1) throw ConfigError("filter widths must be >= 1");
        if (dilation[l] < 1) throw ConfigError("dilation rates must be >= 1");
        if (!(dropout[l] >= 0.0 && dropout[l] < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
    }
    if (seq_len < 1 || n_inputs < 1 || n_outputs < 1) throw ConfigError("CNN dimensions must be positive");
    if (receptive_field(*this) > seq_len) {
        throw ConfigError("receptive field " + std::to_string(receptive_field(*this)) + " exceeds sequence length " +
                          std::to_string(seq_len));
    }
}

Index receptive_field(const CnnConfig& config) {
    Index rf = 1;
    for (std::size_t l = 0; l < config.s_filter.size() && l < config.dilation.size(); ++l) {
        rf += static_cast<Index>(config.s_filter[l] - 1) * config.dilation[l];
    }
    return rf;
}

CnnModel init_cnn(const CnnConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    CnnModel m;
    m.config = config;
    Index in = config.n_inputs;
    for (std::size_t l = 0; l < config.n_layers(); ++l) {
        const Index out = config.n_filter[l];
        const int width = config.s_filter[l];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in * width));
        std::uniform_real_distribution<double> u(-scale, scale);
        ConvLayer layer;
        for (int k = 0; k < width; ++k) {
            Matrix tap(out, in);
            for (Index j = 0; j < tap.cols(); ++j)
                for (Index i = 0; i < tap.rows(); ++i) tap(i, j) = u(rng);
            layer.taps.push_back(std::move(tap));
        }
        layer.bias = Vector::Zero(out);
        m.params.layers.push_back(std::move(layer));
        in = out;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-scale, scale);
    m.params.head_w.resize(config.n_outputs, in);
    for (Index j = 0; j < in; ++j)
        for (Index i = 0; i < config.n_outputs; ++i) m.params.head_w(i, j) = u(rng);
    m.params.head_b = Vector::Zero(config.n_outputs);
    return m;
}

namespace {

void conv_forward(const ConvLayer& layer, int dilation, const Matrix& in, Matrix& pre) {
    const Index T = in.rows();
    const auto width = static_cast<Index>(layer.taps.size());
    pre.resize(T, layer.bias.size());
    pre.rowwise() = layer.bias.transpose();
    for (Index k = 0; k < width; ++k) {
        const Index shift = (width - 1 - k) * dilation;
        if (shift >= T) continue;
        pre.bottomRows(T - shift).noalias() += in.topRows(T - shift) * layer.taps[static_cast<std::size_t>(k)].transpose();
    }
}

Matrix activate(const Matrix& pre, Activation a) {
    return a == Activation::relu ? Matrix(pre.cwiseMax(0.0)) : pre;
}

void check_window_shape(const CnnModel& model, const WindowSet& windows) {
    if (windows.seq_len != model.config.seq_len || windows.feature_count() != model.config.n_inputs) {
        throw ShapeError("window shape (" + std::to_string(windows.seq_len) + "," +
                         std::to_string(windows.feature_count()) + ") does not match CNN config (" +
                         std::to_string(model.config.seq_len) + "," + std::to_string(model.config.n_inputs) + ")");
    }
}

Vector forward_one(const CnnModel& model, const Matrix& window, bool training, std::mt19937_64* rng,
                   CnnCache::Sample* sample) {
    const auto& cfg = model.config;
    Matrix a = window;
    Matrix pre;
    for (std::size_t l = 0; l < cfg.n_layers(); ++l) {
        conv_forward(model.params.layers[l], cfg.dilation[l], a, pre);
        Matrix out = activate(pre, cfg.activation);
        Matrix mask;
        if (training && cfg.dropout[l] > 0.0) {
            const double keep = 1.0 - cfg.dropout[l];
            std::bernoulli_distribution draw(keep);
            mask.resize(out.rows(), out.cols());
            for (Index j = 0; j < mask.cols(); ++j)
                for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = draw(*rng) ? 1.0 / keep : 0.0;
            out.array() *= mask.array();
        }
        if (sample) {
            sample->inputs.push_back(std::move(a));
            sample->pre.push_back(pre);
            sample->mask.push_back(std::move(mask));
        }
        a = std::move(out);
    }
    Vector pooled = a.colwise().mean().transpose();
    Vector y = model.params.head_w * pooled + model.params.head_b;
    if (sample) sample->pooled = std::move(pooled);
    return y;
}

}  // namespace

Matrix forward(const CnnModel& model, const WindowSet& windows, BatchIndices batch, bool training,
               std::uint64_t dropout_seed, CnnCache* cache) {
    check_window_shape(model, windows);
    std::mt19937_64 rng(dropout_seed);
    Matrix out(static_cast<Index>(batch.size()), model.config.n_outputs);
    if (cache) {
        cache->model = &model;
        cache->revision = model.revision;
        cache->samples.assign(batch.size(), {});
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Matrix window = windows.window(batch[b]);
        out.row(static_cast<Index>(b)) =
            forward_one(model, window, training, &rng, cache ? &cache->samples[b] : nullptr).transpose();
    }
    return out;
}

Vector forward_window(const CnnModel& model, const Matrix& window) {
    if (window.rows() != model.config.seq_len || window.cols() != model.config.n_inputs) {
        throw ShapeError("window shape does not match CNN config");
    }
    return forward_one(model, window, false, nullptr, nullptr);
}

std::vector<Matrix> layer_activations(const CnnModel& model, const Matrix& window) {
    std::vector<Matrix> acts;
    Matrix a = window;
    Matrix pre;
    for (std::size_t l = 0; l < model.config.n_layers(); ++l) {
        conv_forward(model.params.layers[l], model.config.dilation[l], a, pre);
        a = activate(pre, model.config.activation);
        acts.push_back(a);
    }
    return acts;
}

CnnParams zeros_like(const CnnParams& p) {
    CnnParams z;
    for (const auto& layer : p.layers) {
        ConvLayer zl;
        for (const auto& tap : layer.taps) zl.taps.push_back(Matrix::Zero(tap.rows(), tap.cols()));
        zl.bias = Vector::Zero(layer.bias.size());
        z.layers.push_back(std::move(zl));
    }
    z.head_w = Matrix::Zero(p.head_w.rows(), p.head_w.cols());
    z.head_b = Vector::Zero(p.head_b.size());
    return z;
}

CnnParams backward(const CnnModel& model, const CnnCache& cache, const Matrix& d_pred) {
    if (cache.model != &model || cache.revision != model.revision) {
        throw StaleCacheError("CNN cache does not belong to the current model state");
    }
    if (d_pred.rows() != static_cast<Index>(cache.samples.size()) || d_pred.cols() != model.config.n_outputs) {
        throw ShapeError("upstream gradient shape does not match the cached batch");
    }
    const auto& cfg = model.config;
    CnnParams g = zeros_like(model.params);
    for (std::size_t b = 0; b < cache.samples.size(); ++b) {
        const auto& s = cache.samples[b];
        const Vector dy = d_pred.row(static_cast<Index>(b)).transpose();
        g.head_w.noalias() += dy * s.pooled.transpose();
        g.head_b += dy;
        const Vector dp = model.params.head_w.transpose() * dy;

        const Index T = s.inputs.front().rows();
        Matrix da(T, dp.size());
        da.rowwise() = dp.transpose() / static_cast<double>(T);

        for (std::size_t l = cfg.n_layers(); l-- > 0;) {
            Matrix dz = da;
            if (s.mask[l].size() != 0) dz.array() *= s.mask[l].array();
            if (cfg.activation == Activation::relu) dz.array() *= (s.pre[l].array() > 0.0).cast<double>();

            const auto& layer = model.params.layers[l];
            auto& gl = g.layers[l];
            gl.bias += dz.colwise().sum().transpose();
            const auto width = static_cast<Index>(layer.taps.size());
            const Matrix& in = s.inputs[l];
            Matrix din;
            if (l > 0) din = Matrix::Zero(in.rows(), in.cols());
            for (Index k = 0; k < width; ++k) {
                const Index shift = (width - 1 - k) * cfg.dilation[l];
                if (shift >= T) continue;
                const auto ku = static_cast<std::size_t>(k);
                gl.taps[ku].noalias() += dz.bottomRows(T - shift).transpose() * in.topRows(T - shift);
                if (l > 0) din.topRows(T - shift).noalias() += dz.bottomRows(T - shift) * layer.taps[ku];
            }
            if (l > 0) da = std::move(din);
        }
    }
    return g;
}

void apply_update(CnnModel& model, const CnnParams& grads, double step) {
    auto& p = model.params;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t k = 0; k < p.layers[l].taps.size(); ++k) p.layers[l].taps[k] -= step * grads.layers[l].taps[k];
        p.layers[l].bias -= step * grads.layers[l].bias;
    }
    p.head_w -= step * grads.head_w;
    p.head_b -= step * grads.head_b;
    ++model.revision;
}

std::vector<double*> parameter_pointers(CnnParams& p) {
    std::vector<double*> out;
    auto add = [&](auto& m) {
        for (Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    for (auto& layer : p.layers) {
        for (auto& tap : layer.taps) add(tap);
        add(layer.bias);
    }
    add(p.head_w);
    add(p.head_b);
    return out;
}

std::vector<double> flatten(const CnnParams& p) {
    auto copy = p;
    std::vector<double> out;
    for (double* v : parameter_pointers(copy)) out.push_back(*v);
    return out;
}

Index parameter_count(const CnnParams& p) {
    Index n = p.head_w.size() + p.head_b.size();
    for (const auto& layer : p.layers) {
        for (const auto& tap : layer.taps) n += tap.size();
        n += layer.bias.size();
    }
    return n;
}

std::vector<std::vector<Index>> parameter_shapes(const CnnModel& model) {
    std::vector<std::vector<Index>> shapes;
    for (const auto& layer : model.params.layers) {
        const auto& tap = layer.taps.front();
        shapes.push_back({tap.rows(), tap.cols(), static_cast<Index>(layer.taps.size())});
    }
    shapes.push_back({model.params.head_w.rows(), model.params.head_w.cols()});
    return shapes;
}

}  // namespace thermoguard

#include "thermoguard/rnnmodel.hpp"

#include "thermoguard/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace thermoguard {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmState lstm_cell_step(const LstmParams& p, const Vector& x, const LstmState& state, const LstmActivations& act) {
    const Index H = p.hidden();
    if (p.W.rows() != 4 * H || p.U.rows() != 4 * H || p.b.size() != 4 * H) {
        throw ShapeError("LSTM parameter blocks must have 4*hidden rows");
    }
    if (x.size() != p.inputs() || state.h.size() != H || state.c.size() != H) {
        throw ShapeError("LSTM step input or state has the wrong dimension");
    }
    const Vector a = p.W * x + p.U * state.h + p.b;
    LstmState next;
    next.c.resize(H);
    next.h.resize(H);
    for (Index k = 0; k < H; ++k) {
        const double f = act.gate(a(LstmParams::forget * H + k));
        const double i = act.gate(a(LstmParams::input * H + k));
        const double o = act.gate(a(LstmParams::output * H + k));
        const double g = act.cell(a(LstmParams::candidate * H + k));
        next.c(k) = f * state.c(k) + i * g;
        next.h(k) = o * act.hidden(next.c(k));
    }
    return next;
}

void RnnConfig::validate() const {
    const auto n = neurons.size();
    if (n == 0) throw ConfigError("RNN needs at least one layer");
    if (dropout.size() != n || recurrent_dropout.size() != n) {
        throw ConfigError("RNN per-layer lists must all have n_layers entries");
    }
    for (std::size_t l = 0; l < n; ++l) {
        if (neurons[l] < 1) throw ConfigError("neuron counts must be >= 1");
        if (!(dropout[l] >= 0.0 && dropout[l] < 1.0) || !(recurrent_dropout[l] >= 0.0 && recurrent_dropout[l] < 1.0)) {
            throw ConfigError("dropout rates must lie in [0, 1)");
        }
    }
    if (seq_len < 1 || n_inputs < 1 || n_outputs < 1) throw ConfigError("RNN dimensions must be positive");
}

Index lstm_layer_parameter_count(Index inputs, Index hidden) {
    return 4 * (inputs * hidden + hidden * hidden + hidden);
}

RnnModel init_rnn(const RnnConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    RnnModel m;
    m.config = config;
    Index in = config.n_inputs;
    auto fill = [&](Matrix& w, double scale) {
        std::uniform_real_distribution<double> u(-scale, scale);
        for (Index j = 0; j < w.cols(); ++j)
            for (Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    };
    for (const int hidden : config.neurons) {
        const Index H = hidden;
        LstmParams layer;
        layer.W.resize(4 * H, in);
        layer.U.resize(4 * H, H);
        fill(layer.W, 1.0 / std::sqrt(static_cast<double>(in)));
        fill(layer.U, 1.0 / std::sqrt(static_cast<double>(H)));
        layer.b = Vector::Zero(4 * H);
        layer.b.segment(LstmParams::forget * H, H).setOnes();
        m.params.layers.push_back(std::move(layer));
        in = H;
    }
    m.params.head_w.resize(config.n_outputs, in);
    fill(m.params.head_w, 1.0 / std::sqrt(static_cast<double>(in)));
    m.params.head_b = Vector::Zero(config.n_outputs);
    return m;
}

namespace {

Matrix sigmoid(const Matrix& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

Matrix dropout_mask(Index rows, Index cols, double rate, std::mt19937_64& rng) {
    const double keep = 1.0 - rate;
    std::bernoulli_distribution draw(keep);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = draw(rng) ? 1.0 / keep : 0.0;
    return m;
}

// Runs the stack over time-major inputs (per step: features x batch) and returns the pooled last hidden sequence.
Matrix run_stack(const RnnModel& model, std::vector<Matrix> seq, bool training, std::mt19937_64& rng,
                 RnnCache* cache) {
    const auto& cfg = model.config;
    const Index B = seq.front().cols();
    const auto T = static_cast<Index>(seq.size());
    if (cache) cache->layers.assign(cfg.n_layers(), {});
    for (std::size_t l = 0; l < cfg.n_layers(); ++l) {
        const auto& p = model.params.layers[l];
        const Index H = p.hidden();
        Matrix in_mask;
        Matrix rec_mask;
        if (training && cfg.dropout[l] > 0.0) in_mask = dropout_mask(p.inputs(), B, cfg.dropout[l], rng);
        if (training && cfg.recurrent_dropout[l] > 0.0) rec_mask = dropout_mask(H, B, cfg.recurrent_dropout[l], rng);

        RnnCache::Layer* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) {
            lc->input_mask = in_mask;
            lc->recurrent_mask = rec_mask;
            for (auto* v : {&lc->x, &lc->h_prev, &lc->c_prev, &lc->f, &lc->i, &lc->o, &lc->g, &lc->tanh_c}) {
                v->reserve(static_cast<std::size_t>(T));
            }
        }
        Matrix h = Matrix::Zero(H, B);
        Matrix c = Matrix::Zero(H, B);
        Matrix a(4 * H, B);
        for (Index t = 0; t < T; ++t) {
            auto& x = seq[static_cast<std::size_t>(t)];
            if (in_mask.size()) x.array() *= in_mask.array();
            Matrix h_in = h;
            if (rec_mask.size()) h_in.array() *= rec_mask.array();
            a.noalias() = p.W * x;
            a.noalias() += p.U * h_in;
            a.colwise() += p.b;
            Matrix f = sigmoid(a.middleRows(LstmParams::forget * H, H));
            Matrix i = sigmoid(a.middleRows(LstmParams::input * H, H));
            Matrix o = sigmoid(a.middleRows(LstmParams::output * H, H));
            Matrix g = a.middleRows(LstmParams::candidate * H, H).array().tanh();
            Matrix c_next = f.cwiseProduct(c) + i.cwiseProduct(g);
            Matrix tc = c_next.array().tanh();
            Matrix h_next = o.cwiseProduct(tc);
            if (lc) {
                lc->x.push_back(std::move(x));
                lc->h_prev.push_back(std::move(h_in));
                lc->c_prev.push_back(std::move(c));
                lc->f.push_back(std::move(f));
                lc->i.push_back(std::move(i));
                lc->o.push_back(std::move(o));
                lc->g.push_back(std::move(g));
                lc->tanh_c.push_back(std::move(tc));
            }
            c = std::move(c_next);
            h = h_next;
            seq[static_cast<std::size_t>(t)] = std::move(h_next);  // becomes the next layer's input
        }
    }
    Matrix pooled = Matrix::Zero(seq.front().rows(), B);
    for (const auto& h : seq) pooled += h;
    pooled /= static_cast<double>(T);
    return pooled;
}

}  // namespace

Matrix forward(const RnnModel& model, const WindowSet& windows, BatchIndices batch, bool training,
               std::uint64_t dropout_seed, RnnCache* cache) {
    const auto& cfg = model.config;
    if (windows.seq_len != cfg.seq_len || windows.feature_count() != cfg.n_inputs) {
        throw ShapeError("window shape (" + std::to_string(windows.seq_len) + "," +
                         std::to_string(windows.feature_count()) + ") does not match RNN config (" +
                         std::to_string(cfg.seq_len) + "," + std::to_string(cfg.n_inputs) + ")");
    }
    const auto B = static_cast<Index>(batch.size());
    if (B == 0) return Matrix(0, cfg.n_outputs);
    std::vector<Matrix> seq(static_cast<std::size_t>(cfg.seq_len), Matrix(cfg.n_inputs, B));
    for (Index b = 0; b < B; ++b) {
        const Index start = windows.starts[static_cast<std::size_t>(batch[static_cast<std::size_t>(b)])];
        for (Index t = 0; t < cfg.seq_len; ++t) seq[static_cast<std::size_t>(t)].col(b) = windows.rows.row(start + t).transpose();
    }
    std::mt19937_64 rng(dropout_seed);
    Matrix pooled = run_stack(model, std::move(seq), training, rng, cache);
    Matrix y = model.params.head_w * pooled;
    y.colwise() += model.params.head_b;
    if (cache) {
        cache->model = &model;
        cache->revision = model.revision;
        cache->batch = B;
        cache->pooled = std::move(pooled);
    }
    return y.transpose();
}

Vector forward_window(const RnnModel& model, const Matrix& window) {
    if (window.rows() != model.config.seq_len || window.cols() != model.config.n_inputs) {
        throw ShapeError("window shape does not match RNN config");
    }
    std::vector<Matrix> seq;
    seq.reserve(static_cast<std::size_t>(window.rows()));
    for (Index t = 0; t < window.rows(); ++t) seq.emplace_back(window.row(t).transpose());
    std::mt19937_64 rng(0);
    const Matrix pooled = run_stack(model, std::move(seq), false, rng, nullptr);
    return model.params.head_w * pooled.col(0) + model.params.head_b;
}

RnnParams zeros_like(const RnnParams& p) {
    RnnParams z;
    for (const auto& layer : p.layers) {
        z.layers.push_back({Matrix::Zero(layer.W.rows(), layer.W.cols()), Matrix::Zero(layer.U.rows(), layer.U.cols()),
                            Vector::Zero(layer.b.size())});
    }
    z.head_w = Matrix::Zero(p.head_w.rows(), p.head_w.cols());
    z.head_b = Vector::Zero(p.head_b.size());
    return z;
}

RnnParams backward(const RnnModel& model, const RnnCache& cache, const Matrix& d_pred) {
    if (cache.model != &model || cache.revision != model.revision) {
        throw StaleCacheError("RNN cache does not belong to the current model state");
    }
    if (d_pred.rows() != cache.batch || d_pred.cols() != model.config.n_outputs) {
        throw ShapeError("upstream gradient shape does not match the cached batch");
    }
    RnnParams g = zeros_like(model.params);
    const Matrix dy = d_pred.transpose();  // outputs x batch
    g.head_w.noalias() = dy * cache.pooled.transpose();
    g.head_b = dy.rowwise().sum();
    const Matrix dpooled = model.params.head_w.transpose() * dy;

    const auto T = static_cast<std::size_t>(model.config.seq_len);
    std::vector<Matrix> dh_seq(T, dpooled / static_cast<double>(T));

    for (std::size_t l = model.config.n_layers(); l-- > 0;) {
        const auto& p = model.params.layers[l];
        const auto& lc = cache.layers[l];
        auto& gl = g.layers[l];
        const Index H = p.hidden();
        Matrix dh_next = Matrix::Zero(H, cache.batch);
        Matrix dc_next = Matrix::Zero(H, cache.batch);
        Matrix da(4 * H, cache.batch);
        std::vector<Matrix> dx_seq(l > 0 ? T : 0);
        for (std::size_t t = T; t-- > 0;) {
            const Matrix dh = dh_seq[t] + dh_next;
            const auto& o = lc.o[t];
            const auto& tc = lc.tanh_c[t];
            const auto& f = lc.f[t];
            const auto& i = lc.i[t];
            const auto& gg = lc.g[t];
            const Matrix dc = (dh.array() * o.array() * (1.0 - tc.array().square())).matrix() + dc_next;
            da.middleRows(LstmParams::forget * H, H) = (dc.array() * lc.c_prev[t].array() * f.array() * (1.0 - f.array())).matrix();
            da.middleRows(LstmParams::input * H, H) = (dc.array() * gg.array() * i.array() * (1.0 - i.array())).matrix();
            da.middleRows(LstmParams::output * H, H) = (dh.array() * tc.array() * o.array() * (1.0 - o.array())).matrix();
            da.middleRows(LstmParams::candidate * H, H) = (dc.array() * i.array() * (1.0 - gg.array().square())).matrix();
            dc_next = dc.cwiseProduct(f);

            gl.W.noalias() += da * lc.x[t].transpose();
            gl.U.noalias() += da * lc.h_prev[t].transpose();
            gl.b += da.rowwise().sum();

            dh_next.noalias() = p.U.transpose() * da;
            if (lc.recurrent_mask.size()) dh_next.array() *= lc.recurrent_mask.array();
            if (l > 0) {
                Matrix dx = p.W.transpose() * da;
                if (lc.input_mask.size()) dx.array() *= lc.input_mask.array();
                dx_seq[t] = std::move(dx);
            }
        }
        if (l > 0) dh_seq = std::move(dx_seq);
    }
    return g;
}

void apply_update(RnnModel& model, const RnnParams& grads, double step) {
    auto& p = model.params;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        p.layers[l].W -= step * grads.layers[l].W;
        p.layers[l].U -= step * grads.layers[l].U;
        p.layers[l].b -= step * grads.layers[l].b;
    }
    p.head_w -= step * grads.head_w;
    p.head_b -= step * grads.head_b;
    ++model.revision;
}

std::vector<double*> parameter_pointers(RnnParams& p) {
    std::vector<double*> out;
    auto add = [&](auto& m) {
        for (Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    for (auto& layer : p.layers) {
        add(layer.W);
        add(layer.U);
        add(layer.b);
    }
    add(p.head_w);
    add(p.head_b);
    return out;
}

std::vector<double> flatten(const RnnParams& p) {
    auto copy = p;
    std::vector<double> out;
    for (double* v : parameter_pointers(copy)) out.push_back(*v);
    return out;
}

Index parameter_count(const RnnParams& p) {
    Index n = p.head_w.size() + p.head_b.size();
    for (const auto& layer : p.layers) n += layer.W.size() + layer.U.size() + layer.b.size();
    return n;
}

}  // namespace thermoguard

#pragma once

#include "thermoguard/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace thermoguard {

double logistic(double x);

/// Gate nonlinearities of the LSTM cell: gate (sigma_g), candidate (sigma_c), output (sigma_h).
struct LstmActivations {
    double (*gate)(double) = &logistic;
    double (*cell)(double) = static_cast<double (*)(double)>(&std::tanh);
    double (*hidden)(double) = static_cast<double (*)(double)>(&std::tanh);
};

/// Weights of one LSTM layer with gates stacked in the order forget, input, output, candidate.
/// W is (4*hidden x input), U is (4*hidden x hidden), b has 4*hidden entries.
struct LstmParams {
    enum Gate : Index { forget = 0, input = 1, output = 2, candidate = 3 };

    Matrix W;
    Matrix U;
    Vector b;

    [[nodiscard]] Index hidden() const { return U.cols(); }
    [[nodiscard]] Index inputs() const { return W.cols(); }
    [[nodiscard]] auto W_gate(Gate g) const { return W.middleRows(g * hidden(), hidden()); }
    [[nodiscard]] auto U_gate(Gate g) const { return U.middleRows(g * hidden(), hidden()); }
    [[nodiscard]] auto b_gate(Gate g) const { return b.segment(g * hidden(), hidden()); }
};

struct LstmState {
    Vector h;
    Vector c;
};

/// One time step of the LSTM cell:
///   f = sg(W_f x + U_f h + b_f), i and o likewise, c~ = sc(W_c x + U_c h + b_c)
///   c' = f o c + i o c~,  h' = o o sh(c')
LstmState lstm_cell_step(const LstmParams& params, const Vector& x, const LstmState& state,
                         const LstmActivations& act = {});

/// Stacked LSTM defaults: two layers of 22 and 72 units, dropout (0, 0.1),
/// recurrent dropout (0.4, 0.1), sequences of 100 steps.
struct RnnConfig {
    std::vector<int> neurons{22, 72};
    std::vector<double> dropout{0.0, 0.1};
    std::vector<double> recurrent_dropout{0.4, 0.1};
    Index seq_len = 100;
    Index n_inputs = 27;
    Index n_outputs = kTargetCount;

    [[nodiscard]] std::size_t n_layers() const { return neurons.size(); }
    void validate() const;
};

/// Trainable tensors of the stacked LSTM; also the gradient container.
struct RnnParams {
    std::vector<LstmParams> layers;
    Matrix head_w;  ///< outputs x last hidden size
    Vector head_b;
};

struct RnnModel {
    RnnConfig config;
    RnnParams params;
    std::uint64_t revision = 0;
};

/// Uniform fan-in scaled weights, zero biases except the forget gate at +1.
RnnModel init_rnn(const RnnConfig& config, std::uint64_t seed);

/// Number of weights in one LSTM layer: 4 * (in*hidden + hidden^2 + hidden).
Index lstm_layer_parameter_count(Index inputs, Index hidden);

struct RnnCache {
    const RnnModel* model = nullptr;
    std::uint64_t revision = 0;
    Index batch = 0;
    struct Layer {
        Matrix input_mask;      ///< inputs x batch (empty when unused)
        Matrix recurrent_mask;  ///< hidden x batch (empty when unused)
        std::vector<Matrix> x, h_prev, c_prev, f, i, o, g, tanh_c;  ///< per step, columns are batch entries
    };
    std::vector<Layer> layers;
    Matrix pooled;  ///< hidden x batch
};

/// Predictions (batch x outputs) in standardized target units. Initial h and c
/// are zero; dropout masks are constant over each sequence and used only in training.
Matrix forward(const RnnModel& model, const WindowSet& windows, BatchIndices batch, bool training,
               std::uint64_t dropout_seed, RnnCache* cache = nullptr);

/// Single-window inference (time x features).
Vector forward_window(const RnnModel& model, const Matrix& window);

/// Backpropagation through time given d loss / d predictions (batch x outputs).
RnnParams backward(const RnnModel& model, const RnnCache& cache, const Matrix& d_pred);

RnnParams zeros_like(const RnnParams& p);
void apply_update(RnnModel& model, const RnnParams& grads, double step);
std::vector<double*> parameter_pointers(RnnParams& p);
std::vector<double> flatten(const RnnParams& p);
Index parameter_count(const RnnParams& p);

}  // namespace thermoguard

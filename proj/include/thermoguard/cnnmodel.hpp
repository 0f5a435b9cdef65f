#pragma once

#include "thermoguard/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace thermoguard {

enum class Activation { relu, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Temporal CNN layout. Defaults are the three-layer network used for
/// temperature estimation: filters (125, 5, 125), widths 2, dilations (3, 1, 1).
struct CnnConfig {
    std::vector<int> n_filter{125, 5, 125};
    std::vector<int> s_filter{2, 2, 2};
    std::vector<int> dilation{3, 1, 1};
    std::vector<double> dropout{0.0, 0.0, 0.0};
    Index seq_len = 100;
    Index n_inputs = 27;
    Index n_outputs = kTargetCount;
    Activation activation = Activation::relu;  ///< hidden-layer nonlinearity; the head is always affine

    [[nodiscard]] std::size_t n_layers() const { return n_filter.size(); }
    void validate() const;
};

/// 1 + sum over layers of (width - 1) * dilation.
Index receptive_field(const CnnConfig& config);

/// Causal dilated convolution. taps[k] (out x in) weighs the input at
/// t - (width - 1 - k) * dilation, so the last tap sees the current sample.
struct ConvLayer {
    std::vector<Matrix> taps;
    Vector bias;
};

/// Trainable tensors of the CNN; also used as the gradient container.
struct CnnParams {
    std::vector<ConvLayer> layers;
    Matrix head_w;  ///< outputs x last-layer channels
    Vector head_b;
};

struct CnnModel {
    CnnConfig config;
    CnnParams params;
    std::uint64_t revision = 0;  ///< bumped by every optimizer update; ties caches to a parameter state
};

/// Zero-mean uniform weights scaled by 1/sqrt(fan_in), zero biases.
CnnModel init_cnn(const CnnConfig& config, std::uint64_t seed);

/// Activations recorded by a training-mode forward pass.
struct CnnCache {
    const CnnModel* model = nullptr;
    std::uint64_t revision = 0;
    struct Sample {
        std::vector<Matrix> inputs;  ///< layer inputs, time x channels
        std::vector<Matrix> pre;     ///< pre-activations
        std::vector<Matrix> mask;    ///< scaled dropout masks (empty when unused)
        Vector pooled;
    };
    std::vector<Sample> samples;
};

/// Predictions (batch x outputs) in standardized target units for the windows `batch`.
/// Pass a cache to enable backward(); dropout is applied only when `training` is set.
Matrix forward(const CnnModel& model, const WindowSet& windows, BatchIndices batch, bool training,
               std::uint64_t dropout_seed, CnnCache* cache = nullptr);

/// Single-window convenience overload (time x features).
Vector forward_window(const CnnModel& model, const Matrix& window);

/// Pre-pooling activations of every layer for one window, inference mode.
std::vector<Matrix> layer_activations(const CnnModel& model, const Matrix& window);

/// Exact parameter gradients given d loss / d predictions (batch x outputs).
CnnParams backward(const CnnModel& model, const CnnCache& cache, const Matrix& d_pred);

CnnParams zeros_like(const CnnParams& p);
/// params -= step * grads, bumping the model revision.
void apply_update(CnnModel& model, const CnnParams& grads, double step);

/// Raw pointers to every scalar in a fixed traversal order (kernels, biases, head).
std::vector<double*> parameter_pointers(CnnParams& p);
std::vector<double> flatten(const CnnParams& p);
Index parameter_count(const CnnParams& p);

/// Kernel shapes as (out, in, width) followed by the head (outputs, channels).
std::vector<std::vector<Index>> parameter_shapes(const CnnModel& model);

}  // namespace thermoguard

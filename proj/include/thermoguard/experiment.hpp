#pragma once

// End-to-end estimator: EWMA expansion, standardization, windowing and one of
// the three model kinds, configured from a flat JSON hyperparameter document.

#include "thermoguard/dataio.hpp"
#include "thermoguard/features.hpp"
#include "thermoguard/model.hpp"
#include "thermoguard/train.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace thermoguard {

/// Hyperparameters of one experiment. Defaults reproduce the tuned settings
/// for each kind (elastic net alpha 0.43 / l1 0.99 with squared loss; CNN
/// 125-5-125 filters; LSTM 22-72 units; sequence length 100).
struct ExperimentConfig {
    ModelKind kind = ModelKind::linear;
    SpanSet spans = SpanSet::defaults();
    Index seq_len = 100;  ///< ignored by the linear kind, which sees one row at a time

    // linear
    double alpha = 0.43;
    double l1_ratio = 0.99;
    LossKind loss = LossKind::squared;
    double epsilon = 0.1;
    double delta = 1.0;

    // cnn
    std::vector<int> n_filter{125, 5, 125};
    std::vector<int> s_filter{2, 2, 2};
    std::vector<int> dilation{3, 1, 1};
    std::vector<double> cnn_dropout{0.0, 0.0, 0.0};

    // rnn
    std::vector<int> neurons{22, 72};
    std::vector<double> dropout{0.0, 0.1};
    std::vector<double> recurrent_dropout{0.4, 0.1};

    TrainConfig train;
    Index train_stride = 10;       ///< window stride for training and validation sets
    std::uint64_t init_seed = 0;   ///< weight initialization

    [[nodiscard]] Index input_count() const { return kRawInputCount * (1 + static_cast<Index>(spans.size())); }
    [[nodiscard]] Index window_length() const { return kind == ModelKind::linear ? 1 : seq_len; }
    [[nodiscard]] CnnConfig cnn_config() const;
    [[nodiscard]] RnnConfig rnn_config() const;
    [[nodiscard]] LinearModel linear_template() const;

    void validate() const;
};

/// Defaults for `kind` with every key of `overrides` applied on top.
ExperimentConfig config_from_json(const nlohmann::json& j, ModelKind default_kind = ModelKind::linear);
/// Applies the keys of `overrides` to `base`; unknown keys throw ConfigError.
ExperimentConfig apply_overrides(ExperimentConfig base, const nlohmann::json& overrides);
nlohmann::json to_json(const ExperimentConfig& c);

/// A trained model together with the exact input pipeline it was trained with.
struct Estimator {
    ExperimentConfig config;
    Standardizer input_standardizer;
    Standardizer target_standardizer;
    AnyModel model;
    std::vector<std::string> trained_on;  ///< training and validation profile ids

    [[nodiscard]] ModelKind kind() const { return kind_of(model); }
    [[nodiscard]] Index window_length() const { return config.window_length(); }
};

AnyModel init_model(const ExperimentConfig& config);

/// Windows over the given profiles with standardized features; targets
/// standardized too unless `raw_targets` is set.
WindowSet build_windows(const std::vector<const Profile*>& profiles, const ExperimentConfig& config,
                        const Standardizer& inputs, const Standardizer& targets, Index stride, bool raw_targets);

struct FitResult {
    Estimator estimator;
    TrainHistory history;
};

/// Fits standardizers on the training profiles, trains on them and checkpoints on validation.
FitResult fit_estimator(const Dataset& dataset, const Split& split, const ExperimentConfig& config);

/// Measured and predicted temperatures at every window end of a profile (stride 1).
struct ProfilePrediction {
    std::vector<std::int64_t> t;
    Matrix measured;   ///< degC
    Matrix predicted;  ///< degC

    [[nodiscard]] Matrix residual() const { return measured - predicted; }
};

ProfilePrediction predict_profile(const Estimator& estimator, const Profile& profile);

MetricsReport evaluate_profile(const Estimator& estimator, const Profile& profile);

}  // namespace thermoguard

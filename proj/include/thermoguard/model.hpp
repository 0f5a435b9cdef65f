#pragma once

#include "thermoguard/cnnmodel.hpp"
#include "thermoguard/linmodel.hpp"
#include "thermoguard/rnnmodel.hpp"

#include <string_view>
#include <variant>
#include <vector>

namespace thermoguard {

enum class ModelKind { linear, cnn, rnn };

std::string_view to_string(ModelKind k);
/// Throws ConfigError for anything but linear, cnn or rnn.
ModelKind parse_model_kind(std::string_view text);

/// One independent linear model per target temperature.
struct LinearBank {
    std::vector<LinearModel> targets;
};

using AnyModel = std::variant<LinearBank, CnnModel, RnnModel>;

ModelKind kind_of(const AnyModel& model);

/// Inference-mode predictions (windows x outputs) in standardized target units.
/// Linear models read the last row of every window.
Matrix predict(const AnyModel& model, const WindowSet& windows, BatchIndices batch);
Matrix predict_all(const AnyModel& model, const WindowSet& windows);

}  // namespace thermoguard

#include "thermoguard/model.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <string>

namespace thermoguard {

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::linear: return "linear";
        case ModelKind::cnn: return "cnn";
        case ModelKind::rnn: return "rnn";
    }
    return "linear";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "linear") return ModelKind::linear;
    if (text == "cnn") return ModelKind::cnn;
    if (text == "rnn") return ModelKind::rnn;
    throw ConfigError("unsupported model kind '" + std::string(text) + "' (expected linear, cnn or rnn)");
}

ModelKind kind_of(const AnyModel& model) { return static_cast<ModelKind>(model.index()); }

namespace {

constexpr Index kInferenceChunk = 256;

Matrix predict_linear(const LinearBank& bank, const WindowSet& windows, BatchIndices batch) {
    Matrix out(static_cast<Index>(batch.size()), static_cast<Index>(bank.targets.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto row = windows.rows.row(windows.end_row(batch[b]));
        for (std::size_t j = 0; j < bank.targets.size(); ++j) {
            out(static_cast<Index>(b), static_cast<Index>(j)) = predict_row(bank.targets[j], row);
        }
    }
    return out;
}

}  // namespace

Matrix predict(const AnyModel& model, const WindowSet& windows, BatchIndices batch) {
    if (const auto* bank = std::get_if<LinearBank>(&model)) return predict_linear(*bank, windows, batch);
    const Index outputs = std::visit(
        [](const auto& m) -> Index {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, LinearBank>) {
                return static_cast<Index>(m.targets.size());
            } else {
                return m.config.n_outputs;
            }
        },
        model);
    Matrix out(static_cast<Index>(batch.size()), outputs);
    for (std::size_t start = 0; start < batch.size(); start += kInferenceChunk) {
        const auto len = std::min<std::size_t>(kInferenceChunk, batch.size() - start);
        const auto chunk = batch.subspan(start, len);
        Matrix part;
        if (const auto* cnn = std::get_if<CnnModel>(&model)) {
            part = forward(*cnn, windows, chunk, false, 0);
        } else {
            part = forward(std::get<RnnModel>(model), windows, chunk, false, 0);
        }
        out.middleRows(static_cast<Index>(start), static_cast<Index>(len)) = part;
    }
    return out;
}

Matrix predict_all(const AnyModel& model, const WindowSet& windows) {
    const auto idx = all_indices(windows);
    return predict(model, windows, idx);
}

}  // namespace thermoguard

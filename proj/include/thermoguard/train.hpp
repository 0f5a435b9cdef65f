#pragma once

#include "thermoguard/features.hpp"
#include "thermoguard/linmodel.hpp"
#include "thermoguard/metrics.hpp"
#include "thermoguard/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <vector>

namespace thermoguard {

/// Optimization settings. Epoch budget, batch mode and batch size live in `sgd`.
struct TrainConfig {
    SgdConfig sgd;
    int patience = 10;        ///< epochs without a min_delta improvement before stopping
    double min_delta = 1e-5;  ///< validation MSE improvement that resets patience
    std::uint64_t seed = 0;   ///< shuffling and dropout masks

    void validate() const;
};

struct EpochRecord {
    double train_loss = 0.0;       ///< mean batch MSE, standardized units
    double validation_loss = 0.0;  ///< full validation MSE, standardized units, inference mode
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    bool stopped_early = false;

    [[nodiscard]] double best_validation() const { return epochs.at(static_cast<std::size_t>(best_epoch)).validation_loss; }
};

struct TrainResult {
    AnyModel model;  ///< parameter snapshot at best_epoch
    TrainHistory history;
};

/// Mean squared error over every window and output, inference mode.
double validation_mse(const AnyModel& model, const WindowSet& windows);

/// Gradient descent over shuffled training windows with checkpointing of the
/// best validation epoch and early stopping. Targets of both window sets are
/// expected in standardized units. Throws DivergenceError on non-finite losses.
TrainResult train(AnyModel initial, const WindowSet& train_set, const WindowSet& validation_set,
                  const TrainConfig& cfg);

/// Predictions inverse-transformed to degC and scored against `test.targets`,
/// which must already be in degC.
MetricsReport evaluate(const AnyModel& model, const WindowSet& test, const Standardizer& target_standardizer);

nlohmann::json to_json(const TrainHistory& h);

}  // namespace thermoguard

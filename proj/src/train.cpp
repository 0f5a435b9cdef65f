#include "thermoguard/train.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace thermoguard {

void TrainConfig::validate() const {
    sgd.validate();
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(min_delta >= 0)) throw ConfigError("min_delta must be >= 0");
}

double validation_mse(const AnyModel& model, const WindowSet& windows) {
    if (windows.size() == 0) throw ShapeError("empty validation set");
    const Matrix pred = predict_all(model, windows);
    return (pred - windows.targets).squaredNorm() / static_cast<double>(pred.size());
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL);
    x ^= x >> 31;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 29;
    return x;
}

// One optimizer step on `batch`; returns the batch MSE before the update.
struct StepVisitor {
    const WindowSet& data;
    const RowMatrix* linear_design;
    BatchIndices batch;
    double step;
    std::uint64_t dropout_seed;

    double operator()(LinearBank& bank) const {
        double loss = 0.0;
        for (std::size_t j = 0; j < bank.targets.size(); ++j) {
            const Vector y = data.targets.col(static_cast<Index>(j));
            auto& m = bank.targets[j];
            const double l = sgd_step(m, *linear_design, y, batch, step);
            loss += m.loss == LossKind::squared ? 2.0 * l : l;
        }
        return loss / static_cast<double>(bank.targets.size());
    }

    template <typename Net>
    double network_step(Net& model) const {
        typename std::conditional_t<std::is_same_v<Net, CnnModel>, CnnCache, RnnCache> cache;
        const Matrix pred = forward(model, data, batch, true, dropout_seed, &cache);
        Matrix target(pred.rows(), pred.cols());
        for (std::size_t b = 0; b < batch.size(); ++b) target.row(static_cast<Index>(b)) = data.targets.row(batch[b]);
        const Matrix diff = pred - target;
        // loss = mean over batch of |diff|^2 / 2
        const auto grads = backward(model, cache, diff / static_cast<double>(pred.rows()));
        apply_update(model, grads, step);
        return diff.squaredNorm() / static_cast<double>(diff.size());
    }

    double operator()(CnnModel& m) const { return network_step(m); }
    double operator()(RnnModel& m) const { return network_step(m); }
};

RowMatrix end_rows(const WindowSet& w) {
    RowMatrix out(w.size(), w.feature_count());
    for (Index k = 0; k < w.size(); ++k) out.row(k) = w.rows.row(w.end_row(k));
    return out;
}

}  // namespace

TrainResult train(AnyModel initial, const WindowSet& train_set, const WindowSet& validation_set,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0 || validation_set.size() == 0) {
        throw ShapeError("training and validation sets must be non-empty");
    }
    if (train_set.targets.rows() != train_set.size() || validation_set.targets.rows() != validation_set.size()) {
        throw ShapeError("window targets do not match window count");
    }

    const bool linear = std::holds_alternative<LinearBank>(initial);
    RowMatrix design;
    if (linear) {
        design = end_rows(train_set);
        auto& bank = std::get<LinearBank>(initial);
        if (static_cast<Index>(bank.targets.size()) != train_set.targets.cols()) {
            throw ShapeError("linear bank size does not match target count");
        }
        for (auto& m : bank.targets) {
            m.validate();
            if (m.beta.size() == 0) m.beta = Vector::Zero(design.cols());
            if (m.beta.size() != design.cols()) throw ShapeError("linear model width does not match features");
        }
    }

    TrainResult result{initial, {}};
    AnyModel model = std::move(initial);
    const Index n = train_set.size();
    const Index batch = std::min(cfg.sgd.effective_batch(n), n);

    double best = std::numeric_limits<double>::infinity();
    double patience_ref = std::numeric_limits<double>::infinity();
    int since_improvement = 0;

    for (int epoch = 0; epoch < cfg.sgd.max_epochs; ++epoch) {
        const double step = cfg.sgd.step_size(epoch);
        const auto order = epoch_order(n, cfg.sgd.mode, cfg.seed, epoch);
        double loss_sum = 0.0;
        Index batches = 0;
        for (Index start = 0; start < n; start += batch) {
            const Index len = std::min(batch, n - start);
            const StepVisitor visitor{train_set, linear ? &design : nullptr,
                                      BatchIndices(order.data() + start, static_cast<std::size_t>(len)), step,
                                      mix(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(batches))};
            loss_sum += std::visit(visitor, model);
            ++batches;
        }
        EpochRecord record{loss_sum / static_cast<double>(batches), validation_mse(model, validation_set)};
        if (!std::isfinite(record.train_loss) || !std::isfinite(record.validation_loss)) {
            std::ostringstream os;
            os << "training diverged at epoch " << epoch << " (learning_rate " << cfg.sgd.learning_rate << ")";
            throw DivergenceError(os.str(), epoch);
        }
        result.history.epochs.push_back(record);

        if (record.validation_loss < best) {
            best = record.validation_loss;
            result.history.best_epoch = epoch;
            result.model = model;
        }
        if (record.validation_loss < patience_ref - cfg.min_delta) {
            patience_ref = record.validation_loss;
            since_improvement = 0;
        } else if (++since_improvement >= cfg.patience) {
            result.history.stopped_early = epoch + 1 < cfg.sgd.max_epochs;
            break;
        }
    }
    return result;
}

MetricsReport evaluate(const AnyModel& model, const WindowSet& test, const Standardizer& target_standardizer) {
    if (test.targets.rows() != test.size()) throw ShapeError("test targets do not match window count");
    const Matrix pred = target_standardizer.inverse_transform(predict_all(model, test));
    return report(test.targets, pred);
}

nlohmann::json to_json(const TrainHistory& h) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : h.epochs) epochs.push_back({{"train_loss", e.train_loss}, {"validation_loss", e.validation_loss}});
    return {{"epochs", epochs}, {"best_epoch", h.best_epoch}, {"stopped_early", h.stopped_early}};
}

}  // namespace thermoguard

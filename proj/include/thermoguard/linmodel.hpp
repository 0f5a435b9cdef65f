#pragma once

#include "thermoguard/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace thermoguard {

enum class LossKind { squared, epsilon_insensitive, huber };

std::string_view to_string(LossKind k);
LossKind parse_loss(std::string_view text);

/// Single-target linear model y = beta0 + x . beta with an elastic-net penalty.
///
/// The penalty is alpha * (l1_ratio * |beta|_1 + (1 - l1_ratio) / 2 * |beta|^2),
/// i.e. lambda_1 = alpha * l1_ratio and lambda_2 = alpha * (1 - l1_ratio).
/// The intercept is never penalized. `epsilon` and `delta` are the margins of
/// the epsilon-insensitive and Huber losses in target units.
struct LinearModel {
    Vector beta;
    double beta0 = 0.0;
    LossKind loss = LossKind::squared;
    double epsilon = 0.1;
    double delta = 1.0;
    double alpha = 0.43;
    double l1_ratio = 0.99;

    void validate() const;
    [[nodiscard]] double penalty() const;
    [[nodiscard]] double penalty(const Vector& b) const;
};

enum class BatchMode { batch, stochastic, minibatch };

std::string_view to_string(BatchMode m);
BatchMode parse_batch_mode(std::string_view text);

/// Gradient-descent settings shared by every model kind.
/// Step size at epoch t is learning_rate / (1 + t)^power.
struct SgdConfig {
    double learning_rate = 0.01;
    double power = 0.0;
    BatchMode mode = BatchMode::minibatch;
    Index batch_size = 32;
    int max_epochs = 100;
    std::uint64_t shuffle_seed = 0;

    void validate() const;
    [[nodiscard]] double step_size(int epoch) const;
    /// Batch size actually used by `mode` for a training set of `n` rows.
    [[nodiscard]] Index effective_batch(Index n) const;
};

struct LossValue {
    double loss = 0.0;
    double gradient = 0.0;  ///< derivative with respect to the prediction
};

/// Loss of residual r = y - prediction and its (sub)gradient with respect to the prediction.
/// Squared loss is r^2 / 2; subgradients at kinks are 0.
LossValue loss_and_subgradient(LossKind kind, double residual, double epsilon, double delta);

Vector predict(const LinearModel& model, const Matrix& x);
double predict_row(const LinearModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Ordinary least squares on the intercept-augmented design.
/// Throws SingularMatrixError when the design is rank deficient.
LinearModel fit_closed_form(const Matrix& x, const Vector& y);

/// Mean loss over the rows plus the elastic-net penalty.
double objective(const LinearModel& model, const Matrix& x, const Vector& y);

/// Mean loss reported in natural units: squared loss is doubled back to the MSE.
double reported_loss(const LinearModel& model, const Matrix& x, const Vector& y);

/// One proximal gradient step on the rows `batch` of (x, y): gradient step on
/// the mean loss and the ridge term, then soft-thresholding for the L1 term.
/// Returns the mean batch loss before the update.
double sgd_step(LinearModel& model, const RowMatrix& x, const Vector& y, BatchIndices batch, double step);

struct SgdResult {
    LinearModel model;
    double initial_objective = 0.0;
    std::vector<double> objective_history;  ///< objective after each epoch
};

/// Fits `config` (whose beta is taken as the starting point when sized, else zeros).
SgdResult fit_sgd(const Matrix& x, const Vector& y, const LinearModel& config, const SgdConfig& sgd);

/// Deterministic per-epoch order of the rows 0..n-1 for the batch mode.
std::vector<Index> epoch_order(Index n, BatchMode mode, std::uint64_t seed, int epoch);

}  // namespace thermoguard

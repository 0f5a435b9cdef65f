#include "thermoguard/linmodel.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace thermoguard {

std::string_view to_string(LossKind k) {
    switch (k) {
        case LossKind::squared: return "squared";
        case LossKind::epsilon_insensitive: return "epsilon_insensitive";
        case LossKind::huber: return "huber";
    }
    return "squared";
}

LossKind parse_loss(std::string_view text) {
    if (text == "squared" || text == "squared_error") return LossKind::squared;
    if (text == "epsilon_insensitive") return LossKind::epsilon_insensitive;
    if (text == "huber") return LossKind::huber;
    throw ConfigError("unknown loss '" + std::string(text) + "'");
}

std::string_view to_string(BatchMode m) {
    switch (m) {
        case BatchMode::batch: return "batch";
        case BatchMode::stochastic: return "stochastic";
        case BatchMode::minibatch: return "minibatch";
    }
    return "minibatch";
}

BatchMode parse_batch_mode(std::string_view text) {
    if (text == "batch") return BatchMode::batch;
    if (text == "stochastic") return BatchMode::stochastic;
    if (text == "minibatch") return BatchMode::minibatch;
    throw ConfigError("unknown batch mode '" + std::string(text) + "'");
}

void LinearModel::validate() const {
    if (!(epsilon >= 0)) throw ConfigError("epsilon must be >= 0");
    if (!(delta > 0)) throw ConfigError("Huber delta must be > 0");
    if (!(alpha >= 0)) throw ConfigError("penalty coefficient must be >= 0");
    if (!(l1_ratio >= 0 && l1_ratio <= 1)) throw ConfigError("mixing parameter must lie in [0, 1]");
}

double LinearModel::penalty(const Vector& b) const {
    if (alpha == 0.0 || b.size() == 0) return 0.0;
    return alpha * (l1_ratio * b.lpNorm<1>() + 0.5 * (1.0 - l1_ratio) * b.squaredNorm());
}

double LinearModel::penalty() const { return penalty(beta); }

void SgdConfig::validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be > 0");
    if (!(power >= 0)) throw ConfigError("learning-rate power must be >= 0");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (mode == BatchMode::minibatch && batch_size < 1) throw ConfigError("mini-batch size must be >= 1");
}

double SgdConfig::step_size(int epoch) const {
    return power == 0.0 ? learning_rate : learning_rate / std::pow(1.0 + epoch, power);
}

Index SgdConfig::effective_batch(Index n) const {
    switch (mode) {
        case BatchMode::batch: return std::max<Index>(n, 1);
        case BatchMode::stochastic: return 1;
        case BatchMode::minibatch: return batch_size;
    }
    return batch_size;
}

LossValue loss_and_subgradient(LossKind kind, double r, double epsilon, double delta) {
    const double a = std::abs(r);
    const double sign = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
    switch (kind) {
        case LossKind::squared: return {0.5 * r * r, -r};
        case LossKind::epsilon_insensitive:
            if (epsilon < 0) throw ConfigError("epsilon must be >= 0");
            if (a <= epsilon) return {0.0, 0.0};
            return {a - epsilon, -sign};
        case LossKind::huber:
            if (!(delta > 0)) throw ConfigError("Huber delta must be > 0");
            if (a <= delta) return {0.5 * r * r, -r};
            return {delta * (a - 0.5 * delta), -delta * sign};
    }
    return {};
}

Vector predict(const LinearModel& model, const Matrix& x) {
    if (x.rows() == 0) return Vector(0);
    if (x.cols() != model.beta.size()) {
        throw ShapeError("linear model has " + std::to_string(model.beta.size()) + " weights, input has " +
                         std::to_string(x.cols()) + " columns");
    }
    return (x * model.beta).array() + model.beta0;
}

double predict_row(const LinearModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    if (row.size() != model.beta.size()) throw ShapeError("linear model input width mismatch");
    return model.beta0 + row.dot(model.beta);
}

LinearModel fit_closed_form(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) throw ShapeError("design and response differ in length");
    if (x.rows() < x.cols() + 1) throw SingularMatrixError("least squares needs more rows than columns");
    Matrix design(x.rows(), x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < design.cols()) {
        throw SingularMatrixError("normal matrix is singular (rank " + std::to_string(qr.rank()) + " of " +
                                  std::to_string(design.cols()) + "); use a regularized fit");
    }
    const Vector coef = qr.solve(y);
    LinearModel m;
    m.alpha = 0.0;
    m.l1_ratio = 0.0;
    m.beta0 = coef(0);
    m.beta = coef.tail(x.cols());
    return m;
}

double objective(const LinearModel& model, const Matrix& x, const Vector& y) {
    const Vector pred = predict(model, x);
    double acc = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        acc += loss_and_subgradient(model.loss, y(i) - pred(i), model.epsilon, model.delta).loss;
    }
    return acc / static_cast<double>(std::max<Index>(y.size(), 1)) + model.penalty();
}

double reported_loss(const LinearModel& model, const Matrix& x, const Vector& y) {
    const Vector pred = predict(model, x);
    double acc = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        acc += loss_and_subgradient(model.loss, y(i) - pred(i), model.epsilon, model.delta).loss;
    }
    acc /= static_cast<double>(std::max<Index>(y.size(), 1));
    return model.loss == LossKind::squared ? 2.0 * acc : acc;
}

double sgd_step(LinearModel& model, const RowMatrix& x, const Vector& y, BatchIndices batch, double step) {
    const Index p = model.beta.size();
    Vector grad = Vector::Zero(p);
    double grad0 = 0.0;
    double loss = 0.0;
    for (const Index row : batch) {
        const auto xr = x.row(row);
        const double r = y(row) - (model.beta0 + xr.dot(model.beta));
        const auto lv = loss_and_subgradient(model.loss, r, model.epsilon, model.delta);
        loss += lv.loss;
        if (lv.gradient != 0.0) {
            grad.noalias() += lv.gradient * xr.transpose();
            grad0 += lv.gradient;
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad *= inv;
    grad0 *= inv;

    const double l1 = model.alpha * model.l1_ratio;
    const double l2 = model.alpha * (1.0 - model.l1_ratio);
    model.beta0 -= step * grad0;
    model.beta -= step * (grad + l2 * model.beta);
    if (l1 > 0.0) {
        const double shrink = step * l1;
        model.beta = model.beta.unaryExpr([shrink](double b) {
            if (b > shrink) return b - shrink;
            if (b < -shrink) return b + shrink;
            return 0.0;
        });
    }
    return loss * inv;
}

std::vector<Index> epoch_order(Index n, BatchMode mode, std::uint64_t seed, int epoch) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    if (mode != BatchMode::batch) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1)));
        std::shuffle(order.begin(), order.end(), rng);
    }
    return order;
}

SgdResult fit_sgd(const Matrix& x, const Vector& y, const LinearModel& config, const SgdConfig& sgd) {
    config.validate();
    sgd.validate();
    if (x.rows() != y.size()) throw ShapeError("design and response differ in length");
    if (x.rows() == 0) throw ShapeError("cannot fit on zero rows");

    SgdResult result;
    result.model = config;
    if (result.model.beta.size() != x.cols()) result.model.beta = Vector::Zero(x.cols());
    const RowMatrix rows = x;
    result.initial_objective = objective(result.model, x, y);
    const double guard = 1e6 * std::max(result.initial_objective, 1e-12);

    const Index n = x.rows();
    const Index batch = std::min(sgd.effective_batch(n), n);
    for (int epoch = 0; epoch < sgd.max_epochs; ++epoch) {
        const double step = sgd.step_size(epoch);
        const auto order = epoch_order(n, sgd.mode, sgd.shuffle_seed, epoch);
        for (Index start = 0; start < n; start += batch) {
            const Index len = std::min(batch, n - start);
            sgd_step(result.model, rows, y, BatchIndices(order.data() + start, static_cast<std::size_t>(len)), step);
        }
        const double obj = objective(result.model, x, y);
        if (!std::isfinite(obj) || obj > guard) {
            std::ostringstream os;
            os << "SGD diverged at epoch " << epoch << " (objective " << obj << "); reduce learning_rate "
               << sgd.learning_rate;
            throw DivergenceError(os.str(), epoch);
        }
        result.objective_history.push_back(obj);
    }
    return result;
}

}  // namespace thermoguard

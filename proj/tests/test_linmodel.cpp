#include "thermoguard/errors.hpp"
#include "thermoguard/linmodel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace thermoguard;

namespace {

struct Problem {
    Matrix x;
    Vector y;
    Vector beta_true;
};

/// Well-conditioned design with independent standard normal columns.
Problem synthetic(Index n, Index p, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Problem pr;
    pr.x.resize(n, p);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < p; ++c) pr.x(r, c) = normal(rng);
    pr.beta_true.resize(p);
    for (Index c = 0; c < p; ++c) pr.beta_true(c) = normal(rng);
    pr.y = (pr.x * pr.beta_true).array() + 0.5;
    for (Index r = 0; r < n; ++r) pr.y(r) += noise * normal(rng);
    return pr;
}

/// Unpenalized model configured for `loss`.
LinearModel plain(LossKind loss, Index p) {
    LinearModel m;
    m.loss = loss;
    m.alpha = 0.0;
    m.beta = Vector::Zero(p);
    return m;
}

}  // namespace

TEST(LinModel, HandPredictions) {
    LinearModel m;
    m.beta = Vector::Zero(2);
    m.beta << 1.0, -2.0;
    m.beta0 = 0.5;
    Matrix x(2, 2);
    x << 1, 1, 3, 0;
    const Vector y = predict(m, x);
    EXPECT_DOUBLE_EQ(y(0), -0.5);
    EXPECT_DOUBLE_EQ(y(1), 3.5);
    EXPECT_THROW(predict(m, Matrix(1, 3)), ShapeError);
}

TEST(LinModel, ClosedFormRecoversExactLine) {
    Matrix x(4, 1);
    x << 0, 1, 2, 3;
    Vector y = 2.0 * x.col(0);
    const LinearModel m = fit_closed_form(x, y);
    EXPECT_NEAR(m.beta(0), 2.0, 1e-12);
    EXPECT_NEAR(m.beta0, 0.0, 1e-12);
}

TEST(LinModel, ClosedFormSingularCases) {
    Matrix dup(5, 2);
    dup << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
    EXPECT_THROW(fit_closed_form(dup, Vector::LinSpaced(5, 0, 1)), SingularMatrixError);
    Matrix constant_col = Matrix::Ones(5, 1);
    EXPECT_THROW(fit_closed_form(constant_col, Vector::LinSpaced(5, 0, 1)), SingularMatrixError);
    EXPECT_THROW(fit_closed_form(Matrix::Random(2, 3), Vector::Zero(2)), SingularMatrixError);
}

TEST(LinModel, ConstantTargetGivesInterceptOnly) {
    const Problem pr = synthetic(50, 3, 0.0, 1);
    const LinearModel m = fit_closed_form(pr.x, Vector::Constant(50, 4.0));
    EXPECT_NEAR(m.beta0, 4.0, 1e-12);
    EXPECT_LT(m.beta.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LinModel, LossExamples) {
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::squared, 2.0, 0.1, 1.0).loss, 2.0);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::squared, 2.0, 0.1, 1.0).gradient, -2.0);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::epsilon_insensitive, 0.05, 0.1, 1.0).loss, 0.0);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::epsilon_insensitive, -0.5, 0.1, 1.0).loss, 0.4);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::epsilon_insensitive, -0.5, 0.1, 1.0).gradient, 1.0);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::huber, 0.5, 0.1, 1.0).loss, 0.125);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::huber, 3.0, 0.1, 1.0).loss, 2.5);
    EXPECT_DOUBLE_EQ(loss_and_subgradient(LossKind::huber, 3.0, 0.1, 1.0).gradient, -1.0);
    // kinks take the zero subgradient
    EXPECT_EQ(loss_and_subgradient(LossKind::epsilon_insensitive, 0.1, 0.1, 1.0).gradient, 0.0);
    EXPECT_EQ(loss_and_subgradient(LossKind::squared, 0.0, 0.1, 1.0).gradient, 0.0);
    EXPECT_THROW(loss_and_subgradient(LossKind::huber, 1.0, 0.1, 0.0), ConfigError);
}

TEST(LinModel, LossDerivativeMatchesFiniteDifferences) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double eps = 0.3, delta = 0.8, h = 1e-6;
    for (auto kind : {LossKind::squared, LossKind::epsilon_insensitive, LossKind::huber}) {
        int checked = 0;
        while (checked < 20) {
            const double r = u(rng);
            if (std::abs(std::abs(r) - eps) < 1e-3 || std::abs(std::abs(r) - delta) < 1e-3) continue;
            // gradient is with respect to the prediction, i.e. minus d/dr
            const double fd = -(loss_and_subgradient(kind, r + h, eps, delta).loss -
                                loss_and_subgradient(kind, r - h, eps, delta).loss) / (2 * h);
            const double g = loss_and_subgradient(kind, r, eps, delta).gradient;
            EXPECT_NEAR(g, fd, 1e-6 * std::max(1.0, std::abs(fd))) << to_string(kind) << " r=" << r;
            ++checked;
        }
    }
}

TEST(LinModel, StepGradientMatchesFiniteDifferences) {
    const Problem pr = synthetic(40, 4, 0.3, 3);
    const RowMatrix xr = pr.x;
    std::vector<Index> all(40);
    std::iota(all.begin(), all.end(), Index{0});
    for (auto kind : {LossKind::squared, LossKind::epsilon_insensitive, LossKind::huber}) {
        LinearModel m = plain(kind, 4);
        m.epsilon = 0.2;
        m.delta = 0.7;
        m.alpha = 0.05;
        m.l1_ratio = 0.0;  // smooth ridge penalty only
        m.beta << 0.3, -0.2, 0.9, 0.1;
        m.beta0 = 0.2;
        const double step = 1e-3;
        LinearModel stepped = m;
        sgd_step(stepped, xr, pr.y, all, step);
        const Vector grad = (m.beta - stepped.beta) / step;
        const double h = 1e-6;
        for (Index c = 0; c < 4; ++c) {
            LinearModel a = m, b = m;
            a.beta(c) += h;
            b.beta(c) -= h;
            const double fd = (objective(a, pr.x, pr.y) - objective(b, pr.x, pr.y)) / (2 * h);
            EXPECT_NEAR(grad(c), fd, 1e-6 * std::max(1.0, std::abs(fd))) << to_string(kind);
        }
        LinearModel a = m, b = m;
        a.beta0 += h;
        b.beta0 -= h;
        const double fd0 = (objective(a, pr.x, pr.y) - objective(b, pr.x, pr.y)) / (2 * h);
        EXPECT_NEAR((m.beta0 - stepped.beta0) / step, fd0, 1e-6 * std::max(1.0, std::abs(fd0)));
    }
}

TEST(LinModel, ClosedFormResidualsAreOrthogonal) {
    const Problem pr = synthetic(200, 6, 0.5, 4);
    const LinearModel m = fit_closed_form(pr.x, pr.y);
    const Vector r = pr.y - predict(m, pr.x);
    EXPECT_LT(std::abs(r.sum()) / (r.norm() * std::sqrt(200.0)), 1e-8);
    for (Index c = 0; c < 6; ++c) {
        EXPECT_LT(std::abs(pr.x.col(c).dot(r)) / (pr.x.col(c).norm() * r.norm()), 1e-8);
    }
    // the normal equations are solved: no nudge of any coefficient lowers the loss
    for (Index c = 0; c < 6; ++c) {
        LinearModel n = plain(LossKind::squared, 6);
        n.beta = m.beta;
        n.beta0 = m.beta0;
        const double base = objective(n, pr.x, pr.y);
        n.beta(c) += 1e-3;
        EXPECT_GT(objective(n, pr.x, pr.y), base);
    }
}

TEST(LinModel, BatchGradientDescentReachesClosedForm) {
    const Problem pr = synthetic(200, 5, 0.5, 5);
    const LinearModel ols = fit_closed_form(pr.x, pr.y);
    SgdConfig sgd;
    sgd.mode = BatchMode::batch;
    sgd.learning_rate = 0.5;
    sgd.max_epochs = 2000;
    const SgdResult fit = fit_sgd(pr.x, pr.y, plain(LossKind::squared, 5), sgd);
    EXPECT_LT((fit.model.beta - ols.beta).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT(std::abs(fit.model.beta0 - ols.beta0), 1e-4);
    EXPECT_LE(fit.objective_history.back(), fit.initial_objective);
}

TEST(LinModel, ElasticNetDefaultsGiveSparseSolution) {
    Problem pr = synthetic(300, 8, 0.1, 6);
    pr.y = 3.0 * pr.x.col(0).array() + 0.05 * pr.x.col(1).array();
    LinearModel cfg;  // alpha 0.43, l1_ratio 0.99
    cfg.beta = Vector::Zero(8);
    SgdConfig sgd;
    sgd.mode = BatchMode::batch;
    sgd.learning_rate = 0.2;
    sgd.max_epochs = 500;
    const SgdResult fit = fit_sgd(pr.x, pr.y, cfg, sgd);
    EXPECT_GT(fit.model.beta(0), 2.0);
    for (Index c = 1; c < 8; ++c) EXPECT_EQ(fit.model.beta(c), 0.0) << c;
}

TEST(LinModel, LargePenaltyShrinksToZero) {
    const Problem pr = synthetic(100, 4, 0.1, 7);
    LinearModel cfg;
    cfg.alpha = 1e4;
    cfg.l1_ratio = 0.5;
    cfg.beta = Vector::Zero(4);
    SgdConfig sgd;
    sgd.mode = BatchMode::batch;
    sgd.learning_rate = 1e-5;
    sgd.max_epochs = 200;
    const SgdResult fit = fit_sgd(pr.x, pr.y, cfg, sgd);
    EXPECT_LT(fit.model.beta.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LinModel, SgdIsDeterministic) {
    const Problem pr = synthetic(100, 3, 0.2, 8);
    SgdConfig sgd;
    sgd.mode = BatchMode::minibatch;
    sgd.batch_size = 16;
    sgd.max_epochs = 20;
    sgd.shuffle_seed = 42;
    LinearModel cfg = plain(LossKind::huber, 3);
    const SgdResult a = fit_sgd(pr.x, pr.y, cfg, sgd);
    const SgdResult b = fit_sgd(pr.x, pr.y, cfg, sgd);
    EXPECT_EQ(a.model.beta, b.model.beta);
    EXPECT_EQ(a.model.beta0, b.model.beta0);
    EXPECT_EQ(a.objective_history, b.objective_history);
    sgd.shuffle_seed = 43;
    EXPECT_NE(fit_sgd(pr.x, pr.y, cfg, sgd).model.beta, a.model.beta);
}

TEST(LinModel, ScheduleAndBatchSizes) {
    SgdConfig sgd;
    sgd.learning_rate = 0.1;
    sgd.power = 0.5;
    EXPECT_DOUBLE_EQ(sgd.step_size(0), 0.1);
    EXPECT_DOUBLE_EQ(sgd.step_size(3), 0.05);
    sgd.mode = BatchMode::batch;
    EXPECT_EQ(sgd.effective_batch(100), 100);
    sgd.mode = BatchMode::stochastic;
    EXPECT_EQ(sgd.effective_batch(100), 1);
    sgd.mode = BatchMode::minibatch;
    sgd.batch_size = 32;
    EXPECT_EQ(sgd.effective_batch(10), 32);
    EXPECT_EQ(parse_loss("huber"), LossKind::huber);
    EXPECT_THROW(parse_loss("hinge"), ConfigError);
    EXPECT_EQ(parse_batch_mode(to_string(BatchMode::stochastic)), BatchMode::stochastic);
}

TEST(LinModel, DivergenceIsReported) {
    const Problem pr = synthetic(50, 3, 0.1, 9);
    SgdConfig sgd;
    sgd.mode = BatchMode::batch;
    sgd.learning_rate = 50.0;
    sgd.max_epochs = 200;
    EXPECT_THROW(fit_sgd(pr.x, pr.y, plain(LossKind::squared, 3), sgd), DivergenceError);
}

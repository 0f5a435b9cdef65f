#include "thermoguard/metrics.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <cmath>

namespace thermoguard {

namespace {

void check(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw ShapeError("metric inputs differ in length");
    if (y.empty()) throw ShapeError("metric of an empty series");
}

}  // namespace

double mse(std::span<const double> y, std::span<const double> yhat) {
    check(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        acc += e * e;
    }
    return acc / static_cast<double>(y.size());
}

double mae(std::span<const double> y, std::span<const double> yhat) {
    check(y, yhat);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += std::abs(y[i] - yhat[i]);
    return acc / static_cast<double>(y.size());
}

double linf(std::span<const double> y, std::span<const double> yhat) {
    check(y, yhat);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - yhat[i]));
    return worst;
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
    check(y, yhat);
    if (y.size() < 2) throw UndefinedMetricError("R^2 needs at least two samples");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        const double d = y[i] - mean;
        ss_res += e * e;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) throw UndefinedMetricError("R^2 is undefined for a constant measured series");
    return 1.0 - ss_res / ss_tot;
}

MetricsReport report(const Matrix& y, const Matrix& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) {
        throw ShapeError("report shapes differ: (" + std::to_string(y.rows()) + "," + std::to_string(y.cols()) +
                         ") vs (" + std::to_string(yhat.rows()) + "," + std::to_string(yhat.cols()) + ")");
    }
    if (y.cols() != kTargetCount) throw ShapeError("report expects 3 target columns");
    MetricsReport r;
    r.n_samples = y.rows();
    for (Index c = 0; c < kTargetCount; ++c) {
        const Vector a = y.col(c);
        const Vector b = yhat.col(c);
        const std::span<const double> sa(a.data(), static_cast<std::size_t>(a.size()));
        const std::span<const double> sb(b.data(), static_cast<std::size_t>(b.size()));
        auto& m = r.per_target[static_cast<std::size_t>(c)];
        m.mse = mse(sa, sb);
        m.mae = mae(sa, sb);
        m.linf = linf(sa, sb);
        m.r2 = r_squared(sa, sb);
        r.aggregate.mse += m.mse / 3.0;
        r.aggregate.mae += m.mae / 3.0;
        r.aggregate.r2 += m.r2 / 3.0;
        r.aggregate.linf = std::max(r.aggregate.linf, m.linf);
    }
    return r;
}

nlohmann::json to_json(const MetricsReport& r) {
    auto one = [](const TargetMetrics& m) {
        return nlohmann::json{{"mse", m.mse}, {"mae", m.mae}, {"linf", m.linf}, {"r2", m.r2}};
    };
    nlohmann::json j;
    for (std::size_t c = 0; c < 3; ++c) j["targets"][kTargetNames[c]] = one(r.per_target[c]);
    j["aggregate"] = one(r.aggregate);
    j["n_samples"] = r.n_samples;
    return j;
}

}  // namespace thermoguard

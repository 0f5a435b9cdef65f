#pragma once

#include "thermoguard/types.hpp"

#include "json.hpp"

#include <array>
#include <span>
#include <string>

namespace thermoguard {

double mse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);
double linf(std::span<const double> y, std::span<const double> yhat);
/// 1 - SS_res / SS_tot; throws UndefinedMetricError when y is constant.
double r_squared(std::span<const double> y, std::span<const double> yhat);

struct TargetMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double linf = 0.0;
    double r2 = 0.0;
};

inline constexpr std::array<const char*, 3> kTargetNames = {"T_W", "T_DE", "T_NDE"};

/// Per-target metrics with aggregates: mean of mse, mae and r2, max of linf.
struct MetricsReport {
    std::array<TargetMetrics, 3> per_target{};
    TargetMetrics aggregate{};
    Index n_samples = 0;
};

MetricsReport report(const Matrix& y, const Matrix& yhat);

nlohmann::json to_json(const MetricsReport& r);

}  // namespace thermoguard

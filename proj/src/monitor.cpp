#include "thermoguard/monitor.hpp"

#include "thermoguard/errors.hpp"
#include "thermoguard/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace thermoguard {

void AlertPolicy::validate() const {
    for (double t : threshold) {
        if (!(t > 0)) throw ConfigError("alert thresholds must be > 0");
    }
    if (persistence < 1) throw ConfigError("alert persistence must be >= 1");
    if (warmup_s < 0) throw ConfigError("warm-up must be >= 0");
}

AlertPolicy calibrate_from_residuals(const Matrix& residuals, const CalibrationOptions& options) {
    if (!(options.k > 0)) throw ConfigError("calibration multiplier k must be > 0");
    if (options.persistence < 1) throw ConfigError("alert persistence must be >= 1");
    if (options.floor < 0) throw ConfigError("threshold floor must be >= 0");
    if (options.warmup_s < 0) throw ConfigError("warm-up must be >= 0");
    if (residuals.rows() == 0) throw ConfigError("no healthy samples to calibrate on");
    if (residuals.cols() != kTargetCount) throw ShapeError("residual trace must have 3 columns");

    AlertPolicy p;
    p.persistence = options.persistence;
    p.signed_residual = options.signed_residual;
    p.k = options.k;
    p.floor = options.floor;
    p.warmup_s = options.warmup_s;
    p.calibration_samples = residuals.rows();
    const auto n = static_cast<double>(residuals.rows());
    for (Index c = 0; c < kTargetCount; ++c) {
        const Eigen::ArrayXd stat = options.signed_residual ? Eigen::ArrayXd(residuals.col(c).array())
                                                            : Eigen::ArrayXd(residuals.col(c).array().abs());
        const double mean = stat.sum() / n;
        const double sd = std::sqrt((stat - mean).square().sum() / n);
        const auto cu = static_cast<std::size_t>(c);
        p.residual_mean[cu] = mean;
        p.residual_std[cu] = sd;
        double threshold = mean + options.k * sd;
        if (threshold < options.floor) threshold = options.floor;
        if (!(threshold > 0)) {
            throw ConfigError(std::string("degenerate alert threshold for ") + kTargetNames[cu] +
                              "; set a positive threshold floor");
        }
        p.threshold[cu] = threshold;
    }
    return p;
}

AlertPolicy calibrate(const Estimator& estimator, const std::vector<Profile>& healthy, const CalibrationOptions& options) {
    if (healthy.empty()) throw ConfigError("no healthy profiles to calibrate on");
    std::vector<Matrix> parts;
    Index rows = 0;
    for (const auto& p : healthy) {
        const auto prediction = predict_profile(estimator, p);
        const auto first = std::lower_bound(prediction.t.begin(), prediction.t.end(), options.warmup_s);
        const auto skip = static_cast<Index>(first - prediction.t.begin());
        parts.push_back(prediction.residual().bottomRows(prediction.residual().rows() - skip));
        rows += parts.back().rows();
    }
    Matrix all(rows, kTargetCount);
    Index at = 0;
    for (const auto& m : parts) {
        all.middleRows(at, m.rows()) = m;
        at += m.rows();
    }
    return calibrate_from_residuals(all, options);
}

std::vector<AlertEvent> detect_alerts(const std::vector<std::int64_t>& t, const Matrix& residuals,
                                      const AlertPolicy& policy) {
    policy.validate();
    if (static_cast<Index>(t.size()) != residuals.rows() || residuals.cols() != kTargetCount) {
        throw ShapeError("residual trace and time axis do not line up");
    }
    std::vector<AlertEvent> events;
    for (Index c = 0; c < kTargetCount; ++c) {
        const auto cu = static_cast<std::size_t>(c);
        Index run = 0;
        AlertEvent current;
        auto close = [&] {
            if (run >= policy.persistence) events.push_back(current);
            run = 0;
        };
        for (Index s = 0; s < residuals.rows(); ++s) {
            const double r = residuals(s, c);
            const double stat = policy.signed_residual ? r : std::abs(r);
            const auto su = static_cast<std::size_t>(s);
            if (t[su] >= policy.warmup_s && stat > policy.threshold[cu]) {
                if (run == 0) {
                    current = AlertEvent{kTargetNames[cu], t[su], 0, 0.0, 0};
                }
                ++run;
                current.peak_residual = std::max(current.peak_residual, std::abs(r));
                current.duration = run;
                if (run == policy.persistence) current.raised_t = t[su];
            } else {
                close();
            }
        }
        close();
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const AlertEvent& a, const AlertEvent& b) { return a.raised_t < b.raised_t; });
    return events;
}

MonitorResult run_monitor(const Estimator& estimator, const AlertPolicy& policy, const Profile& profile) {
    MonitorResult out;
    out.trace = predict_profile(estimator, profile);
    out.events = detect_alerts(out.trace.t, out.trace.residual(), policy);
    return out;
}

nlohmann::json to_json(const AlertPolicy& p) {
    return {{"threshold", p.threshold},
            {"persistence", p.persistence},
            {"signed_residual", p.signed_residual},
            {"k", p.k},
            {"floor", p.floor},
            {"warmup_s", p.warmup_s},
            {"residual_mean", p.residual_mean},
            {"residual_std", p.residual_std},
            {"calibration_samples", p.calibration_samples},
            {"targets", kTargetNames}};
}

AlertPolicy policy_from_json(const nlohmann::json& j) {
    AlertPolicy p;
    try {
        p.threshold = j.at("threshold").get<std::array<double, 3>>();
        p.persistence = j.at("persistence").get<Index>();
        p.signed_residual = j.value("signed_residual", false);
        p.k = j.value("k", 4.0);
        p.floor = j.value("floor", 0.5);
        p.warmup_s = j.value("warmup_s", std::int64_t{0});
        if (j.contains("residual_mean")) p.residual_mean = j.at("residual_mean").get<std::array<double, 3>>();
        if (j.contains("residual_std")) p.residual_std = j.at("residual_std").get<std::array<double, 3>>();
        p.calibration_samples = j.value("calibration_samples", Index{0});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed alert policy: ") + e.what());
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const AlertEvent& e) {
    return {{"target", e.target},
            {"onset_t", e.onset_t},
            {"raised_t", e.raised_t},
            {"peak_residual", e.peak_residual},
            {"duration", e.duration}};
}

}  // namespace thermoguard

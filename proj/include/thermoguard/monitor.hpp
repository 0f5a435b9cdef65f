#pragma once

#include "thermoguard/experiment.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace thermoguard {

struct CalibrationOptions {
    double k = 4.0;               ///< std multiplier
    Index persistence = 60;       ///< consecutive seconds above threshold before an alert opens
    double floor = 0.5;           ///< lower bound on any threshold, degC; 0 disables it
    bool signed_residual = false; ///< alert on measured - predicted > threshold instead of |residual|
    std::int64_t warmup_s = 600;  ///< samples with t < warmup_s are neither calibrated on nor alerted on
};

/// Residual alert rule calibrated on healthy data:
/// threshold = mean(|r|) + k * std(|r|) per target, bounded below by the floor.
struct AlertPolicy {
    std::array<double, 3> threshold{};
    Index persistence = 60;
    bool signed_residual = false;
    double k = 4.0;
    double floor = 0.5;
    std::int64_t warmup_s = 0;
    std::array<double, 3> residual_mean{};  ///< of the calibration statistic
    std::array<double, 3> residual_std{};
    Index calibration_samples = 0;

    void validate() const;
};

struct AlertEvent {
    std::string target;
    std::int64_t onset_t = 0;   ///< first sample of the exceeding run
    std::int64_t raised_t = 0;  ///< sample at which the run reached the persistence
    double peak_residual = 0.0;
    std::int64_t duration = 0;  ///< samples in the run

    bool operator==(const AlertEvent&) const = default;
};

/// Calibrates from a residual matrix (samples x 3, degC). Throws ConfigError if
/// a threshold comes out non-positive and no floor is set.
AlertPolicy calibrate_from_residuals(const Matrix& residuals, const CalibrationOptions& options);

/// Calibrates on healthy profiles, ideally not used for training.
AlertPolicy calibrate(const Estimator& estimator, const std::vector<Profile>& healthy, const CalibrationOptions& options);

/// Causal scan of a 1 Hz residual trace: an event opens once the statistic stays
/// above threshold for `persistence` consecutive samples and closes when it drops back.
/// Samples before the policy's warm-up time never count as exceeding.
std::vector<AlertEvent> detect_alerts(const std::vector<std::int64_t>& t, const Matrix& residuals,
                                      const AlertPolicy& policy);

struct MonitorResult {
    std::vector<AlertEvent> events;
    ProfilePrediction trace;
};

MonitorResult run_monitor(const Estimator& estimator, const AlertPolicy& policy, const Profile& profile);

nlohmann::json to_json(const AlertPolicy& p);
AlertPolicy policy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlertEvent& e);

}  // namespace thermoguard

#pragma once
// Small shared builders for the unit tests.

#include "thermoguard/experiment.hpp"
#include "thermoguard/simulate.hpp"

#include <random>
#include <string>

namespace thermoguard::fixtures {

/// `n` short simulated profiles named s00, s01, ... cycling through the dynamics classes.
inline Dataset simulated_dataset(int n, std::int64_t duration_s, std::uint64_t seed) {
    const PlantParams plant = default_plant();
    const DynamicsClass classes[] = {DynamicsClass::slow, DynamicsClass::medium, DynamicsClass::fast};
    Dataset ds;
    for (int k = 0; k < n; ++k) {
        const DynamicsClass c = classes[k % 3];
        const auto drive = generate_profile(c, duration_s, plant.rating, seed + 2 * static_cast<std::uint64_t>(k));
        Profile p = simulate_thermal(drive, plant, std::nullopt, 0.1, seed + 2 * static_cast<std::uint64_t>(k) + 1);
        p.id = std::string("s") + (k < 10 ? "0" : "") + std::to_string(k);
        p.dynamics = c;
        ds.profiles.push_back(std::move(p));
    }
    return ds;
}

/// Small configurations of each kind that train in well under a second.
inline ExperimentConfig tiny_config(ModelKind kind) {
    nlohmann::json j{{"max_epochs", 3}, {"train_stride", 50}, {"seed", 7}, {"init_seed", 11}};
    switch (kind) {
        case ModelKind::linear:
            j["alpha"] = 1e-4;
            break;
        case ModelKind::cnn:
            j["n_filter"] = {4, 3};
            j["s_filter"] = {2, 2};
            j["dilation"] = {2, 1};
            j["cnn_dropout"] = {0.0, 0.0};
            j["seq_len"] = 8;
            break;
        case ModelKind::rnn:
            j["neurons"] = {3, 4};
            j["dropout"] = {0.0, 0.1};
            j["recurrent_dropout"] = {0.2, 0.1};
            j["seq_len"] = 6;
            break;
    }
    return config_from_json(j, kind);
}

/// Window set of random standardized-looking rows, for gradient and shape tests.
inline WindowSet random_windows(Index n_windows, Index seq_len, Index features, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WindowSet w;
    w.seq_len = seq_len;
    w.rows.resize(n_windows * seq_len, features);
    for (Index r = 0; r < w.rows.rows(); ++r)
        for (Index c = 0; c < features; ++c) w.rows(r, c) = normal(rng);
    w.targets.resize(n_windows, kTargetCount);
    for (Index k = 0; k < n_windows; ++k) {
        w.starts.push_back(k * seq_len);
        for (Index c = 0; c < kTargetCount; ++c) w.targets(k, c) = normal(rng);
    }
    return w;
}

}  // namespace thermoguard::fixtures

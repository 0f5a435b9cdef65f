#pragma once

#include "thermoguard/experiment.hpp"

#include "json.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace thermoguard {

/// Continuous domain sampled uniformly on a linear or logarithmic scale.
struct ParamRange {
    double low = 0.0;
    double high = 1.0;
    bool log_scale = false;
    bool integer = false;
};

struct SearchParam {
    std::string name;  ///< an ExperimentConfig key
    std::variant<std::vector<nlohmann::json>, ParamRange> domain;
};

enum class SearchStrategy { grid, random };

/// JSON form:
///   {"strategy": "random", "seed": 3, "budget": 8,
///    "params": {"learning_rate": {"low": 1e-3, "high": 1e-1, "scale": "log"},
///               "n_filter": [[125, 5, 125], [32, 8, 32]]}}
struct SearchSpace {
    std::vector<SearchParam> params;
    int budget = 40;
    SearchStrategy strategy = SearchStrategy::random;
    std::uint64_t seed = 0;

    void validate() const;
};

SearchSpace search_space_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SearchSpace& s);

/// Hyperparameter overrides of every trial, in trial-index order. Grid
/// enumerates the cartesian product (first parameter slowest) up to the budget.
std::vector<nlohmann::json> sample_trials(const SearchSpace& space);

struct Trial {
    int index = 0;
    nlohmann::json overrides;
    double validation_mse = 0.0;  ///< best validation MSE; +inf when the trial failed
    bool diverged = false;
    std::string error;
};

struct SearchResult {
    ExperimentConfig best;
    std::vector<Trial> leaderboard;  ///< ascending validation MSE, ties by trial index
};

/// Returns the validation MSE of one fully specified configuration.
using TrialObjective = std::function<double(const ExperimentConfig&)>;

SearchResult search(const SearchSpace& space, const ExperimentConfig& base, const TrialObjective& objective);

/// Trains every trial on `split` with fit_estimator.
SearchResult search(const SearchSpace& space, const Dataset& dataset, const Split& split, const ExperimentConfig& base);

nlohmann::json to_json(const SearchResult& r);

}  // namespace thermoguard

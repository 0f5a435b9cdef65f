#include "thermoguard/search.hpp"

#include "thermoguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace thermoguard {

void SearchSpace::validate() const {
    if (budget < 1) throw ConfigError("search budget must be >= 1");
    for (const auto& p : params) {
        if (const auto* list = std::get_if<std::vector<nlohmann::json>>(&p.domain)) {
            if (list->empty()) throw ConfigError("search parameter '" + p.name + "' has an empty list");
        } else {
            const auto& r = std::get<ParamRange>(p.domain);
            if (!(r.high > r.low)) throw ConfigError("search range for '" + p.name + "' is degenerate");
            if (r.log_scale && !(r.low > 0)) throw ConfigError("log-scale range for '" + p.name + "' must be positive");
            if (strategy == SearchStrategy::grid) {
                throw ConfigError("grid search needs finite lists; '" + p.name + "' is a range");
            }
        }
    }
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
    SearchSpace s;
    try {
        if (j.contains("budget")) s.budget = j.at("budget").get<int>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("strategy")) {
            const auto name = j.at("strategy").get<std::string>();
            if (name == "grid") {
                s.strategy = SearchStrategy::grid;
            } else if (name == "random") {
                s.strategy = SearchStrategy::random;
            } else {
                throw ConfigError("unknown search strategy '" + name + "'");
            }
        }
        for (const auto& [name, domain] : j.at("params").items()) {
            SearchParam p;
            p.name = name;
            if (domain.is_array()) {
                p.domain = domain.get<std::vector<nlohmann::json>>();
            } else {
                ParamRange r;
                r.low = domain.at("low").get<double>();
                r.high = domain.at("high").get<double>();
                r.log_scale = domain.value("scale", std::string("linear")) == "log";
                r.integer = domain.value("integer", false);
                p.domain = r;
            }
            s.params.push_back(std::move(p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed search space: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json to_json(const SearchSpace& s) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : s.params) {
        if (const auto* list = std::get_if<std::vector<nlohmann::json>>(&p.domain)) {
            params[p.name] = *list;
        } else {
            const auto& r = std::get<ParamRange>(p.domain);
            params[p.name] = {{"low", r.low}, {"high", r.high}, {"scale", r.log_scale ? "log" : "linear"},
                              {"integer", r.integer}};
        }
    }
    return {{"strategy", s.strategy == SearchStrategy::grid ? "grid" : "random"},
            {"seed", s.seed},
            {"budget", s.budget},
            {"params", params}};
}

std::vector<nlohmann::json> sample_trials(const SearchSpace& space) {
    space.validate();
    std::vector<nlohmann::json> trials;
    if (space.strategy == SearchStrategy::grid) {
        std::size_t combos = 1;
        for (const auto& p : space.params) combos *= std::get<std::vector<nlohmann::json>>(p.domain).size();
        const std::size_t count = std::min<std::size_t>(combos, static_cast<std::size_t>(space.budget));
        for (std::size_t k = 0; k < count; ++k) {
            nlohmann::json t = nlohmann::json::object();
            std::size_t rem = k;
            for (std::size_t q = space.params.size(); q-- > 0;) {
                const auto& list = std::get<std::vector<nlohmann::json>>(space.params[q].domain);
                t[space.params[q].name] = list[rem % list.size()];
                rem /= list.size();
            }
            trials.push_back(std::move(t));
        }
        return trials;
    }

    std::mt19937_64 rng(space.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < space.budget; ++k) {
        nlohmann::json t = nlohmann::json::object();
        for (const auto& p : space.params) {
            if (const auto* list = std::get_if<std::vector<nlohmann::json>>(&p.domain)) {
                const auto pick = static_cast<std::size_t>(unit(rng) * static_cast<double>(list->size()));
                t[p.name] = (*list)[std::min(pick, list->size() - 1)];
            } else {
                const auto& r = std::get<ParamRange>(p.domain);
                const double u = unit(rng);
                double v = r.log_scale ? std::exp(std::log(r.low) + u * (std::log(r.high) - std::log(r.low)))
                                       : r.low + u * (r.high - r.low);
                if (r.integer) {
                    t[p.name] = static_cast<std::int64_t>(std::llround(v));
                } else {
                    t[p.name] = v;
                }
            }
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

SearchResult search(const SearchSpace& space, const ExperimentConfig& base, const TrialObjective& objective) {
    const auto overrides = sample_trials(space);
    SearchResult result;
    std::vector<ExperimentConfig> configs;
    for (std::size_t k = 0; k < overrides.size(); ++k) {
        Trial trial;
        trial.index = static_cast<int>(k);
        trial.overrides = overrides[k];
        ExperimentConfig cfg = base;
        try {
            cfg = apply_overrides(base, overrides[k]);
            cfg.validate();
            trial.validation_mse = objective(cfg);
            if (!std::isfinite(trial.validation_mse)) throw DivergenceError("non-finite validation loss", -1);
        } catch (const DivergenceError& e) {
            trial.diverged = true;
            trial.error = e.what();
            trial.validation_mse = std::numeric_limits<double>::infinity();
        } catch (const ConfigError& e) {
            trial.diverged = true;
            trial.error = e.what();
            trial.validation_mse = std::numeric_limits<double>::infinity();
        }
        configs.push_back(cfg);
        result.leaderboard.push_back(std::move(trial));
    }
    std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(), [](const Trial& a, const Trial& b) {
        if (a.validation_mse != b.validation_mse) return a.validation_mse < b.validation_mse;
        return a.index < b.index;
    });
    if (result.leaderboard.empty() || result.leaderboard.front().diverged) {
        throw DivergenceError("every search trial failed", -1);
    }
    result.best = configs[static_cast<std::size_t>(result.leaderboard.front().index)];
    return result;
}

SearchResult search(const SearchSpace& space, const Dataset& dataset, const Split& split, const ExperimentConfig& base) {
    return search(space, base, [&](const ExperimentConfig& cfg) {
        return fit_estimator(dataset, split, cfg).history.best_validation();
    });
}

nlohmann::json to_json(const SearchResult& r) {
    nlohmann::json board = nlohmann::json::array();
    for (const auto& t : r.leaderboard) {
        nlohmann::json row = {{"trial", t.index}, {"overrides", t.overrides}, {"diverged", t.diverged}};
        row["validation_mse"] = t.diverged ? nlohmann::json(nullptr) : nlohmann::json(t.validation_mse);
        if (!t.error.empty()) row["error"] = t.error;
        board.push_back(std::move(row));
    }
    return {{"best_config", to_json(r.best)}, {"leaderboard", board}};
}

}  // namespace thermoguard

#include "cli.hpp"

#include "thermoguard/dataio.hpp"
#include "thermoguard/errors.hpp"
#include "thermoguard/experiment.hpp"
#include "thermoguard/metrics.hpp"
#include "thermoguard/model_io.hpp"
#include "thermoguard/monitor.hpp"
#include "thermoguard/search.hpp"
#include "thermoguard/simulate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef THERMOGUARD_VERSION
#define THERMOGUARD_VERSION "0.0.0"
#endif

namespace thermoguard::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bookkeeping shared by every command; written as manifest.json beside the outputs.
struct Run {
    std::string command;
    std::vector<std::string> args;
    fs::path out;
    json config = json::object();
    json seeds = json::object();
    json inputs = json::object();
    json outputs = json::array();
    json warnings = json::array();
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    fs::path output(const std::string& name) {
        outputs.push_back(name);
        return out / name;
    }
};

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw LoadError("cannot write " + path.string());
    f << text;
    if (!f) throw LoadError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw LoadError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_manifest(Run& run) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run.started).count();
    json m{{"command", run.command},
           {"args", run.args},
           {"config", run.config},
           {"seeds", run.seeds},
           {"inputs", run.inputs},
           {"outputs", run.outputs},
           {"warnings", run.warnings},
           {"tool_version", THERMOGUARD_VERSION},
           {"duration_s", seconds}};
    write_json(run.out / "manifest.json", m);
}

/// Independent seed streams derived from one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

FaultSpec parse_fault(const std::string& text) {
    const auto at = text.find('@');
    if (at == std::string::npos) throw UsageError("--fault expects FRACTION@ONSET_S, e.g. 0.7@10800");
    FaultSpec f;
    try {
        std::size_t used = 0;
        f.blockage_fraction = std::stod(text.substr(0, at), &used);
        if (used != at) throw std::invalid_argument("fraction");
        const std::string onset = text.substr(at + 1);
        f.onset_s = std::stoll(onset, &used);
        if (used != onset.size()) throw std::invalid_argument("onset");
    } catch (const std::logic_error&) {
        throw UsageError("--fault expects FRACTION@ONSET_S, e.g. 0.7@10800");
    }
    if (!(f.blockage_fraction >= 0.0 && f.blockage_fraction <= 1.0) || f.onset_s < 0) {
        throw UsageError("--fault fraction must lie in [0, 1] and onset must be >= 0");
    }
    return f;
}

ModelKind kind_flag(const std::string& text) {
    try {
        return parse_model_kind(text);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

/// Hyperparameters from an optional JSON file, with the kind flag taking precedence.
ExperimentConfig load_config(const std::string& file, const std::string& kind, std::optional<std::uint64_t> seed) {
    json j = file.empty() ? json::object() : read_json(file);
    if (!j.is_object()) throw ConfigError(file + ": configuration must be a JSON object");
    if (!kind.empty()) j["kind"] = std::string(to_string(kind_flag(kind)));
    if (seed) {
        j["seed"] = *seed;
        j["init_seed"] = derive_seed(*seed, 1);
    }
    const ModelKind k = j.contains("kind") ? kind_flag(j["kind"].get<std::string>()) : ModelKind::linear;
    return config_from_json(j, k);
}

const Profile& pick_profile(const Dataset& ds, const std::string& id) {
    if (!id.empty()) return ds.find(id);
    if (ds.profiles.size() != 1) throw UsageError("--profile is required when the data holds several profiles");
    return ds.profiles.front();
}

// ---------------------------------------------------------------- commands

struct SimulateOptions {
    int profiles = 18;
    double hours = 8.0;
    std::uint64_t seed = 0;
    std::string fault;
    double noise = 0.1;
    std::string plant;
};

int cmd_simulate(Run& run, const SimulateOptions& o, std::ostream& out) {
    if (o.profiles < 1) throw UsageError("--profiles must be >= 1");
    if (!(o.hours > 0) || o.hours * 3600.0 < 600.0) throw UsageError("--hours must give at least 600 s per profile");
    if (!(o.noise >= 0)) throw UsageError("--noise must be >= 0");
    std::optional<FaultSpec> fault;
    if (!o.fault.empty()) fault = parse_fault(o.fault);
    const PlantParams plant = o.plant.empty() ? default_plant() : plant_from_json(read_json(o.plant));
    const auto duration = static_cast<std::int64_t>(std::llround(o.hours * 3600.0));

    run.config = {{"profiles", o.profiles}, {"hours", o.hours}, {"noise_std_c", o.noise}, {"plant", to_json(plant)}};
    if (fault) run.config["fault"] = {{"blockage_fraction", fault->blockage_fraction}, {"onset_s", fault->onset_s}};
    run.seeds["seed"] = o.seed;
    if (!o.plant.empty()) run.inputs["plant"] = o.plant;

    const DynamicsClass classes[] = {DynamicsClass::slow, DynamicsClass::medium, DynamicsClass::fast};
    const int width = o.profiles < 100 ? 2 : static_cast<int>(std::to_string(o.profiles).size());
    json per_profile = json::array();
    for (int k = 0; k < o.profiles; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "p%0*d", width, k + 1);
        const DynamicsClass cls = classes[k % 3];
        const std::uint64_t drive_seed = derive_seed(o.seed, 2 * static_cast<std::uint64_t>(k));
        const std::uint64_t noise_seed = derive_seed(o.seed, 2 * static_cast<std::uint64_t>(k) + 1);
        Profile p = simulate_thermal(generate_profile(cls, duration, plant.rating, drive_seed), plant, fault, o.noise,
                                     noise_seed);
        p.id = id;
        p.dynamics = cls;
        save_profile(p, run.output(p.id + ".csv"));
        per_profile.push_back({{"id", p.id}, {"dynamics", to_string(cls)}, {"drive_seed", drive_seed},
                               {"noise_seed", noise_seed}});
    }
    run.seeds["profiles"] = per_profile;
    out << "wrote " << o.profiles << " profiles to " << run.out.string() << "\n";
    return kExitOk;
}

struct PreprocessOptions {
    std::string data;
    std::string config;
    std::string fit_on;
};

int cmd_preprocess(Run& run, const PreprocessOptions& o, std::ostream& out) {
    const Dataset ds = load_dataset(o.data);
    const ExperimentConfig cfg = load_config(o.config, "", std::nullopt);
    run.inputs["data"] = o.data;
    if (!o.config.empty()) run.inputs["config"] = o.config;

    std::vector<std::string> fit_ids;
    if (o.fit_on.empty()) {
        fit_ids = ds.ids();
    } else {
        std::stringstream ss(o.fit_on);
        for (std::string id; std::getline(ss, id, ',');) {
            if (!id.empty()) fit_ids.push_back(id);
        }
    }
    std::vector<Matrix> raw;
    Index rows = 0;
    for (const auto& id : fit_ids) {
        raw.push_back(expand_raw(ds.find(id), cfg.spans));
        rows += raw.back().rows();
    }
    Matrix stacked(rows, cfg.input_count());
    Index at = 0;
    for (const auto& m : raw) {
        stacked.middleRows(at, m.rows()) = m;
        at += m.rows();
    }
    const Standardizer st = fit_standardizer(stacked);
    run.config = {{"spans", cfg.spans.spans}, {"fit_on", fit_ids}};
    write_json(run.output("standardizer.json"), {{"columns", feature_names(cfg.spans)}, {"standardizer", to_json(st)}});

    for (const auto& p : ds.profiles) {
        const FeatureMatrix fm = expand(p, cfg.spans, &st);
        std::string text = "t";
        for (const auto& name : fm.column_names) text += "," + name;
        text += "\n";
        for (Index r = 0; r < fm.values.rows(); ++r) {
            text += std::to_string(p.frames[static_cast<std::size_t>(r)].t);
            for (Index c = 0; c < fm.values.cols(); ++c) text += "," + format_number(fm.values(r, c));
            text += "\n";
        }
        write_text(run.output(p.id + "_features.csv"), text);
    }
    out << "wrote features for " << ds.profiles.size() << " profiles to " << run.out.string() << "\n";
    return kExitOk;
}

struct TrainOptions {
    std::string kind;
    std::string data;
    std::string test_profile;
    std::string config;
    std::size_t n_validation = 2;
    std::optional<std::uint64_t> seed;
};

int cmd_train(Run& run, const TrainOptions& o, std::ostream& out) {
    const ExperimentConfig cfg = load_config(o.config, o.kind, o.seed);
    const Dataset ds = load_dataset(o.data);
    const Split split = make_split(ds, o.test_profile, o.n_validation);
    run.inputs = {{"data", o.data}};
    if (!o.config.empty()) run.inputs["config"] = o.config;
    run.config = {{"experiment", to_json(cfg)},
                  {"split", {{"train", split.train}, {"validation", split.validation}, {"test", split.test}}}};
    run.seeds = {{"seed", cfg.train.seed}, {"init_seed", cfg.init_seed}};

    const FitResult fit = fit_estimator(ds, split, cfg);
    save_model(fit.estimator, run.output("model.thgm"));
    write_json(run.output("history.json"), to_json(fit.history));
    out << "trained " << to_string(cfg.kind) << " for " << fit.history.epochs.size() << " epochs, best validation MSE "
        << fit.history.best_validation() << " at epoch " << fit.history.best_epoch << "\n";
    return kExitOk;
}

struct SearchOptions {
    std::string kind;
    std::string data;
    std::string space;
    std::string config;
    std::string test_profile;
    std::size_t n_validation = 2;
    std::optional<int> budget;
    std::optional<std::uint64_t> seed;
};

int cmd_search(Run& run, const SearchOptions& o, std::ostream& out) {
    SearchSpace space = search_space_from_json(read_json(o.space));
    if (o.budget) space.budget = *o.budget;
    if (o.seed) space.seed = *o.seed;
    space.validate();
    const ExperimentConfig base = load_config(o.config, o.kind, o.seed);
    const Dataset ds = load_dataset(o.data);
    const std::string test = o.test_profile.empty() ? ds.ids().front() : o.test_profile;
    const Split split = make_split(ds, test, o.n_validation);
    run.inputs = {{"data", o.data}, {"space", o.space}};
    if (!o.config.empty()) run.inputs["config"] = o.config;
    run.config = {{"space", to_json(space)},
                  {"base", to_json(base)},
                  {"split", {{"train", split.train}, {"validation", split.validation}, {"test", split.test}}}};
    run.seeds = {{"search_seed", space.seed}, {"seed", base.train.seed}, {"init_seed", base.init_seed}};

    const SearchResult result = search(space, ds, split, base);
    write_json(run.output("leaderboard.json"), to_json(result));
    write_json(run.output("best_config.json"), to_json(result.best));
    out << "best of " << result.leaderboard.size() << " trials: validation MSE "
        << result.leaderboard.front().validation_mse << " (trial " << result.leaderboard.front().index << ")\n";
    return kExitOk;
}

struct EvaluateOptions {
    std::string model;
    std::string data;
    std::string profile;
};

std::string prediction_csv(const ProfilePrediction& p, bool residual_only) {
    std::string text = "t";
    for (const char* name : kTargetNames) {
        const std::string n(name);
        text += residual_only ? "," + n + "_residual" : "," + n + "_measured," + n + "_predicted," + n + "_error";
    }
    text += "\n";
    for (Index r = 0; r < p.measured.rows(); ++r) {
        text += std::to_string(p.t[static_cast<std::size_t>(r)]);
        for (Index c = 0; c < kTargetCount; ++c) {
            const double m = p.measured(r, c), y = p.predicted(r, c);
            text += residual_only ? "," + format_number(m - y)
                                  : "," + format_number(m) + "," + format_number(y) + "," + format_number(m - y);
        }
        text += "\n";
    }
    return text;
}

void warn_if_trained_on(Run& run, const Estimator& est, const Profile& p) {
    if (std::find(est.trained_on.begin(), est.trained_on.end(), p.id) != est.trained_on.end()) {
        run.warnings.push_back("profile '" + p.id + "' was used for training or validation of this model");
    }
}

int cmd_evaluate(Run& run, const EvaluateOptions& o, std::ostream& out) {
    const Estimator est = load_model(o.model);
    const Dataset ds = load_dataset(o.data);
    const Profile& p = pick_profile(ds, o.profile);
    run.inputs = {{"model", o.model}, {"data", o.data}, {"profile", p.id}};
    run.config = {{"experiment", to_json(est.config)}};
    warn_if_trained_on(run, est, p);

    const ProfilePrediction pred = predict_profile(est, p);
    const MetricsReport rep = report(pred.measured, pred.predicted);
    json metrics = to_json(rep);
    metrics["profile"] = p.id;
    metrics["kind"] = to_string(est.kind());
    write_json(run.output("metrics.json"), metrics);
    write_text(run.output("predictions.csv"), prediction_csv(pred, false));
    out << "profile " << p.id << ": MSE " << rep.aggregate.mse << ", MAE " << rep.aggregate.mae << ", max error "
        << rep.aggregate.linf << " degC\n";
    return kExitOk;
}

struct MonitorOptions {
    std::string model;
    std::string data;
    std::string profile;
    std::string policy;
    std::string calibrate;
    CalibrationOptions calibration;
};

int cmd_monitor(Run& run, const MonitorOptions& o, std::ostream& out) {
    const Estimator est = load_model(o.model);
    const Dataset ds = load_dataset(o.data);
    const Profile& p = pick_profile(ds, o.profile);
    run.inputs = {{"model", o.model}, {"data", o.data}, {"profile", p.id}};
    warn_if_trained_on(run, est, p);

    AlertPolicy policy;
    if (!o.policy.empty()) {
        policy = policy_from_json(read_json(o.policy));
        run.inputs["policy"] = o.policy;
    } else if (!o.calibrate.empty()) {
        const Dataset healthy = load_dataset(o.calibrate);
        policy = calibrate(est, healthy.profiles, o.calibration);
        run.inputs["calibrate"] = o.calibrate;
    } else {
        throw ConfigError("missing calibration: pass --policy or --calibrate");
    }
    run.config = {{"policy", to_json(policy)}};
    write_json(run.output("policy.json"), to_json(policy));

    const MonitorResult result = run_monitor(est, policy, p);
    std::string lines;
    for (const auto& e : result.events) lines += to_json(e).dump() + "\n";
    write_text(run.output("alerts.jsonl"), lines);
    write_text(run.output("residuals.csv"), prediction_csv(result.trace, true));
    out << "profile " << p.id << ": " << result.events.size() << " alert(s)\n";
    return result.events.empty() ? kExitOk : kExitAlerts;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temperature estimation and fan-fault monitoring for induction machines", "thermoguard"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(THERMOGUARD_VERSION));
    std::string out_dir;

    std::function<int(Run&)> action;
    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--out", out_dir, "Output directory")->required();
        return sub;
    };

    SimulateOptions sim;
    auto* s = add("simulate", "Generate synthetic telemetry profiles");
    s->add_option("--profiles", sim.profiles, "Number of profiles, cycled over slow/medium/fast dynamics");
    s->add_option("--hours", sim.hours, "Duration of each profile in hours");
    s->add_option("--seed", sim.seed, "Random seed");
    s->add_option("--fault", sim.fault, "Fan blockage as FRACTION@ONSET_S, e.g. 0.7@10800");
    s->add_option("--noise", sim.noise, "Measurement noise standard deviation, degC");
    s->add_option("--plant", sim.plant, "Plant parameter JSON (defaults to the built-in 15 kW machine)");
    s->callback([&] { action = [&](Run& r) { return cmd_simulate(r, sim, out); }; });

    PreprocessOptions pre;
    auto* p = add("preprocess", "Write standardized EWMA feature matrices");
    p->add_option("--data", pre.data, "Profile CSV or directory")->required();
    p->add_option("--config", pre.config, "Hyperparameter JSON (spans are read from it)");
    p->add_option("--fit-on", pre.fit_on, "Comma-separated profile ids to fit the standardizer on (default: all)");
    p->callback([&] { action = [&](Run& r) { return cmd_preprocess(r, pre, out); }; });

    TrainOptions tr;
    auto* t = add("train", "Train one model on a leave-one-profile-out split");
    t->add_option("--kind", tr.kind, "linear, cnn or rnn");
    t->add_option("--data", tr.data, "Profile directory")->required();
    t->add_option("--test-profile", tr.test_profile, "Held-out profile id")->required();
    t->add_option("--config", tr.config, "Hyperparameter JSON");
    t->add_option("--n-validation", tr.n_validation, "Number of validation profiles");
    t->add_option("--seed", tr.seed, "Seed for initialization, shuffling and dropout");
    t->callback([&] { action = [&](Run& r) { return cmd_train(r, tr, out); }; });

    SearchOptions se;
    auto* h = add("search", "Hyperparameter search over a JSON space");
    h->add_option("--kind", se.kind, "linear, cnn or rnn");
    h->add_option("--data", se.data, "Profile directory")->required();
    h->add_option("--space", se.space, "Search space JSON")->required();
    h->add_option("--config", se.config, "Base hyperparameter JSON");
    h->add_option("--test-profile", se.test_profile, "Held-out profile id (default: first id)");
    h->add_option("--n-validation", se.n_validation, "Number of validation profiles");
    h->add_option("--budget", se.budget, "Number of trials");
    h->add_option("--seed", se.seed, "Search and training seed");
    h->callback([&] { action = [&](Run& r) { return cmd_search(r, se, out); }; });

    EvaluateOptions ev;
    auto* e = add("evaluate", "Score a model on one profile");
    e->add_option("--model", ev.model, "Model file")->required();
    e->add_option("--data", ev.data, "Profile CSV or directory")->required();
    e->add_option("--profile", ev.profile, "Profile id within --data");
    e->callback([&] { action = [&](Run& r) { return cmd_evaluate(r, ev, out); }; });

    MonitorOptions mo;
    auto* m = add("monitor", "Raise residual alerts on one profile");
    m->add_option("--model", mo.model, "Model file")->required();
    m->add_option("--data", mo.data, "Profile CSV or directory")->required();
    m->add_option("--profile", mo.profile, "Profile id within --data");
    m->add_option("--policy", mo.policy, "Alert policy JSON from an earlier run");
    m->add_option("--calibrate", mo.calibrate, "Healthy profile CSV or directory to calibrate on");
    m->add_option("--k", mo.calibration.k, "Threshold multiplier");
    m->add_option("--persistence", mo.calibration.persistence, "Seconds above threshold before an alert");
    m->add_option("--floor", mo.calibration.floor, "Lower bound on the threshold, degC");
    m->add_option("--warmup", mo.calibration.warmup_s, "Seconds at the start of a profile that never alert");
    m->add_flag("--signed", mo.calibration.signed_residual, "Alert only on measured above predicted");
    m->callback([&] { action = [&](Run& r) { return cmd_monitor(r, mo, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << THERMOGUARD_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& ex) {
        err << "usage error: " << ex.what() << "\n";
        return kExitUsage;
    }

    Run run;
    run.command = app.get_subcommands().front()->get_name();
    run.args = args;
    run.out = out_dir;
    try {
        fs::create_directories(run.out);
        const int code = action(run);
        write_manifest(run);
        return code;
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitError;
    }
}

}  // namespace thermoguard::cli

#include "thermoguard/experiment.hpp"

#include "thermoguard/errors.hpp"

#include <set>

namespace thermoguard {

CnnConfig ExperimentConfig::cnn_config() const {
    CnnConfig c;
    c.n_filter = n_filter;
    c.s_filter = s_filter;
    c.dilation = dilation;
    c.dropout = cnn_dropout;
    c.seq_len = seq_len;
    c.n_inputs = input_count();
    c.n_outputs = kTargetCount;
    return c;
}

RnnConfig ExperimentConfig::rnn_config() const {
    RnnConfig c;
    c.neurons = neurons;
    c.dropout = dropout;
    c.recurrent_dropout = recurrent_dropout;
    c.seq_len = seq_len;
    c.n_inputs = input_count();
    c.n_outputs = kTargetCount;
    return c;
}

LinearModel ExperimentConfig::linear_template() const {
    LinearModel m;
    m.beta = Vector::Zero(input_count());
    m.loss = loss;
    m.epsilon = epsilon;
    m.delta = delta;
    m.alpha = alpha;
    m.l1_ratio = l1_ratio;
    return m;
}

void ExperimentConfig::validate() const {
    spans.validate();
    train.validate();
    if (seq_len < 1) throw ConfigError("seq_len must be >= 1");
    if (train_stride < 1) throw ConfigError("train_stride must be >= 1");
    switch (kind) {
        case ModelKind::linear: linear_template().validate(); break;
        case ModelKind::cnn: cnn_config().validate(); break;
        case ModelKind::rnn: rnn_config().validate(); break;
    }
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "kind",       "spans",        "seq_len",   "alpha",     "l1_ratio",          "loss",
        "epsilon",    "delta",        "n_filter",  "s_filter",  "dilation",          "cnn_dropout",
        "neurons",    "dropout",      "recurrent_dropout",      "learning_rate",     "power_t",
        "batch_mode", "batch_size",   "max_epochs", "patience", "min_delta",         "seed",
        "train_stride", "init_seed"};
    return keys;
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig c, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known_keys().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
    }
    if (j.contains("kind")) c.kind = parse_model_kind(j.at("kind").get<std::string>());
    if (j.contains("spans")) c.spans.spans = j.at("spans").get<std::vector<int>>();
    read(j, "seq_len", c.seq_len);
    read(j, "alpha", c.alpha);
    read(j, "l1_ratio", c.l1_ratio);
    if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());
    read(j, "epsilon", c.epsilon);
    read(j, "delta", c.delta);
    read(j, "n_filter", c.n_filter);
    read(j, "s_filter", c.s_filter);
    read(j, "dilation", c.dilation);
    read(j, "cnn_dropout", c.cnn_dropout);
    read(j, "neurons", c.neurons);
    read(j, "dropout", c.dropout);
    read(j, "recurrent_dropout", c.recurrent_dropout);
    read(j, "learning_rate", c.train.sgd.learning_rate);
    read(j, "power_t", c.train.sgd.power);
    if (j.contains("batch_mode")) c.train.sgd.mode = parse_batch_mode(j.at("batch_mode").get<std::string>());
    read(j, "batch_size", c.train.sgd.batch_size);
    read(j, "max_epochs", c.train.sgd.max_epochs);
    read(j, "patience", c.train.patience);
    read(j, "min_delta", c.train.min_delta);
    read(j, "seed", c.train.seed);
    c.train.sgd.shuffle_seed = c.train.seed;
    read(j, "train_stride", c.train_stride);
    read(j, "init_seed", c.init_seed);
    return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ModelKind default_kind) {
    ExperimentConfig c;
    c.kind = default_kind;
    if (j.is_object() && j.contains("kind")) c.kind = parse_model_kind(j.at("kind").get<std::string>());
    if (c.kind == ModelKind::linear) {
        c.train.sgd.learning_rate = 0.01;
        c.train.sgd.max_epochs = 50;
    } else {
        c.train.sgd.learning_rate = 0.01;
        c.train.sgd.max_epochs = 30;
    }
    c = apply_overrides(std::move(c), j.is_null() ? nlohmann::json::object() : j);
    c.validate();
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"spans", c.spans.spans},
            {"seq_len", c.seq_len},
            {"alpha", c.alpha},
            {"l1_ratio", c.l1_ratio},
            {"loss", to_string(c.loss)},
            {"epsilon", c.epsilon},
            {"delta", c.delta},
            {"n_filter", c.n_filter},
            {"s_filter", c.s_filter},
            {"dilation", c.dilation},
            {"cnn_dropout", c.cnn_dropout},
            {"neurons", c.neurons},
            {"dropout", c.dropout},
            {"recurrent_dropout", c.recurrent_dropout},
            {"learning_rate", c.train.sgd.learning_rate},
            {"power_t", c.train.sgd.power},
            {"batch_mode", to_string(c.train.sgd.mode)},
            {"batch_size", c.train.sgd.batch_size},
            {"max_epochs", c.train.sgd.max_epochs},
            {"patience", c.train.patience},
            {"min_delta", c.train.min_delta},
            {"seed", c.train.seed},
            {"train_stride", c.train_stride},
            {"init_seed", c.init_seed}};
}

AnyModel init_model(const ExperimentConfig& config) {
    config.validate();
    switch (config.kind) {
        case ModelKind::linear: {
            LinearBank bank;
            bank.targets.assign(static_cast<std::size_t>(kTargetCount), config.linear_template());
            return bank;
        }
        case ModelKind::cnn: return init_cnn(config.cnn_config(), config.init_seed);
        case ModelKind::rnn: return init_rnn(config.rnn_config(), config.init_seed);
    }
    throw ConfigError("unknown model kind");
}

WindowSet build_windows(const std::vector<const Profile*>& profiles, const ExperimentConfig& config,
                        const Standardizer& inputs, const Standardizer& targets, Index stride, bool raw_targets) {
    WindowSet out;
    out.seq_len = config.window_length();
    out.rows.resize(0, config.input_count());
    out.targets.resize(0, kTargetCount);
    for (const Profile* p : profiles) {
        const Matrix features = inputs.transform(expand_raw(*p, config.spans));
        const Matrix y = raw_targets ? target_matrix(*p) : targets.transform(target_matrix(*p));
        append_windows(out, features, y, config.window_length(), stride);
    }
    return out;
}

FitResult fit_estimator(const Dataset& dataset, const Split& split, const ExperimentConfig& config) {
    config.validate();
    std::vector<const Profile*> train_profiles;
    std::vector<const Profile*> val_profiles;
    for (const auto& id : split.train) train_profiles.push_back(&dataset.find(id));
    for (const auto& id : split.validation) val_profiles.push_back(&dataset.find(id));
    if (train_profiles.empty() || val_profiles.empty()) throw ConfigError("split needs training and validation profiles");

    // standardizer statistics come from training rows only
    Index rows = 0;
    for (const auto* p : train_profiles) rows += static_cast<Index>(p->frames.size());
    Matrix raw(rows, config.input_count());
    Matrix y(rows, kTargetCount);
    Index at = 0;
    for (const auto* p : train_profiles) {
        const auto n = static_cast<Index>(p->frames.size());
        raw.middleRows(at, n) = expand_raw(*p, config.spans);
        y.middleRows(at, n) = target_matrix(*p);
        at += n;
    }

    Estimator est;
    est.config = config;
    est.input_standardizer = fit_standardizer(raw);
    est.target_standardizer = fit_standardizer(y);
    est.trained_on = split.train;
    est.trained_on.insert(est.trained_on.end(), split.validation.begin(), split.validation.end());

    const WindowSet train_set =
        build_windows(train_profiles, config, est.input_standardizer, est.target_standardizer, config.train_stride, false);
    const WindowSet val_set =
        build_windows(val_profiles, config, est.input_standardizer, est.target_standardizer, config.train_stride, false);

    auto result = train(init_model(config), train_set, val_set, config.train);
    est.model = std::move(result.model);
    return {std::move(est), std::move(result.history)};
}

ProfilePrediction predict_profile(const Estimator& estimator, const Profile& profile) {
    const Index len = estimator.window_length();
    if (static_cast<Index>(profile.frames.size()) < len) {
        throw ShapeError("profile '" + profile.id + "' has " + std::to_string(profile.frames.size()) +
                         " frames, model needs " + std::to_string(len));
    }
    const WindowSet windows = build_windows({&profile}, estimator.config, estimator.input_standardizer,
                                            estimator.target_standardizer, 1, true);
    ProfilePrediction out;
    out.measured = windows.targets;
    out.predicted = estimator.target_standardizer.inverse_transform(predict_all(estimator.model, windows));
    out.t.reserve(static_cast<std::size_t>(windows.size()));
    for (Index k = 0; k < windows.size(); ++k) out.t.push_back(profile.frames[static_cast<std::size_t>(windows.end_row(k))].t);
    return out;
}

MetricsReport evaluate_profile(const Estimator& estimator, const Profile& profile) {
    const auto pred = predict_profile(estimator, profile);
    return report(pred.measured, pred.predicted);
}

}  // namespace thermoguard

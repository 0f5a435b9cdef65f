// Acceptance suite: one PASS/FAIL line per criterion and a summary line.
// The exit code reports whether the suite ran to completion; verdicts are in the lines.

#include "cli.hpp"

#include "thermoguard/cnnmodel.hpp"
#include "thermoguard/errors.hpp"
#include "thermoguard/experiment.hpp"
#include "thermoguard/features.hpp"
#include "thermoguard/linmodel.hpp"
#include "thermoguard/metrics.hpp"
#include "thermoguard/model_io.hpp"
#include "thermoguard/monitor.hpp"
#include "thermoguard/rnnmodel.hpp"
#include "thermoguard/simulate.hpp"

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "lstm_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace thermoguard;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    Verdict() { detail << std::boolalpha; }

    /// Records a failed check without stopping the criterion.
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
    return m;
}

// ------------------------------------------------------------------ 1

void gradient_correctness(Verdict& v) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);

    // loss derivatives away from the kinks
    double worst_loss = 0.0;
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const double eps = 0.3, delta = 0.8, h = 1e-6;
    for (auto kind : {LossKind::squared, LossKind::epsilon_insensitive, LossKind::huber}) {
        for (int checked = 0; checked < 50;) {
            const double r = u(rng);
            if (std::abs(std::abs(r) - eps) < 1e-3 || std::abs(std::abs(r) - delta) < 1e-3) continue;
            const double fd = -(loss_and_subgradient(kind, r + h, eps, delta).loss -
                                loss_and_subgradient(kind, r - h, eps, delta).loss) / (2 * h);
            const double g = loss_and_subgradient(kind, r, eps, delta).gradient;
            worst_loss = std::max(worst_loss, std::abs(g - fd) / std::max(1.0, std::abs(fd)));
            ++checked;
        }
    }

    // full parameter gradient of the objective, recovered from one batch step
    double worst_linear = 0.0;
    const Matrix x = random_matrix(40, 4, rng);
    Vector y = x * Vector::LinSpaced(4, -1.0, 1.0) + 0.3 * random_matrix(40, 1, rng).col(0);
    const RowMatrix xr = x;
    std::vector<Index> all(40);
    std::iota(all.begin(), all.end(), Index{0});
    for (auto kind : {LossKind::squared, LossKind::epsilon_insensitive, LossKind::huber}) {
        LinearModel m;
        m.loss = kind;
        m.epsilon = 0.2;
        m.delta = 0.7;
        m.alpha = 0.05;
        m.l1_ratio = 0.0;
        m.beta = Vector::Zero(4);
        m.beta << 0.3, -0.2, 0.9, 0.1;
        m.beta0 = 0.2;
        const double step = 1e-3;
        LinearModel stepped = m;
        sgd_step(stepped, xr, y, all, step);
        std::vector<double> analytic;
        for (Index c = 0; c < 4; ++c) analytic.push_back((m.beta(c) - stepped.beta(c)) / step);
        analytic.push_back((m.beta0 - stepped.beta0) / step);
        std::vector<double*> ptrs;
        for (Index c = 0; c < 4; ++c) ptrs.push_back(&m.beta(c));
        ptrs.push_back(&m.beta0);
        const auto res = fixtures::gradient_check(ptrs, analytic, [&] { return objective(m, x, y); });
        worst_linear = std::max(worst_linear, res.worst_relative);
    }

    // CNN
    CnnConfig cc;
    cc.n_filter = {3, 2};
    cc.s_filter = {2, 3};
    cc.dilation = {2, 1};
    cc.dropout = {0.0, 0.0};
    cc.seq_len = 7;
    cc.n_inputs = 4;
    CnnModel cnn = init_cnn(cc, 5);
    for (auto& layer : cnn.params.layers) layer.bias.setConstant(0.05);
    const WindowSet cw = fixtures::random_windows(3, 7, 4, 6);
    const Matrix cweights = random_matrix(3, kTargetCount, rng);
    const auto cidx = all_indices(cw);
    CnnCache ccache;
    forward(cnn, cw, cidx, true, 0, &ccache);
    const auto cnn_res = fixtures::gradient_check(parameter_pointers(cnn.params), flatten(backward(cnn, ccache, cweights)),
                                                  [&] { return (forward(cnn, cw, cidx, false, 0).array() * cweights.array()).sum(); });

    // LSTM
    RnnConfig rc;
    rc.neurons = {3, 2};
    rc.dropout = {0.0, 0.0};
    rc.recurrent_dropout = {0.0, 0.0};
    rc.seq_len = 5;
    rc.n_inputs = 3;
    RnnModel rnn = init_rnn(rc, 6);
    const WindowSet rw = fixtures::random_windows(3, 5, 3, 7);
    const Matrix rweights = random_matrix(3, kTargetCount, rng);
    const auto ridx = all_indices(rw);
    RnnCache rcache;
    forward(rnn, rw, ridx, true, 0, &rcache);
    const auto rnn_res = fixtures::gradient_check(parameter_pointers(rnn.params), flatten(backward(rnn, rcache, rweights)),
                                                  [&] { return (forward(rnn, rw, ridx, false, 0).array() * rweights.array()).sum(); });

    const double seconds = elapsed_since(t0);
    v.detail << "loss " << worst_loss << ", linear " << worst_linear << ", cnn " << cnn_res.worst_relative << " over "
             << cnn_res.checked << " params, lstm " << rnn_res.worst_relative << " over " << rnn_res.checked
             << " params, " << seconds << " s";
    v.require(worst_loss < 1e-6 && worst_linear < 1e-6, "linear relative error < 1e-6");
    v.require(cnn_res.worst_relative < 1e-5, "cnn relative error < 1e-5");
    v.require(rnn_res.worst_relative < 1e-5, "lstm relative error < 1e-5");
    v.require(seconds < 60.0, "runtime < 60 s");
}

// ------------------------------------------------------------------ 2

void closed_form_oracle(Verdict& v) {
    std::mt19937_64 rng(5);
    const Matrix x = random_matrix(200, 5, rng);
    const Vector beta = random_matrix(5, 1, rng).col(0);
    const Vector y = (x * beta).array() + 0.5 + 0.5 * random_matrix(200, 1, rng).col(0).array();

    const LinearModel ols = fit_closed_form(x, y);
    LinearModel start;
    start.alpha = 0.0;
    start.loss = LossKind::squared;
    start.beta = Vector::Zero(5);
    SgdConfig sgd;
    sgd.mode = BatchMode::batch;
    sgd.learning_rate = 0.5;
    sgd.max_epochs = 2000;
    const SgdResult fit = fit_sgd(x, y, start, sgd);
    const double gap = std::max((fit.model.beta - ols.beta).cwiseAbs().maxCoeff(), std::abs(fit.model.beta0 - ols.beta0));

    const Vector r = y - predict(ols, x);
    double worst_dot = std::abs(r.sum()) / (r.norm() * std::sqrt(200.0));
    for (Index c = 0; c < 5; ++c) worst_dot = std::max(worst_dot, std::abs(x.col(c).dot(r)) / (x.col(c).norm() * r.norm()));

    v.detail << "max |beta_sgd - beta_ols| = " << gap << ", worst normalized residual correlation " << worst_dot;
    v.require(gap < 1e-4, "parameters within 1e-4");
    v.require(worst_dot < 1e-8, "orthogonality within 1e-8");
}

// ------------------------------------------------------------------ 3

void lstm_fidelity(Verdict& v) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> units(1, 4), steps(2, 8), inputs(1, 4), layers(1, 3);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    double worst = 0.0;
    const int instances = 150;
    for (int trial = 0; trial < instances; ++trial) {
        RnnConfig c;
        c.neurons.resize(static_cast<std::size_t>(layers(rng)));
        for (auto& n : c.neurons) n = units(rng);
        c.dropout.assign(c.neurons.size(), 0.0);
        c.recurrent_dropout.assign(c.neurons.size(), 0.0);
        c.seq_len = steps(rng);
        c.n_inputs = inputs(rng);
        RnnModel m = init_rnn(c, static_cast<std::uint64_t>(trial));
        for (double* p : parameter_pointers(m.params)) *p = weight(rng);
        const Matrix x = fixtures::random_windows(1, c.seq_len, c.n_inputs, 9000 + static_cast<std::uint64_t>(trial)).window(0);
        const Vector y = forward_window(m, x);
        const auto expected = fixtures::lstm_oracle(m.params, x);
        for (Index r = 0; r < y.size(); ++r) worst = std::max(worst, std::abs(y(r) - expected[static_cast<std::size_t>(r)]));
    }
    v.detail << instances << " random instances, worst abs difference " << worst;
    v.require(worst < 1e-10, "trace within 1e-10");
}

// ------------------------------------------------------------------ 4

void metric_fidelity(Verdict& v) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 3.0);
    std::uniform_int_distribution<int> len(2, 200);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> y(static_cast<std::size_t>(len(rng))), yhat(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] = 40.0 + n(rng);
            yhat[k] = y[k] + n(rng);
        }
        double se = 0.0, ae = 0.0, mx = 0.0, sum = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double e = y[k] - yhat[k];
            se += e * e;
            ae += std::abs(e);
            mx = std::max(mx, std::abs(e));
            sum += y[k];
        }
        const double count = static_cast<double>(y.size());
        const double mean = sum / count;
        double tot = 0.0;
        for (double yk : y) tot += (yk - mean) * (yk - mean);
        const double expected[] = {se / count, ae / count, mx, 1.0 - se / tot};
        const double actual[] = {mse(y, yhat), mae(y, yhat), linf(y, yhat), r_squared(y, yhat)};
        for (int k = 0; k < 4; ++k) {
            worst = std::max(worst, std::abs(actual[k] - expected[k]) / std::max(1.0, std::abs(expected[k])));
        }
    }
    bool undefined = false;
    try {
        r_squared(std::vector<double>{2.0, 2.0, 2.0}, std::vector<double>{1.0, 2.0, 3.0});
    } catch (const UndefinedMetricError&) {
        undefined = true;
    }
    v.detail << "1000 random vectors, worst relative difference " << worst
             << (undefined ? ", constant y raises UndefinedMetricError" : ", constant y did not raise");
    v.require(worst <= 1e-12, "metrics within 1e-12");
    v.require(undefined, "r_squared error on constant y");
}

// ------------------------------------------------------------------ 5

void feature_pipeline(Verdict& v) {
    const Dataset ds = fixtures::simulated_dataset(2, 3600, 21);
    const SpanSet spans = SpanSet::defaults();
    Matrix stacked(0, 0);
    for (const auto& p : ds.profiles) {
        const Matrix raw = expand_raw(p, spans);
        Matrix grown(stacked.rows() + raw.rows(), raw.cols());
        grown << stacked, raw;
        stacked = grown;
    }
    const Standardizer st = fit_standardizer(stacked);
    double worst_mean = 0.0, worst_sd = 0.0;
    Matrix standardized(stacked.rows(), stacked.cols());
    Index at = 0;
    for (const auto& p : ds.profiles) {
        const Matrix m = expand(p, spans, &st).values;
        standardized.middleRows(at, m.rows()) = m;
        at += m.rows();
    }
    for (Index c = 0; c < standardized.cols(); ++c) {
        const double mean = standardized.col(c).mean();
        const double sd = std::sqrt((standardized.col(c).array() - mean).square().mean());
        worst_mean = std::max(worst_mean, std::abs(mean));
        worst_sd = std::max(worst_sd, std::abs(sd - 1.0));
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 150.0);
    std::vector<double> series(400);
    for (auto& s : series) s = u(rng);
    bool fixed_point = true, identity = ewma(series, 1) == series, causal = true;
    for (int span : spans.spans) fixed_point = fixed_point && ewma(std::vector<double>(100, 3.25), span) == std::vector<double>(100, 3.25);
    for (int span : spans.spans) {
        auto shifted = series;
        for (std::size_t k = 200; k < shifted.size(); ++k) shifted[k] += 1000.0;
        const auto a = ewma(series, span), b = ewma(shifted, span);
        causal = causal && std::equal(a.begin(), a.begin() + 200, b.begin()) && a[200] != b[200];
    }

    ExperimentConfig cfg;
    cfg.kind = ModelKind::cnn;
    const Profile& p = ds.profiles[0];
    const WindowSet w = make_windows(expand(p, spans, &st).values, target_matrix(p), cfg.seq_len, 1);
    const Matrix first = w.window(0);

    v.detail << "|mean| <= " << worst_mean << ", |std - 1| <= " << worst_sd << ", ewma fixed point "
             << fixed_point << " identity " << identity << " causal " << causal << ", window " << first.rows() << " x "
             << first.cols() << " from " << kRawInputCount << " inputs and " << spans.size() << " spans";
    v.require(worst_mean < 1e-10 && worst_sd < 1e-10, "standardized moments");
    v.require(fixed_point && identity && causal, "ewma properties");
    v.require(first.rows() == 100 && first.cols() == 27 && spans.size() == 8, "window shape 100 x 27");
}

// ------------------------------------------------------------------ 6

void receptive_field_check(Verdict& v) {
    const CnnConfig cfg = ExperimentConfig{}.cnn_config();
    const Index rf = receptive_field(cfg);
    const CnnModel m = init_cnn(cfg, 3);
    const Matrix x = fixtures::random_windows(1, cfg.seq_len, cfg.n_inputs, 4).window(0);
    bool causal = true, bounded = true;
    const auto base = layer_activations(m, x);
    for (Index t0 : {Index{10}, Index{50}, Index{90}}) {
        Matrix y = x;
        y.row(t0).array() += 5.0;
        const auto after = layer_activations(m, y);
        for (std::size_t l = 0; l < base.size(); ++l) causal = causal && base[l].topRows(t0) == after[l].topRows(t0);
    }
    // the last output ignores every input older than the receptive field
    Matrix y = x;
    y.topRows(cfg.seq_len - rf).array() += 5.0;
    bounded = layer_activations(m, y).back().bottomRows(1) == base.back().bottomRows(1);
    Matrix z = x;
    z.row(cfg.seq_len - rf).array() += 5.0;
    const bool reaches = layer_activations(m, z).back().bottomRows(1) != base.back().bottomRows(1);

    v.detail << "receptive field " << rf << ", perturbation causal " << causal << ", bounded by field " << bounded
             << ", oldest in-field input matters " << reaches;
    v.require(rf == 6, "receptive field 6");
    v.require(causal && bounded, "causality perturbation");
}

// ------------------------------------------------------------------ 7 and 8

Profile simulated(DynamicsClass c, std::uint64_t drive_seed, std::uint64_t noise_seed, const std::optional<FaultSpec>& fault) {
    const PlantParams plant = default_plant();
    Profile p = simulate_thermal(generate_profile(c, 8 * 3600, plant.rating, drive_seed), plant, fault, 0.1, noise_seed);
    p.dynamics = c;
    return p;
}

constexpr DynamicsClass kClasses[] = {DynamicsClass::slow, DynamicsClass::medium, DynamicsClass::fast};

Dataset twelve_profiles() {
    Dataset ds;
    for (int i = 0; i < 12; ++i) {
        Profile p = simulated(kClasses[i % 3], 100 + static_cast<std::uint64_t>(i), 200 + static_cast<std::uint64_t>(i), std::nullopt);
        p.id = std::string("p") + (i < 10 ? "0" : "") + std::to_string(i);
        ds.profiles.push_back(std::move(p));
    }
    return ds;
}

/// Reduced budgets that keep all 36 fits within the runtime target on one core.
ExperimentConfig reduced_config(ModelKind kind) {
    nlohmann::json j{{"seed", 1}, {"init_seed", 2}};
    switch (kind) {
        case ModelKind::linear:
            j.update({{"alpha", 1e-4}, {"max_epochs", 30}});
            break;
        case ModelKind::cnn:
            j.update({{"n_filter", {32, 8, 32}}, {"seq_len", 32}, {"train_stride", 10}, {"max_epochs", 20}});
            break;
        case ModelKind::rnn:
            j.update({{"neurons", {16}}, {"dropout", {0.0}}, {"recurrent_dropout", {0.0}}, {"seq_len", 16},
                      {"train_stride", 30}, {"max_epochs", 30}, {"learning_rate", 0.1}});
            break;
    }
    return config_from_json(j, kind);
}

void end_to_end(Verdict& v, const Dataset& ds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto splits = make_lopo_splits(ds, 2);
    for (ModelKind kind : {ModelKind::linear, ModelKind::cnn, ModelKind::rnn}) {
        const ExperimentConfig cfg = reduced_config(kind);
        double worst_mae = 0.0, worst_share = 1.0;
        std::string worst_fold, failing;
        for (const Split& split : splits) {
            const FitResult fit = fit_estimator(ds, split, cfg);
            const ProfilePrediction pred = predict_profile(fit.estimator, ds.find(split.test));
            const Matrix err = pred.residual().cwiseAbs();
            for (Index c = 0; c < kTargetCount; ++c) {
                const double mae_c = err.col(c).mean();
                const double share = (err.col(c).array() < 4.0).cast<double>().mean();
                worst_mae = std::max(worst_mae, mae_c);
                if (mae_c >= 3.0 || share <= 0.95) {
                    failing += " " + split.test + "/" + kTargetNames[static_cast<std::size_t>(c)];
                }
                if (share < worst_share) {
                    worst_share = share;
                    worst_fold = split.test + "/" + kTargetNames[static_cast<std::size_t>(c)];
                }
            }
        }
        v.detail << to_string(kind) << ": worst MAE " << worst_mae << " degC, lowest share under 4 degC "
                 << 100.0 * worst_share << "% (" << worst_fold << ")";
        if (!failing.empty()) v.detail << ", failing:" << failing;
        v.detail << "; ";
        v.require(worst_mae < 3.0, std::string(to_string(kind)) + " MAE < 3 degC");
        v.require(worst_share > 0.95, std::string(to_string(kind)) + " > 95% of errors < 4 degC");
    }
    v.detail << splits.size() << " folds per model, " << elapsed_since(t0) << " s";
}

void fault_detection(Verdict& v, const Dataset& ds) {
    const FitResult fit = fit_estimator(ds, make_lopo_splits(ds, 2).front(), reduced_config(ModelKind::linear));
    std::vector<Profile> calibration;
    for (int h = 0; h < 6; ++h) {
        calibration.push_back(simulated(kClasses[h % 3], 500 + static_cast<std::uint64_t>(h), 550 + static_cast<std::uint64_t>(h), std::nullopt));
    }
    CalibrationOptions options;
    options.k = 4.0;
    options.persistence = 60;
    const AlertPolicy policy = calibrate(fit.estimator, calibration, options);

    std::size_t healthy_alerts = 0;
    for (int h = 0; h < 3; ++h) {
        const Profile p = simulated(kClasses[h], 900 + static_cast<std::uint64_t>(h), 950 + static_cast<std::uint64_t>(h), std::nullopt);
        healthy_alerts += run_monitor(fit.estimator, policy, p).events.size();
    }

    const FaultSpec fault{0.7, 3 * 3600};
    int runs_ok = 0;
    std::int64_t earliest = std::numeric_limits<std::int64_t>::max();
    for (int h = 0; h < 3; ++h) {
        const Profile p = simulated(kClasses[h], 700 + static_cast<std::uint64_t>(h), 750 + static_cast<std::uint64_t>(h), fault);
        const auto events = run_monitor(fit.estimator, policy, p).events;
        bool all_targets = true, after_onset = true;
        for (const char* target : kTargetNames) {
            all_targets = all_targets && std::any_of(events.begin(), events.end(), [&](const AlertEvent& e) { return e.target == target; });
        }
        for (const auto& e : events) {
            after_onset = after_onset && e.onset_t > fault.onset_s;
            earliest = std::min(earliest, e.onset_t);
        }
        if (all_targets && after_onset) ++runs_ok;
    }
    v.detail << "thresholds " << policy.threshold[0] << "/" << policy.threshold[1] << "/" << policy.threshold[2]
             << " degC; healthy 24 h: " << healthy_alerts << " alerts; faulted runs alerting on every target after 3 h: "
             << runs_ok << "/3, earliest onset " << earliest << " s";
    v.require(healthy_alerts == 0, "no alerts on healthy data");
    v.require(runs_ok == 3, "alerts on every target strictly after onset");
}

// ------------------------------------------------------------------ 9

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    if (code != cli::kExitOk && code != cli::kExitAlerts) std::cerr << err.str();
    return code;
}

void determinism(Verdict& v) {
    const fs::path root = fs::temp_directory_path() / ("thermoguard_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    auto at = [&](const std::string& name) { return (root / name).string(); };
    std::ofstream(root / "linear.json") << R"({"alpha": 1e-4, "max_epochs": 3})";
    std::ofstream(root / "cnn.json") << R"({"n_filter": [4, 3], "s_filter": [2, 2], "dilation": [2, 1], "cnn_dropout": [0.1, 0],
                                           "seq_len": 8, "max_epochs": 2, "train_stride": 40})";
    std::ofstream(root / "rnn.json") << R"({"neurons": [3, 4], "dropout": [0.1, 0.1], "recurrent_dropout": [0.2, 0.1],
                                           "seq_len": 6, "max_epochs": 2, "train_stride": 40})";
    std::ofstream(root / "space.json") << R"({"strategy": "random", "budget": 3,
                                             "params": {"alpha": {"low": 1e-5, "high": 1e-2, "scale": "log"}}})";
    std::ofstream(root / "policy.json") << R"({"threshold": [0.3, 0.3, 0.3], "persistence": 10})";

    int compared = 0, identical = 0;
    auto same = [&](const std::string& a, const std::string& b) {
        ++compared;
        const std::string x = slurp(root / a), y = slurp(root / b);
        if (!x.empty() && x == y) ++identical;
        else v.detail << " differs: " << a << ";";
    };
    for (const char* run : {"1", "2"}) {
        const std::string r(run);
        v.require(cli({"simulate", "--profiles", "4", "--hours", "0.5", "--seed", "9", "--out", at("data" + r)}) == 0, "simulate");
        v.require(cli({"simulate", "--profiles", "1", "--hours", "0.5", "--seed", "10", "--fault", "0.7@600", "--out",
                       at("fault" + r)}) == 0, "simulate fault");
        for (const char* kind : {"linear", "cnn", "rnn"}) {
            const std::string k(kind);
            v.require(cli({"train", "--kind", k, "--data", at("data" + r), "--test-profile", "p04", "--config", at(k + ".json"),
                           "--seed", "3", "--out", at(k + r)}) == 0, "train " + k);
        }
        v.require(cli({"search", "--kind", "linear", "--data", at("data" + r), "--space", at("space.json"), "--config",
                       at("linear.json"), "--seed", "4", "--out", at("search" + r)}) == 0, "search");
        v.require(cli({"monitor", "--model", at("linear" + r + "/model.thgm"), "--data", at("fault" + r), "--policy",
                       at("policy.json"), "--out", at("monitor" + r)}) == cli::kExitAlerts, "monitor alerts");
    }
    same("data1/p01.csv", "data2/p01.csv");
    same("fault1/p01.csv", "fault2/p01.csv");
    for (const char* kind : {"linear", "cnn", "rnn"}) {
        same(std::string(kind) + "1/model.thgm", std::string(kind) + "2/model.thgm");
        same(std::string(kind) + "1/history.json", std::string(kind) + "2/history.json");
    }
    same("search1/leaderboard.json", "search2/leaderboard.json");
    same("monitor1/alerts.jsonl", "monitor2/alerts.jsonl");
    fs::remove_all(root);
    v.detail << " " << identical << "/" << compared << " artifacts bit-identical across repeated runs";
    v.require(identical == compared, "bit-identical artifacts");
}

// ------------------------------------------------------------------ 10

void persistence(Verdict& v) {
    const Dataset ds = fixtures::simulated_dataset(4, 1200, 31);
    const Split split = make_split(ds, "s03", 1);
    for (ModelKind kind : {ModelKind::linear, ModelKind::cnn, ModelKind::rnn}) {
        const FitResult fit = fit_estimator(ds, split, fixtures::tiny_config(kind));
        const std::string bytes = serialize_model(fit.estimator);
        const Estimator back = deserialize_model(bytes);
        const Profile& p = ds.find("s03");
        const ProfilePrediction a = predict_profile(fit.estimator, p), b = predict_profile(back, p);
        const bool predictions = a.predicted.size() > 0 && a.predicted == b.predicted;
        const bool reserialized = serialize_model(back) == bytes;
        v.detail << to_string(kind) << ": " << bytes.size() << " bytes, predictions identical " << predictions
                 << ", re-serialization identical " << reserialized << "; ";
        v.require(predictions && reserialized, std::string(to_string(kind)) + " round trip");
    }
}

}  // namespace

int main() {
    std::cout << std::boolalpha;
    std::cout.precision(4);
    const auto t0 = std::chrono::steady_clock::now();
    int failed = 0;
    auto report_line = [&](int id, const std::string& name, const std::function<void(Verdict&)>& body) {
        Verdict v;
        try {
            body(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << " [exception: " << e.what() << "]";
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << v.detail.str()
                  << std::endl;
    };

    report_line(1, "gradient correctness", gradient_correctness);
    report_line(2, "closed-form oracle", closed_form_oracle);
    report_line(3, "LSTM fidelity", lstm_fidelity);
    report_line(4, "metric fidelity", metric_fidelity);
    report_line(5, "feature pipeline", feature_pipeline);
    report_line(6, "receptive field", receptive_field_check);
    const Dataset ds = twelve_profiles();
    report_line(7, "end-to-end synthetic analogue", [&](Verdict& v) { end_to_end(v, ds); });
    report_line(8, "fault detection", [&](Verdict& v) { fault_detection(v, ds); });
    report_line(9, "determinism", determinism);
    report_line(10, "persistence", persistence);

    std::cout << (10 - failed) << "/10 criteria passed in " << elapsed_since(t0) << " s" << std::endl;
    return 0;
}

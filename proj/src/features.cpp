#include "thermoguard/features.hpp"

#include "thermoguard/errors.hpp"

#include <cmath>
#include <numeric>

namespace thermoguard {

std::vector<Index> all_indices(const WindowSet& windows) {
    std::vector<Index> idx(static_cast<std::size_t>(windows.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    return idx;
}

std::vector<double> ewma(std::span<const double> series, int span) {
    if (span < 1) throw ConfigError("EWMA span must be >= 1");
    if (series.empty()) throw ConfigError("EWMA of an empty series");
    if (span == 1) return {series.begin(), series.end()};
    const double alpha = 2.0 / (static_cast<double>(span) + 1.0);
    std::vector<double> out(series.size());
    out[0] = series[0];
    // incremental form keeps a constant series exactly constant
    for (std::size_t t = 1; t < series.size(); ++t) out[t] = out[t - 1] + alpha * (series[t] - out[t - 1]);
    return out;
}

void SpanSet::validate() const {
    for (std::size_t k = 0; k < spans.size(); ++k) {
        if (spans[k] < 1) throw ConfigError("EWMA spans must be positive");
        if (k > 0 && spans[k] <= spans[k - 1]) throw ConfigError("EWMA spans must be strictly increasing");
    }
}

Matrix Standardizer::transform(const Matrix& x) const {
    if (x.cols() != mean.size()) {
        throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) + " columns, got " +
                         std::to_string(x.cols()));
    }
    return (x.rowwise() - mean.transpose()).array().rowwise() / stddev.transpose().array();
}

Matrix Standardizer::inverse_transform(const Matrix& x) const {
    if (x.cols() != mean.size()) {
        throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) + " columns, got " +
                         std::to_string(x.cols()));
    }
    return (x.array().rowwise() * stddev.transpose().array()).matrix().rowwise() + mean.transpose();
}

Standardizer fit_standardizer(const Matrix& x) {
    if (x.rows() < 2 || x.cols() == 0) throw ConfigError("standardizer needs at least 2 rows and 1 column");
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    s.mean = x.colwise().sum().transpose() / n;
    s.stddev.resize(x.cols());
    s.constant.assign(static_cast<std::size_t>(x.cols()), false);
    for (Index c = 0; c < x.cols(); ++c) {
        const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean(c))))) {
            s.stddev(c) = 1.0;
            s.constant[static_cast<std::size_t>(c)] = true;
        } else {
            s.stddev(c) = sd;
        }
    }
    return s;
}

Matrix expand_raw(std::span<const double> speed, std::span<const double> current, std::span<const double> reference,
                  const SpanSet& spans) {
    spans.validate();
    if (speed.size() != current.size() || speed.size() != reference.size()) {
        throw ShapeError("input series must have equal length");
    }
    const auto rows = static_cast<Index>(speed.size());
    const auto k = static_cast<Index>(spans.size());
    Matrix out(rows, kRawInputCount * (1 + k));
    const std::span<const double> inputs[] = {speed, current, reference};
    for (Index i = 0; i < kRawInputCount; ++i) {
        const auto& series = inputs[i];
        out.col(i) = Eigen::Map<const Vector>(series.data(), rows);
        if (rows == 0) continue;
        for (Index s = 0; s < k; ++s) {
            const auto smooth = ewma(series, spans.spans[static_cast<std::size_t>(s)]);
            out.col(kRawInputCount + i * k + s) = Eigen::Map<const Vector>(smooth.data(), rows);
        }
    }
    return out;
}

Matrix expand_raw(const Profile& profile, const SpanSet& spans) {
    const auto speed = profile.column(&TelemetryFrame::n_m);
    const auto current = profile.column(&TelemetryFrame::I_m);
    const auto reference = profile.column(&TelemetryFrame::T_ref);
    return expand_raw(speed, current, reference, spans);
}

std::vector<std::string> feature_names(const SpanSet& spans) {
    const char* base[] = {"n_m", "I_m", "T_ref"};
    std::vector<std::string> names(base, base + 3);
    for (const char* b : base) {
        for (int s : spans.spans) names.push_back(std::string("ewma_") + b + "_" + std::to_string(s));
    }
    return names;
}

FeatureMatrix expand(const Profile& profile, const SpanSet& spans, const Standardizer* standardizer,
                     Standardizer* fitted) {
    const Matrix raw = expand_raw(profile, spans);
    FeatureMatrix fm;
    fm.column_names = feature_names(spans);
    if (standardizer) {
        fm.values = standardizer->transform(raw);
    } else {
        Standardizer s = fit_standardizer(raw);
        fm.values = s.transform(raw);
        if (fitted) *fitted = std::move(s);
    }
    return fm;
}

Matrix target_matrix(const Profile& profile) {
    Matrix y(static_cast<Index>(profile.frames.size()), kTargetCount);
    for (std::size_t r = 0; r < profile.frames.size(); ++r) {
        const auto& f = profile.frames[r];
        y.row(static_cast<Index>(r)) << f.T_W, f.T_DE, f.T_NDE;
    }
    return y;
}

Index window_count(Index rows, Index seq_len, Index stride) {
    if (seq_len < 1 || stride < 1) throw ConfigError("sequence length and stride must be >= 1");
    if (seq_len > rows) {
        throw ShapeError("sequence length " + std::to_string(seq_len) + " exceeds " + std::to_string(rows) + " rows");
    }
    return (rows - seq_len) / stride + 1;
}

void append_windows(WindowSet& out, const Matrix& features, const Matrix& targets, Index seq_len, Index stride) {
    if (features.rows() != targets.rows()) throw ShapeError("features and targets must have the same row count");
    const Index count = window_count(features.rows(), seq_len, stride);
    if (out.size() == 0 && out.rows.rows() == 0) {
        out.seq_len = seq_len;
        out.rows.resize(0, features.cols());
        out.targets.resize(0, targets.cols());
    }
    if (out.seq_len != seq_len) throw ShapeError("window sequence length mismatch");
    if (out.rows.cols() != features.cols() || out.targets.cols() != targets.cols()) {
        throw ShapeError("feature or target width mismatch");
    }

    const Index base = out.rows.rows();
    out.rows.conservativeResize(base + features.rows(), Eigen::NoChange);
    out.rows.bottomRows(features.rows()) = features;

    const Index first = out.targets.rows();
    out.targets.conservativeResize(first + count, Eigen::NoChange);
    for (Index k = 0; k < count; ++k) {
        const Index start = k * stride;
        out.starts.push_back(base + start);
        out.targets.row(first + k) = targets.row(start + seq_len - 1);
    }
}

WindowSet make_windows(const Matrix& features, const Matrix& targets, Index seq_len, Index stride) {
    WindowSet out;
    append_windows(out, features, targets, seq_len, stride);
    return out;
}

nlohmann::json to_json(const Standardizer& s) {
    std::vector<double> mean(s.mean.data(), s.mean.data() + s.mean.size());
    std::vector<double> sd(s.stddev.data(), s.stddev.data() + s.stddev.size());
    return {{"mean", mean}, {"std", sd}, {"constant", s.constant}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto sd = j.at("std").get<std::vector<double>>();
    if (mean.size() != sd.size()) throw ShapeError("standardizer mean/std length mismatch");
    Standardizer s;
    s.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Index>(mean.size()));
    s.stddev = Eigen::Map<const Vector>(sd.data(), static_cast<Index>(sd.size()));
    s.constant = j.contains("constant") ? j.at("constant").get<std::vector<bool>>()
                                        : std::vector<bool>(mean.size(), false);
    for (double v : sd) {
        if (!(v > 0)) throw ConfigError("standardizer std must be positive");
    }
    return s;
}

}  // namespace thermoguard

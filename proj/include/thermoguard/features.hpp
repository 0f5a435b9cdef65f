#pragma once

#include "thermoguard/dataio.hpp"
#include "thermoguard/types.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermoguard {

/// Exponentially weighted moving average with alpha = 2 / (span + 1), seeded with x_0.
std::vector<double> ewma(std::span<const double> series, int span);

/// EWMA spans in seconds, strictly increasing.
struct SpanSet {
    std::vector<int> spans;

    /// Geometric ladder from seconds to the order of the machine's thermal time constants.
    static SpanSet defaults() { return {{10, 30, 60, 120, 300, 600, 1300, 2600}}; }

    void validate() const;
    [[nodiscard]] std::size_t size() const { return spans.size(); }
    bool operator==(const SpanSet&) const = default;
};

/// Per-column z-scoring with population statistics of the fitting rows.
///
/// A constant column keeps its mean but gets std = 1 and is flagged, so the
/// feature is passed through centered instead of dividing by zero.
struct Standardizer {
    Vector mean;
    Vector stddev;
    std::vector<bool> constant;

    [[nodiscard]] Index size() const { return mean.size(); }

    [[nodiscard]] Matrix transform(const Matrix& x) const;
    [[nodiscard]] Matrix inverse_transform(const Matrix& x) const;

    bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const Matrix& x);

/// Model-ready inputs: raw inputs followed by their EWMA expansions, standardized.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> column_names;
};

/// Raw (unstandardized) expansion, columns
/// [n_m, I_m, T_ref, ewma(n_m, s_1..s_k), ewma(I_m, ...), ewma(T_ref, ...)].
Matrix expand_raw(std::span<const double> speed, std::span<const double> current,
                  std::span<const double> reference, const SpanSet& spans);
Matrix expand_raw(const Profile& profile, const SpanSet& spans);

std::vector<std::string> feature_names(const SpanSet& spans);

/// Expands and standardizes with `standardizer`; when none is given one is
/// fitted on this matrix and written to `fitted`.
FeatureMatrix expand(const Profile& profile, const SpanSet& spans, const Standardizer* standardizer,
                     Standardizer* fitted = nullptr);

/// Measured targets (T_W, T_DE, T_NDE) of a profile, one row per frame.
Matrix target_matrix(const Profile& profile);

/// Appends the windows of one profile to `out`: window k covers rows
/// [k*stride, k*stride + seq_len) and is paired with the target row at its last index.
void append_windows(WindowSet& out, const Matrix& features, const Matrix& targets, Index seq_len, Index stride);

WindowSet make_windows(const Matrix& features, const Matrix& targets, Index seq_len, Index stride);

/// Number of windows make_windows emits for `rows` rows.
Index window_count(Index rows, Index seq_len, Index stride);

nlohmann::json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace thermoguard

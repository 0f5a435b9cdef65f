#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace thermoguard {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Number of estimated temperatures (winding, DE bearing, NDE bearing).
inline constexpr Index kTargetCount = 3;
/// Number of raw model inputs (speed, current, reference temperature).
inline constexpr Index kRawInputCount = 3;

/// Fixed-length causal windows over a row-major feature matrix.
///
/// Rows of several profiles may be stacked in `rows`; window starts are
/// generated per profile so a window never spans two profiles. The target
/// of window k is the target row at the window's last index.
struct WindowSet {
    RowMatrix rows;
    std::vector<Index> starts;
    Index seq_len = 1;
    Matrix targets;  // windows x targets

    [[nodiscard]] Index size() const { return static_cast<Index>(starts.size()); }
    [[nodiscard]] Index feature_count() const { return rows.cols(); }

    [[nodiscard]] auto window(Index k) const { return rows.middleRows(starts[static_cast<std::size_t>(k)], seq_len); }
    [[nodiscard]] Index end_row(Index k) const { return starts[static_cast<std::size_t>(k)] + seq_len - 1; }
};

/// Window indices forming one mini-batch.
using BatchIndices = std::span<const Index>;

/// Every window index of `windows`, in order.
std::vector<Index> all_indices(const WindowSet& windows);

}  // namespace thermoguard

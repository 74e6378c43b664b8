#pragma once

#include <vector>

#include "comets/matrix.hpp"
#include "comets/ts/series.hpp"

namespace comets::ts {

/// One conditioning/target pair: past = rows [t-P, t), future = rows [t, t+F).
struct SegmentPair {
    Matrix past;
    Matrix future;
    std::size_t t_origin = 0;
    /// Minutes since the open for the P past rows followed by the F future rows.
    std::vector<int> minute_of_day;
};

/// Pairs for every split index t in [P, T-F]; T - F - P + 1 of them.
std::vector<SegmentPair> segment(const MultivariateSeries& series, std::size_t past, std::size_t future);

/// Number of pairs segment() produces, without building them.
std::size_t segment_count(std::size_t length, std::size_t past, std::size_t future);

/// Non-overlapping windows of `window` rows with the given stride.
std::vector<Matrix> windows(const Matrix& values, std::size_t window, std::size_t stride);

}  // namespace comets::ts

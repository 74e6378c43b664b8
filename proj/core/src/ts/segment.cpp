#include "comets/ts/segment.hpp"

#include "comets/error.hpp"

namespace comets::ts {

std::size_t segment_count(std::size_t length, std::size_t past, std::size_t future) {
    if (past < 1 || future < 2) throw SpecificationError("segment: need P >= 1 and F >= 2");
    if (length < past + future) {
        throw SpecificationError("segment: series length " + std::to_string(length) +
                                 " < P + F = " + std::to_string(past + future));
    }
    return length - future - past + 1;
}

std::vector<SegmentPair> segment(const MultivariateSeries& series, std::size_t past, std::size_t future) {
    const std::size_t count = segment_count(series.length(), past, future);
    const auto minutes = series.minute_of_day();
    std::vector<SegmentPair> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t t = past + k;
        SegmentPair pair;
        pair.t_origin = t;
        pair.past = series.values.slice_rows(t - past, t);
        // The future continues directly after the past window.
        pair.future = series.values.slice_rows(t, t + future);
        pair.minute_of_day.assign(minutes.begin() + static_cast<std::ptrdiff_t>(t - past),
                                  minutes.begin() + static_cast<std::ptrdiff_t>(t + future));
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<Matrix> windows(const Matrix& values, std::size_t window, std::size_t stride) {
    if (window < 1 || stride < 1) throw SpecificationError("windows: window and stride must be >= 1");
    std::vector<Matrix> out;
    for (std::size_t start = 0; start + window <= values.rows(); start += stride) {
        out.push_back(values.slice_rows(start, start + window));
    }
    return out;
}

}  // namespace comets::ts

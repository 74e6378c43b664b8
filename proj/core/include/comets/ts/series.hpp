#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comets/matrix.hpp"

namespace comets::ts {

enum class ChannelKind { Price, Volume, Raw };

struct ChannelMeta {
    std::string ticker;
    ChannelKind kind = ChannelKind::Raw;
    bool operator==(const ChannelMeta&) const = default;
};

/// Minutes since 1970-01-01T00:00 (exchange-local wall clock, no time zone).
using MinuteStamp = std::int64_t;

inline constexpr int kSessionMinutes = 390;        // 09:30 - 16:00
inline constexpr int kSessionOpenMinute = 9 * 60 + 30;
inline constexpr int kMinutesPerBin = 10;
inline constexpr int kTimeBins = kSessionMinutes / kMinutesPerBin;  // bins 0..38

/// T x C matrix of values with per-channel metadata and optional timestamps.
struct MultivariateSeries {
    Matrix values;
    std::vector<MinuteStamp> timestamps;  // empty for synthetic data
    std::vector<ChannelMeta> channels;

    std::size_t length() const noexcept { return values.rows(); }
    std::size_t channel_count() const noexcept { return values.cols(); }

    /// Throws SpecificationError when an invariant is violated.
    void validate() const;

    /// Minutes since the session open for every row. Without timestamps the
    /// series is treated as contiguous minutely data starting at the open.
    std::vector<int> minute_of_day() const;

    /// Rows [begin, end) with timestamps carried along.
    MultivariateSeries slice(std::size_t begin, std::size_t end) const;
};

/// Channel names used in CSV headers: <TICK>_mid, <TICK>_vol, or the ticker itself.
std::string channel_name(const ChannelMeta& meta);

/// Metadata for n assets laid out as [t1_mid, t1_vol, t2_mid, ...].
std::vector<ChannelMeta> stock_layout(const std::vector<std::string>& tickers);

/// Raw channels named ch0, ch1, ...
std::vector<ChannelMeta> raw_layout(std::size_t channels);

/// Time-of-day bin (10-minute resolution, clamped to [0, 38]).
int minute_bin(int minute_of_day) noexcept;

}  // namespace comets::ts

#include "comets/ts/series.hpp"

#include <algorithm>
#include <cmath>

#include "comets/error.hpp"

namespace comets::ts {

void MultivariateSeries::validate() const {
    if (values.rows() < 1) throw SpecificationError("series must have at least one row");
    if (channels.size() != values.cols()) {
        throw SpecificationError("channel metadata count " + std::to_string(channels.size()) +
                                 " does not match column count " + std::to_string(values.cols()));
    }
    for (std::size_t i = 0; i < values.data().size(); ++i) {
        if (!std::isfinite(values.data()[i])) {
            throw SpecificationError("non-finite value at row " +
                                     std::to_string(i / values.cols()) + ", column " +
                                     std::to_string(i % values.cols()));
        }
    }
    if (!timestamps.empty()) {
        if (timestamps.size() != values.rows()) {
            throw SpecificationError("timestamp count does not match row count");
        }
        for (std::size_t r = 1; r < timestamps.size(); ++r) {
            if (timestamps[r] <= timestamps[r - 1]) {
                throw SpecificationError("timestamps not strictly increasing at row " +
                                         std::to_string(r));
            }
        }
    }
    const bool market = std::any_of(channels.begin(), channels.end(), [](const ChannelMeta& m) {
        return m.kind != ChannelKind::Raw;
    });
    if (market && channels.size() % 2 != 0) {
        throw SpecificationError("price/volume layouts need an even channel count");
    }
}

std::vector<int> MultivariateSeries::minute_of_day() const {
    std::vector<int> out(values.rows());
    if (timestamps.empty()) {
        for (std::size_t r = 0; r < out.size(); ++r) out[r] = static_cast<int>(r % kSessionMinutes);
        return out;
    }
    for (std::size_t r = 0; r < out.size(); ++r) {
        const auto in_day = static_cast<int>(((timestamps[r] % 1440) + 1440) % 1440);
        out[r] = in_day - kSessionOpenMinute;
    }
    return out;
}

MultivariateSeries MultivariateSeries::slice(std::size_t begin, std::size_t end) const {
    MultivariateSeries out;
    out.values = values.slice_rows(begin, end);
    if (!timestamps.empty()) {
        out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                              timestamps.begin() + static_cast<std::ptrdiff_t>(end));
    }
    out.channels = channels;
    return out;
}

std::string channel_name(const ChannelMeta& meta) {
    switch (meta.kind) {
        case ChannelKind::Price: return meta.ticker + "_mid";
        case ChannelKind::Volume: return meta.ticker + "_vol";
        case ChannelKind::Raw: break;
    }
    return meta.ticker;
}

std::vector<ChannelMeta> stock_layout(const std::vector<std::string>& tickers) {
    std::vector<ChannelMeta> out;
    out.reserve(tickers.size() * 2);
    for (const auto& t : tickers) {
        out.push_back({t, ChannelKind::Price});
        out.push_back({t, ChannelKind::Volume});
    }
    return out;
}

std::vector<ChannelMeta> raw_layout(std::size_t channels) {
    std::vector<ChannelMeta> out(channels);
    for (std::size_t i = 0; i < channels; ++i) out[i] = {"ch" + std::to_string(i), ChannelKind::Raw};
    return out;
}

int minute_bin(int minute_of_day) noexcept {
    return std::clamp(minute_of_day / kMinutesPerBin, 0, kTimeBins - 1);
}

}  // namespace comets::ts

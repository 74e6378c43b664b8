#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comets/ts/series.hpp"

namespace comets::ts {

/// Parses "YYYY-MM-DDTHH:MM" (optionally ":00" seconds, 'T' or ' ' separator).
std::optional<MinuteStamp> parse_timestamp(std::string_view text);
std::string format_timestamp(MinuteStamp stamp);

/// Strict market-data ingestion. Header `timestamp,<TICK>_mid,<TICK>_vol[,...]`;
/// output channels ordered [t1_mid, t1_vol, t2_mid, ...] following
/// `expected_tickers` (header order when empty). Only complete, gap-free
/// 09:30-16:00 sessions are accepted.
MultivariateSeries ingest_csv(const std::filesystem::path& path,
                              const std::vector<std::string>& expected_tickers = {});
MultivariateSeries ingest_csv_text(std::string_view text,
                                   const std::vector<std::string>& expected_tickers = {});

/// Generic series CSV: first column `timestamp` or `step`, then one column per
/// channel named by channel_name(). Values use round-trip precision.
std::string series_to_csv(const MultivariateSeries& series);
void write_series_csv(const std::filesystem::path& path, const MultivariateSeries& series);

/// Reads the generic format. `_mid`/`_vol` suffixes map to Price/Volume kinds.
MultivariateSeries read_series_csv(const std::filesystem::path& path);
MultivariateSeries series_from_csv(std::string_view text);

}  // namespace comets::ts

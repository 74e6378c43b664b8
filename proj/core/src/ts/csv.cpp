#include "comets/ts/csv.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "comets/error.hpp"
#include "comets/io.hpp"

namespace comets::ts {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct ParsedColumn {
    std::string ticker;
    ChannelKind kind;
};

ParsedColumn parse_column_name(std::string_view name) {
    auto ends_with = [&](std::string_view suf) {
        return name.size() > suf.size() && name.substr(name.size() - suf.size()) == suf;
    };
    if (ends_with("_mid")) return {std::string(name.substr(0, name.size() - 4)), ChannelKind::Price};
    if (ends_with("_vol")) return {std::string(name.substr(0, name.size() - 4)), ChannelKind::Volume};
    return {std::string(name), ChannelKind::Raw};
}

}  // namespace

std::optional<MinuteStamp> parse_timestamp(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    // YYYY-MM-DDTHH:MM[:SS]
    if (text.size() != 16 && text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
        return std::nullopt;
    }
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
        !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
        !parse_int(text.substr(14, 2), mi)) {
        return std::nullopt;
    }
    if (text.size() == 19) {
        if (text[16] != ':' || !parse_int(text.substr(17, 2), sec) || sec != 0) return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<MinuteStamp>(days) * 1440 + h * 60 + mi;
}

std::string format_timestamp(MinuteStamp stamp) {
    using namespace std::chrono;
    const auto day_index = stamp >= 0 ? stamp / 1440 : (stamp - 1439) / 1440;
    const auto minute = stamp - day_index * 1440;
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(minute / 60), static_cast<int>(minute % 60));
    return buf;
}

MultivariateSeries ingest_csv_text(std::string_view text,
                                   const std::vector<std::string>& expected_tickers) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw IngestionError(1, "empty file (missing header)");
    const auto header = split_fields(lines[0]);
    if (header.empty() || trim(header[0]) != "timestamp") {
        throw IngestionError(1, "first column must be 'timestamp'");
    }

    std::map<std::string, std::size_t> column_of;
    std::vector<std::string> header_tickers;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto name = std::string(trim(header[i]));
        const auto parsed = parse_column_name(name);
        if (parsed.kind == ChannelKind::Raw || parsed.ticker.empty()) {
            throw IngestionError(1, "unexpected column '" + name + "' (want <TICK>_mid / <TICK>_vol)");
        }
        if (!column_of.emplace(name, i).second) throw IngestionError(1, "duplicate column '" + name + "'");
        if (parsed.kind == ChannelKind::Price) header_tickers.push_back(parsed.ticker);
    }
    const auto& tickers = expected_tickers.empty() ? header_tickers : expected_tickers;
    if (tickers.empty()) throw IngestionError(1, "no <TICK>_mid columns");

    std::vector<std::size_t> source;  // output channel -> CSV column
    for (const auto& t : tickers) {
        for (const char* suffix : {"_mid", "_vol"}) {
            const auto it = column_of.find(t + suffix);
            if (it == column_of.end()) throw IngestionError(1, "missing column '" + t + suffix + "'");
            source.push_back(it->second);
        }
    }

    MultivariateSeries out;
    out.channels = stock_layout(tickers);
    const std::size_t c = source.size();
    std::vector<double> values;
    values.reserve((lines.size() - 1) * c);

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;  // 1-based file line number
        const auto fields = split_fields(lines[li]);
        if (fields.size() != header.size()) {
            throw IngestionError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
        }
        const auto stamp = parse_timestamp(fields[0]);
        if (!stamp) throw IngestionError(row, "bad timestamp '" + std::string(trim(fields[0])) + "'");
        const auto minute = static_cast<int>(*stamp % 1440) - kSessionOpenMinute;
        if (minute < 0 || minute >= kSessionMinutes) {
            throw IngestionError(row, "timestamp outside the 09:30-16:00 session");
        }
        if (!out.timestamps.empty()) {
            const auto prev = out.timestamps.back();
            if (*stamp <= prev) throw IngestionError(row, "timestamps not strictly increasing");
            const bool same_day = (*stamp / 1440) == (prev / 1440);
            if (same_day && *stamp != prev + 1) throw IngestionError(row, "gap within trading day");
            if (!same_day) {
                if ((prev % 1440) - kSessionOpenMinute != kSessionMinutes - 1) {
                    throw IngestionError(row - 1, "session ends before 16:00");
                }
                if (minute != 0) throw IngestionError(row, "session does not start at 09:30");
            }
        } else if (minute != 0) {
            throw IngestionError(row, "session does not start at 09:30");
        }
        out.timestamps.push_back(*stamp);

        for (std::size_t ch = 0; ch < c; ++ch) {
            const auto v = parse_double(fields[source[ch]]);
            if (!v || !std::isfinite(*v)) {
                throw IngestionError(row, "non-finite or unparsable value in column '" +
                                              std::string(trim(header[source[ch]])) + "'");
            }
            if (out.channels[ch].kind == ChannelKind::Price && *v <= 0.0) {
                throw IngestionError(row, "mid-price must be positive");
            }
            if (out.channels[ch].kind == ChannelKind::Volume && *v < 0.0) {
                throw IngestionError(row, "volume must be non-negative");
            }
            values.push_back(*v);
        }
    }
    if (out.timestamps.empty()) throw IngestionError(2, "no data rows");
    if ((out.timestamps.back() % 1440) - kSessionOpenMinute != kSessionMinutes - 1) {
        throw IngestionError(lines.size(), "session ends before 16:00");
    }
    out.values = Matrix(out.timestamps.size(), c, std::move(values));
    return out;
}

MultivariateSeries ingest_csv(const std::filesystem::path& path,
                              const std::vector<std::string>& expected_tickers) {
    return ingest_csv_text(read_file(path), expected_tickers);
}

std::string series_to_csv(const MultivariateSeries& series) {
    std::string out;
    out += series.timestamps.empty() ? "step" : "timestamp";
    for (const auto& m : series.channels) {
        out += ',';
        out += channel_name(m);
    }
    out += '\n';
    for (std::size_t r = 0; r < series.length(); ++r) {
        out += series.timestamps.empty() ? std::to_string(r) : format_timestamp(series.timestamps[r]);
        for (std::size_t ch = 0; ch < series.channel_count(); ++ch) {
            out += ',';
            out += format_double(series.values(r, ch));
        }
        out += '\n';
    }
    return out;
}

void write_series_csv(const std::filesystem::path& path, const MultivariateSeries& series) {
    write_file_atomic(path, series_to_csv(series));
}

MultivariateSeries series_from_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw IngestionError(1, "empty file (missing header)");
    const auto header = split_fields(lines[0]);
    const auto first = trim(header[0]);
    const bool stamped = first == "timestamp";
    if (!stamped && first != "step") throw IngestionError(1, "first column must be 'timestamp' or 'step'");
    if (header.size() < 2) throw IngestionError(1, "no channel columns");

    MultivariateSeries out;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto parsed = parse_column_name(trim(header[i]));
        out.channels.push_back({parsed.ticker, parsed.kind});
    }
    const std::size_t c = out.channels.size();
    std::vector<double> values;
    values.reserve((lines.size() - 1) * c);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        const auto fields = split_fields(lines[li]);
        if (fields.size() != header.size()) throw IngestionError(row, "wrong field count");
        if (stamped) {
            const auto stamp = parse_timestamp(fields[0]);
            if (!stamp) throw IngestionError(row, "bad timestamp");
            if (!out.timestamps.empty() && *stamp <= out.timestamps.back()) {
                throw IngestionError(row, "timestamps not strictly increasing");
            }
            out.timestamps.push_back(*stamp);
        }
        for (std::size_t ch = 0; ch < c; ++ch) {
            const auto v = parse_double(fields[ch + 1]);
            if (!v || !std::isfinite(*v)) throw IngestionError(row, "non-finite or unparsable value");
            values.push_back(*v);
        }
    }
    const std::size_t rows = lines.size() - 1;
    if (rows == 0) throw IngestionError(2, "no data rows");
    out.values = Matrix(rows, c, std::move(values));
    out.validate();
    return out;
}

MultivariateSeries read_series_csv(const std::filesystem::path& path) {
    return series_from_csv(read_file(path));
}

}  // namespace comets::ts

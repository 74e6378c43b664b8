#include "comets/ts/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"

namespace comets::ts {
namespace {

const char* kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::Price: return "price";
        case ChannelKind::Volume: return "volume";
        case ChannelKind::Raw: break;
    }
    return "raw";
}

ChannelKind kind_from_name(const std::string& s) {
    if (s == "price") return ChannelKind::Price;
    if (s == "volume") return ChannelKind::Volume;
    if (s == "raw") return ChannelKind::Raw;
    throw SpecificationError("unknown channel kind '" + s + "'");
}

}  // namespace

nlohmann::json PreprocessState::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& c : channels) {
        nlohmann::json j{{"kind", kind_name(c.kind)}};
        if (c.kind == ChannelKind::Price) {
            j["mean"] = c.mean;
            j["std"] = c.std;
            j["first_price"] = c.first_price;
            j["last_price"] = c.last_price;
        } else if (c.kind == ChannelKind::Volume) {
            j["min"] = c.min;
            j["max"] = c.max;
        }
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"channels", std::move(arr)}};
}

PreprocessState PreprocessState::from_json(const nlohmann::json& j) {
    PreprocessState s;
    for (const auto& c : j.at("channels")) {
        ChannelTransform t;
        t.kind = kind_from_name(c.at("kind").get<std::string>());
        if (t.kind == ChannelKind::Price) {
            t.mean = c.at("mean").get<double>();
            t.std = c.at("std").get<double>();
            t.first_price = c.at("first_price").get<double>();
            t.last_price = c.at("last_price").get<double>();
        } else if (t.kind == ChannelKind::Volume) {
            t.min = c.at("min").get<double>();
            t.max = c.at("max").get<double>();
        }
        s.channels.push_back(t);
    }
    return s;
}

PreprocessState fit_preprocess(const MultivariateSeries& series) {
    if (series.length() < 2) throw PreprocessError("preprocessing needs at least two rows");
    PreprocessState state;
    const std::size_t t_len = series.length();
    for (std::size_t ch = 0; ch < series.channel_count(); ++ch) {
        ChannelTransform tr;
        tr.kind = series.channels[ch].kind;
        const std::string label = channel_name(series.channels[ch]);
        if (tr.kind == ChannelKind::Price) {
            double sum = 0.0;
            for (std::size_t r = 1; r < t_len; ++r) {
                const double p0 = series.values(r - 1, ch), p1 = series.values(r, ch);
                if (p0 <= 0.0 || p1 <= 0.0) throw PreprocessError(label + ": non-positive price");
                sum += std::log(p1 / p0);
            }
            const double n = static_cast<double>(t_len - 1);
            tr.mean = sum / n;
            double ss = 0.0;
            for (std::size_t r = 1; r < t_len; ++r) {
                const double d = std::log(series.values(r, ch) / series.values(r - 1, ch)) - tr.mean;
                ss += d * d;
            }
            tr.std = std::sqrt(ss / n);
            if (!(tr.std > 0.0)) throw PreprocessError(label + ": constant price channel (zero return std)");
            tr.first_price = series.values(0, ch);
            tr.last_price = series.values(t_len - 1, ch);
        } else if (tr.kind == ChannelKind::Volume) {
            tr.min = series.values(0, ch);
            tr.max = series.values(0, ch);
            for (std::size_t r = 1; r < t_len; ++r) {
                tr.min = std::min(tr.min, series.values(r, ch));
                tr.max = std::max(tr.max, series.values(r, ch));
            }
            if (!(tr.max > tr.min)) throw PreprocessError(label + ": constant volume channel");
        }
        state.channels.push_back(tr);
    }
    return state;
}

MultivariateSeries apply_preprocess(const MultivariateSeries& series, const PreprocessState& state) {
    if (series.length() < 2) throw PreprocessError("preprocessing needs at least two rows");
    if (state.channels.size() != series.channel_count()) {
        throw PreprocessError("preprocess state has " + std::to_string(state.channels.size()) +
                              " channels, series has " + std::to_string(series.channel_count()));
    }
    MultivariateSeries out;
    out.channels = series.channels;
    if (!series.timestamps.empty()) {
        out.timestamps.assign(series.timestamps.begin() + 1, series.timestamps.end());
    }
    const std::size_t rows = series.length() - 1;
    out.values = Matrix(rows, series.channel_count());
    for (std::size_t ch = 0; ch < series.channel_count(); ++ch) {
        const auto& tr = state.channels[ch];
        if (tr.kind != series.channels[ch].kind) throw PreprocessError("channel kind mismatch");
        for (std::size_t r = 0; r < rows; ++r) {
            const double prev = series.values(r, ch), cur = series.values(r + 1, ch);
            double v = cur;
            if (tr.kind == ChannelKind::Price) {
                v = (std::log(cur / prev) - tr.mean) / tr.std;
            } else if (tr.kind == ChannelKind::Volume) {
                v = 2.0 * (cur - tr.min) / (tr.max - tr.min) - 1.0;
            }
            out.values(r, ch) = v;
        }
    }
    return out;
}

MultivariateSeries invert_preprocess(const MultivariateSeries& series, const PreprocessState& state,
                                     InvertAnchor anchor, std::span<const double> anchor_prices) {
    if (state.channels.size() != series.channel_count()) {
        throw PreprocessError("preprocess state is missing channels: state has " +
                              std::to_string(state.channels.size()) + ", series has " +
                              std::to_string(series.channel_count()));
    }
    MultivariateSeries out = series;
    std::size_t price_index = 0;
    for (std::size_t ch = 0; ch < series.channel_count(); ++ch) {
        const auto& tr = state.channels[ch];
        if (tr.kind == ChannelKind::Price) {
            double price = anchor == InvertAnchor::Start ? tr.first_price : tr.last_price;
            if (!anchor_prices.empty()) {
                if (price_index >= anchor_prices.size()) throw PreprocessError("too few anchor prices");
                price = anchor_prices[price_index];
            }
            ++price_index;
            for (std::size_t r = 0; r < series.length(); ++r) {
                price *= std::exp(tr.mean + tr.std * series.values(r, ch));
                out.values(r, ch) = price;
            }
        } else if (tr.kind == ChannelKind::Volume) {
            for (std::size_t r = 0; r < series.length(); ++r) {
                const double v = tr.min + (series.values(r, ch) + 1.0) * 0.5 * (tr.max - tr.min);
                out.values(r, ch) = std::max(0.0, v);
            }
        }
    }
    return out;
}

}  // namespace comets::ts

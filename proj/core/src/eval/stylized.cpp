#include "comets/eval/stylized.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/eval/metrics.hpp"

namespace comets::eval {
namespace {

struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

Moments moments(std::span<const double> x) {
    Moments m;
    m.n = static_cast<double>(x.size());
    for (double v : x) m.mean += v;
    m.mean /= m.n;
    for (double v : x) {
        const double d = v - m.mean, d2 = d * d;
        m.m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    m.m2 /= m.n;
    m.m3 /= m.n;
    m.m4 /= m.n;
    return m;
}

void need(bool ok, const std::string& what) {
    if (!ok) throw SpecificationError("insufficient data for " + what);
}

std::vector<double> aggregate(const std::vector<std::vector<double>>& days, std::size_t horizon) {
    std::vector<double> out;
    for (const auto& d : days) {
        for (std::size_t k = 0; k + horizon <= d.size(); k += horizon) {
            double s = 0.0;
            for (std::size_t i = 0; i < horizon; ++i) s += d[k + i];
            out.push_back(s);
        }
    }
    return out;
}

double pooled_autocorrelation(const std::vector<std::vector<double>>& days, std::size_t lag) {
    double mean = 0.0, n = 0.0;
    for (const auto& d : days)
        for (double v : d) {
            mean += v;
            n += 1.0;
        }
    mean /= n;
    double num = 0.0, den = 0.0;
    for (const auto& d : days) {
        for (std::size_t t = 0; t < d.size(); ++t) {
            den += (d[t] - mean) * (d[t] - mean);
            if (t + lag < d.size()) num += (d[t] - mean) * (d[t + lag] - mean);
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

double stdev(std::span<const double> x) {
    const Moments m = moments(x);
    return std::sqrt(m.m2);
}

}  // namespace

double excess_kurtosis(std::span<const double> x) {
    need(x.size() >= 4, "excess kurtosis (needs >= 4 samples)");
    const Moments m = moments(x);
    if (m.m2 <= 0.0) return 0.0;
    return m.m4 / (m.m2 * m.m2) - 3.0;
}

double jarque_bera(std::span<const double> x) {
    need(x.size() >= 4, "normality statistic (needs >= 4 samples)");
    const Moments m = moments(x);
    if (m.m2 <= 0.0) return 0.0;
    const double skew = m.m3 / std::pow(m.m2, 1.5);
    const double kurt = m.m4 / (m.m2 * m.m2) - 3.0;
    return m.n / 6.0 * (skew * skew + kurt * kurt / 4.0);
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
    need(x.size() > lag + 1, "autocorrelation at lag " + std::to_string(lag));
    const Moments m = moments(x);
    if (m.m2 <= 0.0) return 0.0;
    double num = 0.0;
    for (std::size_t t = 0; t + lag < x.size(); ++t) num += (x[t] - m.mean) * (x[t + lag] - m.mean);
    return num / (m.m2 * m.n);
}

nlohmann::json AssetFacts::to_json() const {
    nlohmann::json j;
    j["asset"] = asset;
    j["horizons"] = nlohmann::json::array();
    for (const auto& h : horizons) {
        j["horizons"].push_back({{"horizon", h.horizon},
                                 {"samples", h.samples},
                                 {"excess_kurtosis", h.excess_kurtosis},
                                 {"jarque_bera", h.jarque_bera}});
    }
    j["aggregational_normality"] = aggregational_normality;
    j["return_autocorr"] = nlohmann::json::array();
    for (const auto& a : return_autocorr) {
        j["return_autocorr"].push_back({{"lag", a.lag}, {"mean", a.mean}, {"pooled", a.pooled}, {"per_day", a.per_day}});
    }
    j["autocorr_band"] = autocorr_band;
    j["volatility_autocorr"] = nlohmann::json::array();
    for (const auto& v : volatility_autocorr) j["volatility_autocorr"].push_back({{"lag", v.lag}, {"value", v.value}});
    j["volume_volatility"] = volume_volatility;
    j["volume_volatility_mean"] = volume_volatility_mean ? nlohmann::json(*volume_volatility_mean) : nlohmann::json();
    return j;
}

AssetFacts return_facts(const std::vector<std::vector<double>>& day_returns, const StylizedConfig& config) {
    need(day_returns.size() >= 2, "stylized facts (needs >= 2 trading days)");
    AssetFacts f;
    std::size_t total = 0;
    for (const auto& d : day_returns) total += d.size();
    need(total >= 4, "stylized facts (needs >= 4 returns)");

    for (std::size_t h : config.horizons) {
        need(h >= 1, "aggregation horizon 0");
        const auto agg = aggregate(day_returns, h);
        need(agg.size() >= 4, "kurtosis at horizon " + std::to_string(h));
        f.horizons.push_back({h, agg.size(), excess_kurtosis(agg), jarque_bera(agg)});
    }
    if (f.horizons.size() >= 2) {
        f.aggregational_normality =
            std::abs(f.horizons.back().excess_kurtosis) < std::abs(f.horizons.front().excess_kurtosis);
    }

    for (std::size_t lag : config.return_lags) {
        LagAutocorrelation a;
        a.lag = lag;
        for (const auto& d : day_returns) {
            if (d.size() > lag + 1) a.per_day.push_back(autocorrelation(d, lag));
        }
        need(!a.per_day.empty(), "return autocorrelation at lag " + std::to_string(lag));
        for (double v : a.per_day) a.mean += v;
        a.mean /= static_cast<double>(a.per_day.size());
        a.pooled = pooled_autocorrelation(day_returns, lag);
        f.return_autocorr.push_back(std::move(a));
    }
    f.autocorr_band = 2.0 / std::sqrt(static_cast<double>(total));

    std::vector<double> vol;
    for (const auto& d : day_returns) {
        if (d.size() >= 2) vol.push_back(stdev(d));
    }
    for (std::size_t lag = 1; lag <= config.volatility_day_lags; ++lag) {
        if (vol.size() < lag + 3) break;
        f.volatility_autocorr.push_back({lag, autocorrelation(vol, lag)});
    }
    return f;
}

void add_volume_volatility(AssetFacts& facts, std::span<const double> prices, std::span<const double> volumes,
                           const std::vector<std::size_t>& day_of_row, const StylizedConfig& config) {
    if (prices.size() != volumes.size() || prices.size() != day_of_row.size()) {
        throw ShapeError("volume-volatility", std::to_string(prices.size()) + " rows",
                         std::to_string(volumes.size()) + " rows");
    }
    const std::size_t w = config.volume_window, b = config.volume_bucket;
    need(w >= 2 * b && b >= 2, "volume-volatility (window must hold two buckets)");
    facts.volume_volatility.clear();
    for (std::size_t start = 0; start + w <= prices.size(); start += w) {
        std::vector<double> mean_vol, volat;
        for (std::size_t k = start; k + b <= start + w; k += b) {
            double vs = 0.0, rs = 0.0;
            std::size_t rn = 0;
            for (std::size_t r = k; r < k + b; ++r) {
                vs += volumes[r];
                if (r > 0 && day_of_row[r] == day_of_row[r - 1] && prices[r] > 0 && prices[r - 1] > 0) {
                    const double ret = std::log(prices[r] / prices[r - 1]);
                    rs += ret * ret;
                    ++rn;
                }
            }
            if (rn == 0) continue;
            mean_vol.push_back(vs / static_cast<double>(b));
            volat.push_back(std::sqrt(rs / static_cast<double>(rn)));
        }
        if (mean_vol.size() >= 2) facts.volume_volatility.push_back(pearson(mean_vol, volat));
    }
    need(!facts.volume_volatility.empty(), "volume-volatility correlation (needs a full window)");
    double s = 0.0;
    for (double v : facts.volume_volatility) s += v;
    facts.volume_volatility_mean = s / static_cast<double>(facts.volume_volatility.size());
}

std::vector<std::size_t> day_index(const ts::MultivariateSeries& series, std::size_t session_length) {
    std::vector<std::size_t> out(series.length());
    if (!series.timestamps.empty()) {
        std::size_t day = 0;
        for (std::size_t r = 0; r < out.size(); ++r) {
            if (r > 0 && series.timestamps[r] / 1440 != series.timestamps[r - 1] / 1440) ++day;
            out[r] = day;
        }
    } else {
        for (std::size_t r = 0; r < out.size(); ++r) out[r] = r / session_length;
    }
    return out;
}

std::vector<AssetFacts> stylized_facts(const ts::MultivariateSeries& series, const StylizedConfig& config) {
    const auto day = day_index(series, config.session_length);
    std::vector<AssetFacts> out;
    for (std::size_t c = 0; c < series.channel_count(); ++c) {
        const auto& meta = series.channels.at(c);
        if (meta.kind == ts::ChannelKind::Volume) continue;
        const auto col = series.values.column(c);
        std::vector<std::vector<double>> days;
        for (std::size_t r = 0; r < col.size(); ++r) {
            const bool new_day = r == 0 || day[r] != day[r - 1];
            if (new_day) days.emplace_back();
            if (meta.kind == ts::ChannelKind::Price) {
                if (!new_day) {
                    need(col[r] > 0 && col[r - 1] > 0, "log-returns of " + meta.ticker + " (non-positive price)");
                    days.back().push_back(std::log(col[r] / col[r - 1]));
                }
            } else {
                days.back().push_back(col[r]);
            }
        }
        AssetFacts f = return_facts(days, config);
        f.asset = ts::channel_name(meta);
        if (meta.kind == ts::ChannelKind::Price) {
            f.asset = meta.ticker;
            for (std::size_t v = 0; v < series.channel_count(); ++v) {
                const auto& vm = series.channels[v];
                if (vm.kind == ts::ChannelKind::Volume && vm.ticker == meta.ticker) {
                    add_volume_volatility(f, col, series.values.column(v), day, config);
                    break;
                }
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace comets::eval

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/ts/series.hpp"

namespace comets::eval {

/// Sample excess kurtosis m4 / m2^2 - 3.
double excess_kurtosis(std::span<const double> x);
/// Jarque-Bera normality statistic n/6 (S^2 + K^2/4).
double jarque_bera(std::span<const double> x);
/// Lag-k sample autocorrelation (mean-centred, biased denominator); 0 for constant input.
double autocorrelation(std::span<const double> x, std::size_t lag);

struct StylizedConfig {
    std::size_t session_length = ts::kSessionMinutes;
    std::vector<std::size_t> horizons{1, 15};
    std::vector<std::size_t> return_lags{1, 10, 20, 30};
    std::size_t volatility_day_lags = 10;
    std::size_t volume_window = 2 * ts::kSessionMinutes;
    std::size_t volume_bucket = 10;
};

struct HorizonStats {
    std::size_t horizon = 1;
    std::size_t samples = 0;
    double excess_kurtosis = 0.0;
    double jarque_bera = 0.0;
};

struct LagAutocorrelation {
    std::size_t lag = 0;
    std::vector<double> per_day;
    double mean = 0.0;
    /// One estimate over every within-day pair of all days.
    double pooled = 0.0;
};

struct LagValue {
    std::size_t lag = 0;
    double value = 0.0;
};

struct AssetFacts {
    std::string asset;
    std::vector<HorizonStats> horizons;
    /// Kurtosis at the longest horizon is closer to 0 than at the shortest.
    bool aggregational_normality = false;
    std::vector<LagAutocorrelation> return_autocorr;
    /// 2 / sqrt(number of one-step returns).
    double autocorr_band = 0.0;
    /// Autocorrelation of daily volatility at the day lags that have data.
    std::vector<LagValue> volatility_autocorr;
    /// Per window: Pearson between bucket mean volume and bucket volatility.
    std::vector<double> volume_volatility;
    std::optional<double> volume_volatility_mean;

    nlohmann::json to_json() const;
};

/// Statistics of one asset from its one-step returns split by trading day.
AssetFacts return_facts(const std::vector<std::vector<double>>& day_returns, const StylizedConfig& config);

/// Adds the volume-volatility section from raw prices and volumes (same length).
void add_volume_volatility(AssetFacts& facts, std::span<const double> prices, std::span<const double> volumes,
                           const std::vector<std::size_t>& day_of_row, const StylizedConfig& config);

/// Trading day index of every row (timestamps when present, else blocks of session_length rows).
std::vector<std::size_t> day_index(const ts::MultivariateSeries& series, std::size_t session_length);

/// One entry per asset: Price channels use within-day log-returns of the price
/// (paired with the asset's Volume channel when present); Raw channels are
/// treated as one-step return series.
std::vector<AssetFacts> stylized_facts(const ts::MultivariateSeries& series, const StylizedConfig& config);

}  // namespace comets::eval

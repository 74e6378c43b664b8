#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/eval/discriminative.hpp"
#include "comets/eval/metrics.hpp"
#include "comets/eval/stylized.hpp"
#include "comets/ts/series.hpp"

namespace comets::eval {

struct EvaluationConfig {
    StylizedConfig stylized;
    CorrelationWindowSpec correlation{ts::kSessionMinutes, ts::kSessionMinutes};
    DiscriminativeConfig discriminative;
    /// Window length for the classifier; windows are non-overlapping.
    std::size_t discriminative_window = 150;
    bool include_stylized = true;
    bool include_discriminative = true;
};

struct PairReport {
    std::string pair;
    std::size_t i = 0;
    std::size_t j = 0;
    double real_corr = 0.0;
    double synthetic_corr = 0.0;
    double cross_correlation_distance = 0.0;
    double windowed_wasserstein = 0.0;
};

struct EvaluationReport {
    std::vector<AssetFacts> real_facts;
    std::vector<AssetFacts> synthetic_facts;
    std::vector<PairReport> pairs;
    double mean_cross_correlation_distance = 0.0;
    std::optional<double> discriminative_score;

    nlohmann::json to_json() const;
};

/// Full comparison of a synthetic series against a real one with the same layout.
EvaluationReport evaluate(const ts::MultivariateSeries& real, const ts::MultivariateSeries& synthetic,
                          const EvaluationConfig& config);

/// Writes the distributions behind each report figure as CSV files in `dir`.
void write_figure_data(const std::filesystem::path& dir, const ts::MultivariateSeries& real,
                       const ts::MultivariateSeries& synthetic, const EvaluationReport& report,
                       const EvaluationConfig& config);

}  // namespace comets::eval

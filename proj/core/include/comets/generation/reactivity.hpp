#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/generation/rollout.hpp"

namespace comets::generation {

struct ReactivityConfig {
    /// Rollout settings shared by every run; seed and perturbation are overridden.
    RolloutConfig base;
    std::size_t target = 0;
    /// Channels correlated against the target; empty means every other channel.
    std::vector<std::size_t> others;
    std::size_t window_start = 0;
    std::size_t window_end = 0;
    /// Rows after the window included in the correlation (default: one block, F).
    std::optional<std::size_t> response_horizon;
    std::vector<double> intensities;
    std::vector<std::uint64_t> seeds;
    /// Optional real reference for the real/real curve.
    std::optional<Matrix> real;
    std::vector<std::string> channel_names;
};

struct ReactivityEntry {
    std::string pair;   // "<target>~<other>"
    std::string curve;  // real_real | synth_synth | perturbed_vs_unperturbed | perturbed_vs_reactive
    double intensity = 0.0;
    double mean_corr = 0.0;
    double stderr_corr = 0.0;
    std::size_t n_seeds = 0;

    nlohmann::json to_json() const;
};

/// Paired perturbed/unperturbed rollouts sharing noise streams. Correlations are
/// taken over [window_start, window_end + horizon) of the generated rows.
std::vector<ReactivityEntry> reactivity_experiment(gan::GanModel& model, const ReactivityConfig& config);

nlohmann::json reactivity_report_json(const std::vector<ReactivityEntry>& entries);

}  // namespace comets::generation

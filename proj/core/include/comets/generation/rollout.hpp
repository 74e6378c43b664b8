#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "comets/gan/model.hpp"
#include "comets/generation/perturbation.hpp"

namespace comets::generation {

struct RolloutConfig {
    std::size_t total_steps = 9360;
    std::uint64_t seed = 0;
    /// Real conditioning window, P rows.
    Matrix start_window;
    /// Minute of day of the first row of start_window.
    int start_minute = 0;
    std::optional<PerturbationSpec> perturbation;
};

struct RolloutResult {
    Matrix values;             // total_steps x C, generated rows only
    std::vector<int> minutes;  // minute of day per generated row
    std::size_t model_calls = 0;
};

/// Generates F rows at a time from the last P rows of history until
/// total_steps rows exist. A perturbation replaces the generated values before
/// they are fed back. Non-finite output raises NumericalError at the offending row.
RolloutResult rollout(gan::GanModel& model, const RolloutConfig& config);

}  // namespace comets::generation

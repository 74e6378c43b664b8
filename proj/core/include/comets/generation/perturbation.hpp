#pragma once

#include <vector>

#include "comets/matrix.hpp"

namespace comets::generation {

/// Additive shock x + a * sigma(x) on target channels over rows [start, end)
/// of a rollout (generated coordinates, 0 = first generated row).
struct PerturbationSpec {
    std::vector<std::size_t> channels;
    std::size_t start = 0;
    std::size_t end = 0;
    double intensity = 0.0;

    void validate(std::size_t channel_count, std::size_t total_steps) const;
};

/// Replaces each target channel of `window` by x + a * sigma, sigma being the
/// population standard deviation of that channel over the window.
Matrix apply_perturbation(const Matrix& window, const std::vector<std::size_t>& channels, double intensity);

/// Same, restricted to rows [row_begin, row_end) of `window`; other rows are untouched.
Matrix apply_perturbation(const Matrix& window, const std::vector<std::size_t>& channels, double intensity,
                          std::size_t row_begin, std::size_t row_end);

}  // namespace comets::generation

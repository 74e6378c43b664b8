#include "comets/generation/perturbation.hpp"

#include <cmath>

#include "comets/error.hpp"

namespace comets::generation {

void PerturbationSpec::validate(std::size_t channel_count, std::size_t total_steps) const {
    if (channels.empty()) throw SpecificationError("perturbation needs at least one target channel");
    for (std::size_t c : channels) {
        if (c >= channel_count) {
            throw SpecificationError("perturbation target channel " + std::to_string(c) + " is not in the layout (" +
                                     std::to_string(channel_count) + " channels)");
        }
    }
    if (start >= end) throw SpecificationError("perturbation window is empty");
    if (end > total_steps) throw SpecificationError("perturbation window extends past the rollout");
    if (!std::isfinite(intensity)) throw SpecificationError("perturbation intensity must be finite");
}

Matrix apply_perturbation(const Matrix& window, const std::vector<std::size_t>& channels, double intensity) {
    return apply_perturbation(window, channels, intensity, 0, window.rows());
}

Matrix apply_perturbation(const Matrix& window, const std::vector<std::size_t>& channels, double intensity,
                          std::size_t row_begin, std::size_t row_end) {
    if (row_begin >= row_end || row_end > window.rows()) throw SpecificationError("perturbation window is empty");
    Matrix out = window;
    const double n = static_cast<double>(row_end - row_begin);
    for (std::size_t c : channels) {
        if (c >= window.cols()) throw SpecificationError("perturbation target channel out of range");
        double mean = 0.0;
        for (std::size_t r = row_begin; r < row_end; ++r) mean += window(r, c);
        mean /= n;
        double ss = 0.0;
        for (std::size_t r = row_begin; r < row_end; ++r) ss += (window(r, c) - mean) * (window(r, c) - mean);
        const double shift = intensity * std::sqrt(ss / n);
        for (std::size_t r = row_begin; r < row_end; ++r) out(r, c) += shift;
    }
    return out;
}

}  // namespace comets::generation

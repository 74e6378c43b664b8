#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "comets/matrix.hpp"

namespace comets::eval {

struct DiscriminativeConfig {
    std::size_t train_steps = 500;
    std::size_t batch_size = 64;
    double lr = 1e-2;
    double train_fraction = 0.8;
    /// Recurrent width; default max(8, C / 2).
    std::optional<std::size_t> hidden;
    std::uint64_t seed = 0;
};

/// |accuracy - 0.5| of hard predictions against labels.
double score_from_predictions(std::span<const int> predicted, std::span<const int> labels);

/// Trains a one-layer LSTM classifier on a stratified train split and returns
/// |test accuracy - 0.5|. Needs >= 20 windows per side and equal class sizes.
double discriminative_score(const std::vector<Matrix>& real, const std::vector<Matrix>& synthetic,
                            const DiscriminativeConfig& config = {});

}  // namespace comets::eval

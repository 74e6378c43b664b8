#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "comets/ts/series.hpp"

namespace comets::ts {

enum class SyntheticKind { Sines, GaussianAR };

/// Benchmark dataset description. For Sines, explicit frequencies/phases
/// override the seeded draws (eta ~ U[0,1], theta ~ U[-pi,pi]).
struct SyntheticDatasetSpec {
    SyntheticKind kind = SyntheticKind::Sines;
    std::size_t channels = 5;
    std::size_t length = 1000;
    std::optional<std::vector<double>> frequencies;
    std::optional<std::vector<double>> phases;
    double phi = 0.8;    // temporal (AR) coefficient
    double sigma = 0.8;  // cross-feature noise correlation
    std::uint64_t seed = 0;

    void validate() const;
};

/// s_i(t) = sin(2 pi eta_i t + theta_i), t = 0..T-1.
MultivariateSeries generate_sines(const SyntheticDatasetSpec& spec);

/// g(t) = phi g(t-1) + q(t), q ~ N(0, (1-sigma) I + sigma 11^T), g(0) = q(0).
MultivariateSeries generate_gaussian_ar(const SyntheticDatasetSpec& spec);

/// Dispatches on spec.kind.
MultivariateSeries generate_synthetic(const SyntheticDatasetSpec& spec);

}  // namespace comets::ts

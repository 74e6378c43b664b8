#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/matrix.hpp"
#include "comets/rng.hpp"

namespace comets::diffusion {

/// beta_1..beta_T with cumulative products alpha_bar_t = prod_{s<=t} (1 - beta_s).
class NoiseSchedule {
public:
    NoiseSchedule() = default;
    /// Betas in [0, 1); index 0 holds beta_1.
    explicit NoiseSchedule(std::vector<double> betas);

    /// Linearly spaced betas from `start` to `end`.
    static NoiseSchedule linear(std::size_t steps, double start, double end);
    /// Linear betas from 0.1/T to 20/T (the usual 1e-4..0.02 range at T = 1000).
    static NoiseSchedule scaled_linear(std::size_t steps);

    std::size_t steps() const noexcept { return betas_.size(); }
    double beta(std::size_t t) const { return betas_.at(t - 1); }
    /// alpha_bar(0) = 1.
    double alpha_bar(std::size_t t) const { return alpha_bars_.at(t); }
    const std::vector<double>& betas() const noexcept { return betas_; }

    nlohmann::json to_json() const;
    static NoiseSchedule from_json(const nlohmann::json& j);

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bars_{1.0};
};

inline constexpr std::size_t kDefaultDiffusionSteps = 100;

NoiseSchedule default_schedule(std::size_t steps = kDefaultDiffusionSteps);

struct NoisedSample {
    Matrix x_t;
    Matrix eps;
};

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps, eps ~ N(0, I).
NoisedSample forward_sample(const Matrix& x0, std::size_t t, const NoiseSchedule& schedule, Rng& rng);

}  // namespace comets::diffusion

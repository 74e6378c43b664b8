#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/diffusion/train.hpp"
#include "comets/gan/critic.hpp"
#include "comets/ts/series.hpp"

namespace comets::diffusion {

enum class CriticInput {
    ZeroPast,       // full critic score with an all-zero conditioning window
    Unconditional,  // correlation head only
};

struct GuidanceConfig {
    double w = 0.0;
    gan::Critic* critic = nullptr;
    CriticInput input = CriticInput::ZeroPast;
    /// Minute of day assigned to the first row of the zero conditioning window.
    int start_minute = 0;
};

/// Ancestral sampling with reverse variance beta_t and no noise at t = 1.
/// Window i draws from its own stream derived from (seed, i).
std::vector<Matrix> sample_unguided(DiffusionModel& model, std::size_t count, std::uint64_t seed);

/// As sample_unguided with eps~ = eps_hat - w sqrt(1 - alpha_bar_t) grad_x D(x_t).
/// w == 0 takes exactly the unguided path.
std::vector<Matrix> sample_guided(DiffusionModel& model, const GuidanceConfig& guidance, std::size_t count,
                                  std::uint64_t seed);

/// Critic score D(x) of windows x[B, F, C] under the configured input mode.
nn::Var guidance_score(gan::Critic& critic, const nn::Var& x, CriticInput input, int start_minute);

/// Gradient of sum_b D(x_b) with respect to x (one row per window).
nn::Tensor guidance_gradient(gan::Critic& critic, const nn::Tensor& x, CriticInput input, int start_minute);

/// One CSV per window (sample_00000.csv, ...) plus manifest.json.
void write_sample_dump(const std::filesystem::path& dir, const std::vector<Matrix>& windows,
                       const std::vector<ts::ChannelMeta>& channels, const nlohmann::json& manifest);

std::string critic_input_name(CriticInput input);
CriticInput parse_critic_input(const std::string& name);

}  // namespace comets::diffusion

#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/nn/layers.hpp"

namespace comets::diffusion {

struct EpsNetConfig {
    std::size_t window = 24;
    std::size_t channels = 5;
    std::size_t hidden = 64;
    std::size_t kernel = 3;
    std::vector<std::size_t> dilations{1, 2, 4, 8};
    std::size_t step_embed_dim = 32;

    void validate() const;
    nlohmann::json to_json() const;
    static EpsNetConfig from_json(const nlohmann::json& j);
};

/// Noise predictor: pointwise input projection, a stack of non-causal dilated
/// temporal blocks with the diffusion-step embedding added before each block,
/// and a pointwise output projection.
class EpsNet {
public:
    EpsNet() = default;
    EpsNet(const EpsNetConfig& config, Rng& rng);

    /// x[B, F, C] and one diffusion step per sample -> predicted noise [B, F, C].
    nn::Var forward(const nn::Var& x, const std::vector<int>& steps, const nn::Context& ctx);
    void collect(const std::string& prefix, nn::StateList& out);
    const EpsNetConfig& config() const noexcept { return config_; }

private:
    EpsNetConfig config_;
    nn::EmbeddingMlp step_embed_;
    nn::Conv1d input_;
    std::vector<nn::TemporalBlock> blocks_;
    nn::Conv1d output_;
};

}  // namespace comets::diffusion

#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/nn/layers.hpp"

namespace comets::gan {

struct GeneratorConfig {
    std::size_t past = 24;
    std::size_t future = 24;
    std::size_t channels = 5;
    std::size_t hidden = 64;
    std::size_t kernel = 3;
    std::vector<std::size_t> dilations{1, 2, 4, 8, 16, 32, 64};
    std::size_t time_embed_dim = 32;
    double dropout = 0.1;
    /// Channels squashed by tanh (volumes). Empty means none.
    std::vector<bool> bounded_channels;

    void validate() const;
    nlohmann::json to_json() const;
    static GeneratorConfig from_json(const nlohmann::json& j);
};

/// Temporal-convolution generator. Each block sees the previous block's output
/// concatenated with the time-embedded noise; a time-mixing layer maps the P
/// hidden steps to F steps and a pointwise layer maps hidden width to C.
class Generator {
public:
    Generator() = default;
    Generator(const GeneratorConfig& config, Rng& rng);

    /// past[B, P, C], noise[B, P, C], bins: B*P time-of-day bins -> [B, F, C].
    nn::Var forward(const nn::Var& past, const nn::Var& noise, const std::vector<int>& bins,
                    const nn::Context& ctx);
    void collect(const std::string& prefix, nn::StateList& out);
    const GeneratorConfig& config() const noexcept { return config_; }

private:
    GeneratorConfig config_;
    nn::EmbeddingMlp time_embed_;
    std::vector<nn::TemporalBlock> blocks_;
    nn::Var time_w_;  // [F, P]
    nn::Var time_b_;  // [F]
    nn::Dense head_;
};

}  // namespace comets::gan

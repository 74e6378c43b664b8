#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/nn/layers.hpp"

namespace comets::gan {

struct CriticConfig {
    std::size_t past = 24;
    std::size_t future = 24;
    std::size_t channels = 5;
    std::vector<std::size_t> conv_channels{32, 64, 128, 256};
    std::size_t kernel = 5;
    std::size_t stride = 2;
    std::vector<std::size_t> linear{256, 128, 1};
    std::size_t time_embed_dim = 32;
    double alpha = 1.0;

    std::size_t pair_count() const noexcept { return channels * (channels - 1) / 2; }
    void validate() const;
    nlohmann::json to_json() const;
    static CriticConfig from_json(const nlohmann::json& j);
};

struct CriticOutput {
    nn::Var o;   // o1 + alpha * o2, [B]
    nn::Var o1;  // convolutional head, [B]
    nn::Var o2;  // correlation head, [B]
};

/// Two-head critic. Every weight matrix is spectrally normalised.
class Critic {
public:
    Critic() = default;
    Critic(const CriticConfig& config, Rng& rng);

    /// past[B, P, C], future[B, F, C], bins: B*(P+F) time-of-day bins.
    CriticOutput forward(const nn::Var& past, const nn::Var& future, const std::vector<int>& bins,
                         const nn::Context& ctx);
    /// Correlation head alone on future[B, F, C].
    nn::Var correlation_score(const nn::Var& future, const nn::Context& ctx);

    void collect(const std::string& prefix, nn::StateList& out);
    /// Raw weights of every spectrally normalised layer with their u-vectors.
    std::vector<std::pair<nn::Var*, std::vector<double>*>> normalized_weights();

    const CriticConfig& config() const noexcept { return config_; }
    CriticConfig& mutable_config() noexcept { return config_; }

private:
    CriticConfig config_;
    nn::EmbeddingMlp time_embed_;
    std::vector<nn::Conv1d> convs_;
    std::vector<nn::Dense> linears_;
    nn::Dense corr_head_;
};

}  // namespace comets::gan

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/gan/critic.hpp"
#include "comets/gan/generator.hpp"
#include "comets/nn/optim.hpp"
#include "comets/ts/segment.hpp"

namespace comets::gan {

struct GanConfig {
    GeneratorConfig generator;
    CriticConfig critic;
    nn::AdamConfig adam_g;
    nn::AdamConfig adam_d;

    /// Generator and critic with shared window sizes and channel count.
    static GanConfig make(std::size_t past, std::size_t future, std::size_t channels);
    void validate() const;
    nlohmann::json to_json() const;
    static GanConfig from_json(const nlohmann::json& j);
};

/// Generator, critic and their optimiser state. Optimisers hold pointers into
/// the networks, so a model is neither copied nor moved.
class GanModel {
public:
    GanModel(const GanConfig& config, std::uint64_t seed);
    GanModel(const GanModel&) = delete;
    GanModel& operator=(const GanModel&) = delete;

    Generator generator;
    Critic critic;
    nn::Adam opt_g;
    nn::Adam opt_d;

    const GanConfig& config() const noexcept { return config_; }
    /// Generator updates applied so far.
    std::size_t steps() const noexcept { return static_cast<std::size_t>(step_[0]); }
    void set_steps(std::size_t s) { step_[0] = static_cast<double>(s); }

    nn::StateList state();
    std::string encode();
    void save(const std::filesystem::path& path);
    static std::unique_ptr<GanModel> load(const std::filesystem::path& path);
    static std::unique_ptr<GanModel> decode(const std::string& bytes);

    /// Samples one future window per past window (Eval mode, fresh noise from rng).
    std::vector<Matrix> sample(const std::vector<Matrix>& pasts, const std::vector<std::vector<int>>& past_minutes,
                               Rng& rng);

private:
    GanConfig config_;
    std::vector<double> step_{0.0};
};

/// Stacks pairs into [B, P, C] / [B, F, C] tensors and B*(P+F) time bins.
struct GanBatch {
    nn::Tensor past;
    nn::Tensor future;
    std::vector<int> bins;
    std::vector<int> past_bins;
};
GanBatch make_batch(const std::vector<ts::SegmentPair>& pairs, const std::vector<std::size_t>& indices);

/// Time-of-day bins for a list of minutes since the open.
std::vector<int> minute_bins(const std::vector<int>& minutes);

/// Standard normal tensor.
nn::Tensor normal_tensor(const nn::Shape& shape, Rng& rng);

}  // namespace comets::gan

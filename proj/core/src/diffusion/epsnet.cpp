#include "comets/diffusion/epsnet.hpp"

#include <nlohmann/json.hpp>

#include "comets/error.hpp"

namespace comets::diffusion {

void EpsNetConfig::validate() const {
    if (window < 1 || channels < 1 || hidden < 1 || kernel < 1) {
        throw SpecificationError("noise network window, channels, hidden width and kernel must be >= 1");
    }
    if (dilations.empty()) throw SpecificationError("noise network needs at least one temporal block");
    if (step_embed_dim == 0 || step_embed_dim % 2) throw SpecificationError("step embedding dimension must be even");
}

nlohmann::json EpsNetConfig::to_json() const {
    return {{"window", window},       {"channels", channels},   {"hidden", hidden},
            {"kernel", kernel},       {"dilations", dilations}, {"step_embed_dim", step_embed_dim}};
}

EpsNetConfig EpsNetConfig::from_json(const nlohmann::json& j) {
    EpsNetConfig c;
    c.window = j.at("window");
    c.channels = j.at("channels");
    c.hidden = j.at("hidden");
    c.kernel = j.at("kernel");
    c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
    c.step_embed_dim = j.at("step_embed_dim");
    c.validate();
    return c;
}

EpsNet::EpsNet(const EpsNetConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    const std::size_t h = config_.hidden;
    step_embed_ = nn::EmbeddingMlp(config_.step_embed_dim, h, h, false, rng);
    input_ = nn::Conv1d(config_.channels, h, 1, 1, 1, nn::Padding::Causal, false, rng);
    for (std::size_t d : config_.dilations) {
        blocks_.emplace_back(h, h, config_.kernel, d, 0.0, rng, nn::Padding::Symmetric);
    }
    output_ = nn::Conv1d(h, config_.channels, 1, 1, 1, nn::Padding::Causal, false, rng);
}

nn::Var EpsNet::forward(const nn::Var& x, const std::vector<int>& steps, const nn::Context& ctx) {
    const std::size_t batch = x.shape().empty() ? 0 : x.shape()[0];
    const nn::Shape want{batch, config_.window, config_.channels};
    if (x.shape() != want) throw ShapeError("noise network input", nn::shape_str(want), nn::shape_str(x.shape()));
    if (steps.size() != batch) throw ShapeError("noise network steps", std::to_string(batch), std::to_string(steps.size()));
    const nn::Var emb = nn::reshape(step_embed_.forward(steps, batch, 1, ctx), {batch, config_.hidden});
    nn::Var h = input_.forward(x, ctx);
    for (auto& block : blocks_) h = block.forward(nn::add_over_time(h, emb), ctx);
    return output_.forward(h, ctx);
}

void EpsNet::collect(const std::string& prefix, nn::StateList& out) {
    step_embed_.collect(prefix + ".step_embed", out);
    input_.collect(prefix + ".input", out);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect(prefix + ".block" + std::to_string(i), out);
    output_.collect(prefix + ".output", out);
}

}  // namespace comets::diffusion

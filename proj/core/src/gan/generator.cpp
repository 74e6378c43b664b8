#include "comets/gan/generator.hpp"

#include <nlohmann/json.hpp>

#include "comets/error.hpp"

namespace comets::gan {

void GeneratorConfig::validate() const {
    if (past < 1) throw SpecificationError("generator past window must be >= 1");
    if (future < 2) throw SpecificationError("generator future window must be >= 2");
    if (channels < 1) throw SpecificationError("generator needs at least one channel");
    if (hidden < 1 || kernel < 1) throw SpecificationError("generator hidden width and kernel must be >= 1");
    if (dilations.empty()) throw SpecificationError("generator needs at least one temporal block");
    for (std::size_t i = 0; i < dilations.size(); ++i) {
        if (dilations[i] < 1 || (i > 0 && dilations[i] <= dilations[i - 1])) {
            throw SpecificationError("generator dilations must be positive and strictly increasing");
        }
    }
    if (time_embed_dim == 0 || time_embed_dim % 2) throw SpecificationError("time embedding dimension must be even");
    if (dropout < 0.0 || dropout >= 1.0) throw SpecificationError("dropout must be in [0, 1)");
    if (!bounded_channels.empty() && bounded_channels.size() != channels) {
        throw SpecificationError("bounded channel mask must have one entry per channel");
    }
}

nlohmann::json GeneratorConfig::to_json() const {
    return {{"past", past},
            {"future", future},
            {"channels", channels},
            {"hidden", hidden},
            {"kernel", kernel},
            {"dilations", dilations},
            {"time_embed_dim", time_embed_dim},
            {"dropout", dropout},
            {"bounded_channels", bounded_channels}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    c.past = j.at("past");
    c.future = j.at("future");
    c.channels = j.at("channels");
    c.hidden = j.at("hidden");
    c.kernel = j.at("kernel");
    c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
    c.time_embed_dim = j.at("time_embed_dim");
    c.dropout = j.at("dropout");
    c.bounded_channels = j.at("bounded_channels").get<std::vector<bool>>();
    c.validate();
    return c;
}

Generator::Generator(const GeneratorConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    const std::size_t c = config_.channels, h = config_.hidden;
    time_embed_ = nn::EmbeddingMlp(config_.time_embed_dim, h, c, false, rng);
    std::size_t in = 2 * c;
    for (std::size_t d : config_.dilations) {
        blocks_.emplace_back(in, h, config_.kernel, d, config_.dropout, rng);
        in = h + c;
    }
    time_w_ = nn::Var(nn::init_uniform({config_.future, config_.past}, config_.past, rng), true);
    time_b_ = nn::Var(nn::Tensor({config_.future}), true);
    head_ = nn::Dense(h, c, false, rng);
}

nn::Var Generator::forward(const nn::Var& past, const nn::Var& noise, const std::vector<int>& bins,
                           const nn::Context& ctx) {
    const std::size_t p = config_.past, c = config_.channels;
    if (past.shape().size() != 3 || past.shape()[1] != p || past.shape()[2] != c) {
        throw ShapeError("generator past", "[B, " + std::to_string(p) + ", " + std::to_string(c) + "]",
                         nn::shape_str(past.shape()));
    }
    const std::size_t batch = past.shape()[0];
    if (noise.shape() != past.shape()) throw ShapeError("generator noise", nn::shape_str(past.shape()),
                                                        nn::shape_str(noise.shape()));
    if (bins.size() != batch * p) {
        throw ShapeError("generator time bins", std::to_string(batch * p), std::to_string(bins.size()));
    }
    const nn::Var temb = time_embed_.forward(bins, batch, p, ctx);
    const nn::Var zt = nn::add(noise, temb);
    nn::Var h = past;
    for (auto& block : blocks_) h = block.forward(nn::concat({h, zt}, 2), ctx);
    nn::Var out = head_.forward(nn::time_linear(h, time_w_, time_b_), ctx);
    if (!config_.bounded_channels.empty()) out = nn::tanh_masked(out, config_.bounded_channels);
    return out;
}

void Generator::collect(const std::string& prefix, nn::StateList& out) {
    time_embed_.collect(prefix + ".time_embed", out);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect(prefix + ".block" + std::to_string(i), out);
    out.param(prefix + ".time_mix.weight", time_w_);
    out.param(prefix + ".time_mix.bias", time_b_);
    head_.collect(prefix + ".head", out);
}

}  // namespace comets::gan

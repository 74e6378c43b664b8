#include "comets/gan/critic.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/nn/spectral.hpp"

namespace comets::gan {
namespace {

constexpr std::size_t kWarmupChunk = 25;
constexpr std::size_t kWarmupMaxChunks = 80;

// Runs power iteration until the singular value estimate settles, so the very
// first normalised forward pass already has operator norm ~1.
void warm_up(nn::Var& w, std::vector<double>& u) {
    std::vector<double> v;
    double sigma = nn::power_iteration(w.value(), u, v, kWarmupChunk);
    for (std::size_t i = 1; i < kWarmupMaxChunks; ++i) {
        const double next = nn::power_iteration(w.value(), u, v, kWarmupChunk);
        const bool settled = std::abs(next - sigma) <= 1e-10 * next;
        sigma = next;
        if (settled) break;
    }
}

}  // namespace

void CriticConfig::validate() const {
    if (past < 1 || future < 2) throw SpecificationError("critic windows need past >= 1 and future >= 2");
    if (channels < 2) throw SpecificationError("critic needs at least two channels for the correlation head");
    if (conv_channels.empty() || linear.empty()) throw SpecificationError("critic stacks must be non-empty");
    if (linear.back() != 1) throw SpecificationError("critic linear stack must end in width 1");
    if (kernel < 1 || stride < 1) throw SpecificationError("critic kernel and stride must be >= 1");
    if (time_embed_dim == 0 || time_embed_dim % 2) throw SpecificationError("time embedding dimension must be even");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw SpecificationError("critic alpha must be in [0, 1]");
}

nlohmann::json CriticConfig::to_json() const {
    return {{"past", past},     {"future", future}, {"channels", channels}, {"conv_channels", conv_channels},
            {"kernel", kernel}, {"stride", stride}, {"linear", linear},     {"time_embed_dim", time_embed_dim},
            {"alpha", alpha}};
}

CriticConfig CriticConfig::from_json(const nlohmann::json& j) {
    CriticConfig c;
    c.past = j.at("past");
    c.future = j.at("future");
    c.channels = j.at("channels");
    c.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
    c.kernel = j.at("kernel");
    c.stride = j.at("stride");
    c.linear = j.at("linear").get<std::vector<std::size_t>>();
    c.time_embed_dim = j.at("time_embed_dim");
    c.alpha = j.at("alpha");
    c.validate();
    return c;
}

Critic::Critic(const CriticConfig& config, Rng& rng) : config_(config) {
    config_.validate();
    time_embed_ = nn::EmbeddingMlp(config_.time_embed_dim, config_.time_embed_dim, 1, true, rng);
    std::size_t in = config_.channels + 1;
    std::size_t length = config_.past + config_.future;
    for (std::size_t width : config_.conv_channels) {
        convs_.emplace_back(in, width, config_.kernel, 1, config_.stride, nn::Padding::Symmetric, true, rng);
        length = convs_.back().geometry.out_length(length);
        if (length == 0) throw SpecificationError("critic convolution stack is too deep for the window length");
        in = width;
    }
    in *= length;
    for (std::size_t width : config_.linear) {
        linears_.emplace_back(in, width, true, rng);
        in = width;
    }
    corr_head_ = nn::Dense(config_.pair_count(), 1, true, rng);
    for (auto [w, u] : normalized_weights()) warm_up(*w, *u);
}

nn::Var Critic::correlation_score(const nn::Var& future, const nn::Context& ctx) {
    const std::size_t batch = future.shape().at(0);
    return nn::reshape(corr_head_.forward(nn::pairwise_correlation(future), ctx), {batch});
}

CriticOutput Critic::forward(const nn::Var& past, const nn::Var& future, const std::vector<int>& bins,
                             const nn::Context& ctx) {
    const std::size_t p = config_.past, f = config_.future, c = config_.channels;
    const std::size_t batch = past.shape().empty() ? 0 : past.shape()[0];
    if (past.shape() != nn::Shape{batch, p, c}) {
        throw ShapeError("critic past", nn::shape_str({batch, p, c}), nn::shape_str(past.shape()));
    }
    if (future.shape() != nn::Shape{batch, f, c}) {
        throw ShapeError("critic future", nn::shape_str({batch, f, c}), nn::shape_str(future.shape()));
    }
    if (bins.size() != batch * (p + f)) {
        throw ShapeError("critic time bins", std::to_string(batch * (p + f)), std::to_string(bins.size()));
    }
    const nn::Var temb = time_embed_.forward(bins, batch, p + f, ctx);
    nn::Var h = nn::concat({nn::concat({past, future}, 1), temb}, 2);
    for (auto& conv : convs_) h = nn::leaky_relu(conv.forward(h, ctx), nn::kLeakySlope);
    h = nn::reshape(h, {batch, h.size() / batch});
    for (std::size_t i = 0; i < linears_.size(); ++i) {
        h = linears_[i].forward(h, ctx);
        if (i + 1 < linears_.size()) h = nn::leaky_relu(h, nn::kLeakySlope);
    }
    CriticOutput out;
    out.o1 = nn::reshape(h, {batch});
    out.o2 = correlation_score(future, ctx);
    out.o = nn::add(out.o1, nn::scale(out.o2, config_.alpha));
    return out;
}

void Critic::collect(const std::string& prefix, nn::StateList& out) {
    time_embed_.collect(prefix + ".time_embed", out);
    for (std::size_t i = 0; i < convs_.size(); ++i) convs_[i].collect(prefix + ".conv" + std::to_string(i), out);
    for (std::size_t i = 0; i < linears_.size(); ++i) linears_[i].collect(prefix + ".linear" + std::to_string(i), out);
    corr_head_.collect(prefix + ".corr_head", out);
}

std::vector<std::pair<nn::Var*, std::vector<double>*>> Critic::normalized_weights() {
    std::vector<std::pair<nn::Var*, std::vector<double>*>> out;
    out.emplace_back(&time_embed_.l1.weight, &time_embed_.l1.u);
    out.emplace_back(&time_embed_.l2.weight, &time_embed_.l2.u);
    for (auto& c : convs_) out.emplace_back(&c.weight, &c.u);
    for (auto& l : linears_) out.emplace_back(&l.weight, &l.u);
    out.emplace_back(&corr_head_.weight, &corr_head_.u);
    return out;
}

}  // namespace comets::gan

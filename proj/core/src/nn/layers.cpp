#include "comets/nn/layers.hpp"

#include <cmath>

#include "comets/error.hpp"
#include "comets/nn/spectral.hpp"

namespace comets::nn {
namespace {

std::vector<double> random_unit(std::size_t n, Rng& rng) {
    std::vector<double> u(n);
    double ss = 0.0;
    for (auto& x : u) {
        x = standard_normal(rng);
        ss += x * x;
    }
    const double norm = std::sqrt(ss);
    for (auto& x : u) x = norm > 0 ? x / norm : 1.0 / std::sqrt(static_cast<double>(n));
    return u;
}

Var normalized(Var& w, std::vector<double>& u, const Context& ctx) {
    return spectral_normalize(w, u, ctx.power_iterations, ctx.training());
}

}  // namespace

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
    const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
    Tensor t(std::move(shape));
    for (auto& x : t.storage()) x = (2.0 * uniform01(rng) - 1.0) * bound;
    return t;
}

Dense::Dense(std::size_t in, std::size_t out, bool sn, Rng& rng)
    : weight(init_uniform({in, out}, in, rng), true), bias(Tensor({out}), true), spectral(sn) {
    if (spectral) u = random_unit(in, rng);
}

Var Dense::effective_weight(const Context& ctx) {
    return spectral ? normalized(weight, u, ctx) : weight;
}

Var Dense::forward(const Var& x, const Context& ctx) {
    const Var w = effective_weight(ctx);
    return linear(x, w, &bias);
}

void Dense::collect(const std::string& prefix, StateList& out) {
    out.param(prefix + ".weight", weight);
    out.param(prefix + ".bias", bias);
    if (spectral) out.buffer(prefix + ".u", u);
}

Conv1d::Conv1d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t dilation, std::size_t stride,
               Padding padding, bool sn, Rng& rng)
    : weight(init_uniform({kernel * in, out}, kernel * in, rng), true), bias(Tensor({out}), true), spectral(sn) {
    if (kernel < 1 || dilation < 1 || stride < 1) {
        throw SpecificationError("convolution kernel, dilation and stride must be >= 1");
    }
    geometry.kernel = kernel;
    geometry.dilation = dilation;
    geometry.stride = stride;
    const std::size_t span = dilation * (kernel - 1);
    if (padding == Padding::Causal) {
        geometry.pad_left = span;
    } else {
        geometry.pad_left = span / 2;
        geometry.pad_right = span - span / 2;
    }
    if (spectral) u = random_unit(kernel * in, rng);
}

Var Conv1d::effective_weight(const Context& ctx) {
    return spectral ? normalized(weight, u, ctx) : weight;
}

Var Conv1d::forward(const Var& x, const Context& ctx) {
    const Var w = effective_weight(ctx);
    return conv1d(x, w, bias, geometry);
}

void Conv1d::collect(const std::string& prefix, StateList& out) {
    out.param(prefix + ".weight", weight);
    out.param(prefix + ".bias", bias);
    if (spectral) out.buffer(prefix + ".u", u);
}

TemporalBlock::TemporalBlock(std::size_t in, std::size_t out, std::size_t kernel, std::size_t dilation,
                             double dropout, Rng& rng, Padding padding)
    : conv1(in, out, kernel, dilation, 1, padding, false, rng),
      conv2(out, out, kernel, dilation, 1, padding, false, rng),
      has_skip(in != out),
      dropout_p(dropout) {
    if (dropout < 0.0 || dropout >= 1.0) throw SpecificationError("dropout probability must be in [0, 1)");
    if (has_skip) skip = Conv1d(in, out, 1, 1, 1, Padding::Causal, false, rng);
}

Var TemporalBlock::forward(const Var& x, const Context& ctx) {
    Var h = apply_dropout(leaky_relu(conv1.forward(x, ctx), kLeakySlope), dropout_p, ctx);
    h = conv2.forward(h, ctx);
    const Var res = has_skip ? skip.forward(x, ctx) : x;
    return apply_dropout(leaky_relu(add(h, res), kLeakySlope), dropout_p, ctx);
}

void TemporalBlock::collect(const std::string& prefix, StateList& out) {
    conv1.collect(prefix + ".conv1", out);
    conv2.collect(prefix + ".conv2", out);
    if (has_skip) skip.collect(prefix + ".skip", out);
}

Var apply_dropout(const Var& x, double p, const Context& ctx) {
    if (!ctx.training() || p <= 0.0) return x;
    if (ctx.rng == nullptr) throw SpecificationError("dropout in training mode needs an rng");
    return dropout(x, p, *ctx.rng);
}

std::vector<double> sinusoidal_embedding(double position, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) throw SpecificationError("sinusoidal embedding dimension must be even");
    std::vector<double> e(dim);
    for (std::size_t i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
        e[2 * i] = std::sin(position * freq);
        e[2 * i + 1] = std::cos(position * freq);
    }
    return e;
}

Tensor sinusoidal_table(std::span<const int> positions, std::size_t dim) {
    Tensor t({positions.size(), dim});
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] < 0) throw SpecificationError("embedding position must be >= 0");
        const auto e = sinusoidal_embedding(positions[i], dim);
        std::copy(e.begin(), e.end(), t.data() + i * dim);
    }
    return t;
}

EmbeddingMlp::EmbeddingMlp(std::size_t d, std::size_t hidden, std::size_t out, bool spectral, Rng& rng)
    : dim(d), l1(d, hidden, spectral, rng), l2(hidden, out, spectral, rng) {
    if (d == 0 || d % 2 != 0) throw SpecificationError("sinusoidal embedding dimension must be even");
}

Var EmbeddingMlp::forward(std::span<const int> positions, std::size_t rows, std::size_t cols,
                          const Context& ctx) {
    if (positions.size() != rows * cols) {
        throw ShapeError("embedding positions", std::to_string(rows * cols), std::to_string(positions.size()));
    }
    Tensor table = sinusoidal_table(positions, dim);
    const Var e(Tensor({rows, cols, dim}, std::move(table.storage())));
    return l2.forward(silu(l1.forward(e, ctx)), ctx);
}

void EmbeddingMlp::collect(const std::string& prefix, StateList& out) {
    l1.collect(prefix + ".l1", out);
    l2.collect(prefix + ".l2", out);
}

}  // namespace comets::nn

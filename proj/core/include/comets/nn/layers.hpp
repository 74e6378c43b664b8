#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "comets/nn/ops.hpp"
#include "comets/rng.hpp"

namespace comets::nn {

enum class Mode { Train, Eval };

/// Per-call forward settings. Dropout draws from `rng` in Train mode only;
/// spectral-norm u-vectors are persisted in Train mode only.
struct Context {
    Mode mode = Mode::Eval;
    Rng* rng = nullptr;
    std::size_t power_iterations = 1;

    bool training() const noexcept { return mode == Mode::Train; }
};

struct ParamRef {
    std::string name;
    Var* var;
};

/// Non-trainable state stored alongside parameters (u-vectors, optimizer moments).
struct BufferRef {
    std::string name;
    std::vector<double>* data;
};

struct StateList {
    std::vector<ParamRef> params;
    std::vector<BufferRef> buffers;

    void param(const std::string& name, Var& v) { params.push_back({name, &v}); }
    void buffer(const std::string& name, std::vector<double>& d) { buffers.push_back({name, &d}); }
};

inline constexpr double kLeakySlope = 0.2;

/// Fan-in scaled uniform initialisation with the leaky-ReLU gain.
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

class Dense {
public:
    Dense() = default;
    Dense(std::size_t in, std::size_t out, bool spectral, Rng& rng);

    /// x[..., in] -> [..., out]
    Var forward(const Var& x, const Context& ctx);
    /// The weight actually applied (normalised when spectral).
    Var effective_weight(const Context& ctx);
    void collect(const std::string& prefix, StateList& out);

    std::size_t in() const { return weight.shape()[0]; }
    std::size_t out() const { return weight.shape()[1]; }

    Var weight;
    Var bias;
    bool spectral = false;
    std::vector<double> u;
};

enum class Padding { Causal, Symmetric };

class Conv1d {
public:
    Conv1d() = default;
    Conv1d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t dilation, std::size_t stride,
           Padding padding, bool spectral, Rng& rng);

    /// x[B, L, in] -> [B, L', out]; causal padding keeps L' = L for stride 1.
    Var forward(const Var& x, const Context& ctx);
    Var effective_weight(const Context& ctx);
    void collect(const std::string& prefix, StateList& out);

    ConvGeometry geometry;
    Var weight;  // [kernel * in, out]
    Var bias;
    bool spectral = false;
    std::vector<double> u;
};

/// Dilated residual block: two convolutions with leaky-ReLU and dropout, plus a
/// 1x1 projection on the skip path when widths differ. Causal by default.
class TemporalBlock {
public:
    TemporalBlock() = default;
    TemporalBlock(std::size_t in, std::size_t out, std::size_t kernel, std::size_t dilation, double dropout,
                  Rng& rng, Padding padding = Padding::Causal);

    Var forward(const Var& x, const Context& ctx);
    void collect(const std::string& prefix, StateList& out);

    Conv1d conv1;
    Conv1d conv2;
    Conv1d skip;
    bool has_skip = false;
    double dropout_p = 0.1;
};

/// Dropout in Train mode, identity in Eval mode.
Var apply_dropout(const Var& x, double p, const Context& ctx);

/// Interleaved sin/cos encoding: e[2i] = sin(pos / 10000^(2i/dim)), e[2i+1] = cos(...).
std::vector<double> sinusoidal_embedding(double position, std::size_t dim);
/// Encodings of every position as a constant [positions.size(), dim] tensor.
Tensor sinusoidal_table(std::span<const int> positions, std::size_t dim);

/// Sinusoidal encoding followed by Dense -> SiLU -> Dense.
class EmbeddingMlp {
public:
    EmbeddingMlp() = default;
    EmbeddingMlp(std::size_t dim, std::size_t hidden, std::size_t out, bool spectral, Rng& rng);

    /// positions holds rows*cols entries; returns [rows, cols, out].
    Var forward(std::span<const int> positions, std::size_t rows, std::size_t cols, const Context& ctx);
    void collect(const std::string& prefix, StateList& out);

    std::size_t dim = 0;
    Dense l1;
    Dense l2;
};

}  // namespace comets::nn

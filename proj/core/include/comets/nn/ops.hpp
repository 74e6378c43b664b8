#pragma once

#include <span>
#include <vector>

#include "comets/nn/autograd.hpp"
#include "comets/rng.hpp"

namespace comets::nn {

// Elementwise arithmetic (identical shapes).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);

// Activations.
Var leaky_relu(const Var& x, double slope);
Var silu(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
/// tanh applied only to last-axis entries whose mask is true.
Var tanh_masked(const Var& x, const std::vector<bool>& mask);

/// Inverted dropout with keep-probability 1-p. Identity when p == 0.
Var dropout(const Var& x, double p, Rng& rng);

/// x[..., K] * W[K, N] (+ b[N]).
Var linear(const Var& x, const Var& w, const Var* b = nullptr);

struct ConvGeometry {
    std::size_t kernel = 1;
    std::size_t dilation = 1;
    std::size_t stride = 1;
    std::size_t pad_left = 0;
    std::size_t pad_right = 0;
    std::size_t out_length(std::size_t length) const;
};

/// x[B, L, Cin] with weight [K*Cin, Cout] (row k*Cin + c) and bias [Cout].
Var conv1d(const Var& x, const Var& w, const Var& b, const ConvGeometry& geo);

/// Mixes the time axis: out[b, f, h] = sum_p W[f, p] x[b, p, h] + bias[f].
Var time_linear(const Var& x, const Var& w, const Var& b);

/// Concatenation along `axis` (all other dimensions equal).
Var concat(const std::vector<Var>& parts, std::size_t axis);
/// Slice [start, start+len) along `axis`.
Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t len);
Var reshape(const Var& x, Shape shape);

/// x[B, L, H] + e[B, H] broadcast over L.
Var add_over_time(const Var& x, const Var& e);

/// Pearson coefficients of every channel pair (i < j, lexicographic) of x[B, F, C]
/// -> [B, C(C-1)/2]. Pairs involving a constant channel are 0 with zero gradient.
Var pairwise_correlation(const Var& x);

Var sum(const Var& x);
Var mean(const Var& x);
/// Mean over all but the first axis: [B, ...] -> [B].
Var mean_per_sample(const Var& x);
Var mse(const Var& a, const Var& b);
/// Mean binary cross-entropy of logits[B] (any shape with B elements) vs labels in {0, 1}.
Var bce_with_logits(const Var& logits, std::span<const double> labels);

}  // namespace comets::nn

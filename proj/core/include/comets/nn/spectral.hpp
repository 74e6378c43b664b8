#pragma once

#include <cstddef>
#include <vector>

#include "comets/nn/autograd.hpp"

namespace comets::nn {

/// Power-iteration estimate of the top singular value of W[K, N]. `u` (length K)
/// is the running left singular vector; it is refined in place.
double power_iteration(const Tensor& w, std::vector<double>& u, std::vector<double>& v,
                       std::size_t iterations);

/// W / sigma(W). The gradient treats the singular vectors as constants:
/// dW = (G - <G, W/sigma> u v^T) / sigma. When `persist` is false the refined
/// u is discarded so the call leaves `u` untouched.
Var spectral_normalize(const Var& w, std::vector<double>& u, std::size_t iterations, bool persist);

/// Largest singular value by SVD (reference for checks and reports).
double operator_norm(const Tensor& w);

}  // namespace comets::nn

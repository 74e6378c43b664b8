#pragma once

#include <utility>
#include <vector>

#include "comets/matrix.hpp"

namespace comets::gan {

/// Unordered channel pairs (i < j) in lexicographic order.
std::vector<std::pair<std::size_t, std::size_t>> channel_pairs(std::size_t channels);

/// Pearson coefficient of every channel pair of x[F, C] (F >= 2), in
/// channel_pairs() order. Constant channels give 0.
std::vector<double> pairwise_correlation_features(const Matrix& x);

}  // namespace comets::gan

#include "comets/gan/correlation.hpp"

#include "comets/error.hpp"
#include "comets/nn/ops.hpp"

namespace comets::gan {

std::vector<std::pair<std::size_t, std::size_t>> channel_pairs(std::size_t channels) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < channels; ++i)
        for (std::size_t j = i + 1; j < channels; ++j) out.emplace_back(i, j);
    return out;
}

std::vector<double> pairwise_correlation_features(const Matrix& x) {
    if (x.rows() < 2) throw ShapeError("pairwise_correlation_features", "[F >= 2, C]",
                                       "[" + std::to_string(x.rows()) + ", " + std::to_string(x.cols()) + "]");
    const nn::Var v(nn::Tensor({1, x.rows(), x.cols()}, x.data()));
    return nn::pairwise_correlation(v).value().storage();
}

}  // namespace comets::gan

#include "comets/gan/losses.hpp"

#include "comets/error.hpp"
#include "comets/nn/ops.hpp"

namespace comets::gan {
namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

}  // namespace

WganLosses wgan_losses(std::span<const double> real_scores, std::span<const double> fake_scores) {
    if (real_scores.empty() || fake_scores.empty()) throw SpecificationError("critic score batch is empty");
    if (real_scores.size() != fake_scores.size()) {
        throw ShapeError("wgan_losses", std::to_string(real_scores.size()) + " fake scores",
                         std::to_string(fake_scores.size()));
    }
    const double fake = mean_of(fake_scores);
    return {fake - mean_of(real_scores), -fake};
}

nn::Var critic_loss(const nn::Var& real_scores, const nn::Var& fake_scores) {
    if (real_scores.size() == 0) throw SpecificationError("critic score batch is empty");
    return nn::sub(nn::mean(fake_scores), nn::mean(real_scores));
}

nn::Var generator_loss(const nn::Var& fake_scores) {
    if (fake_scores.size() == 0) throw SpecificationError("critic score batch is empty");
    return nn::scale(nn::mean(fake_scores), -1.0);
}

}  // namespace comets::gan

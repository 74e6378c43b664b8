#pragma once

#include <span>

#include "comets/nn/autograd.hpp"

namespace comets::gan {

struct WganLosses {
    double loss_d = 0.0;
    double loss_g = 0.0;
};

/// loss_D = mean D(fake) - mean D(real); loss_G = -mean D(fake).
WganLosses wgan_losses(std::span<const double> real_scores, std::span<const double> fake_scores);

/// Differentiable forms over score vectors [B].
nn::Var critic_loss(const nn::Var& real_scores, const nn::Var& fake_scores);
nn::Var generator_loss(const nn::Var& fake_scores);

}  // namespace comets::gan

#include "comets/nn/optim.hpp"

#include <cmath>

#include "comets/error.hpp"

namespace comets::nn {

Adam::Adam(std::vector<ParamRef> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
        m_.emplace_back(p.var->size(), 0.0);
        v_.emplace_back(p.var->size(), 0.0);
    }
}

void Adam::step(std::size_t step_index) {
    for (const auto& p : params_) {
        for (double g : p.var->grad()) {
            if (!std::isfinite(g)) throw NumericalError(step_index, "non-finite gradient in " + p.name);
        }
    }
    t_[0] += 1.0;
    const double t = t_[0];
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        auto& value = params_[k].var->mutable_value().storage();
        const auto& grad = params_[k].var->grad();
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad.empty() ? 0.0 : grad[i];
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            value[i] -= config_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.var->zero_grad();
}

void Adam::collect(const std::string& prefix, StateList& out) {
    for (std::size_t k = 0; k < params_.size(); ++k) {
        out.buffer(prefix + ".m." + params_[k].name, m_[k]);
        out.buffer(prefix + ".v." + params_[k].name, v_[k]);
    }
    out.buffer(prefix + ".t", t_);
}

}  // namespace comets::nn

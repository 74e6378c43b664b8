#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "comets/nn/layers.hpp"

namespace comets::nn {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
};

/// Adam with bias correction over a fixed parameter list. Parameters without
/// an accumulated gradient are treated as having gradient zero.
class Adam {
public:
    Adam() = default;
    Adam(std::vector<ParamRef> params, AdamConfig config);

    /// Applies one update. A non-finite gradient raises NumericalError(step)
    /// before any parameter is modified.
    void step(std::size_t step_index);
    void zero_grad();

    /// Moments and the step counter, for checkpoints.
    void collect(const std::string& prefix, StateList& out);

    const AdamConfig& config() const noexcept { return config_; }
    std::size_t steps_taken() const noexcept { return static_cast<std::size_t>(t_[0]); }

private:
    std::vector<ParamRef> params_;
    AdamConfig config_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::vector<double> t_{0.0};
};

}  // namespace comets::nn

#include "comets/diffusion/schedule.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"

namespace comets::diffusion {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
    if (betas_.empty()) throw SpecificationError("noise schedule needs at least one step");
    for (double b : betas_) {
        if (!(b >= 0.0 && b < 1.0)) throw SpecificationError("noise schedule betas must lie in [0, 1)");
        alpha_bars_.push_back(alpha_bars_.back() * (1.0 - b));
    }
}

NoiseSchedule NoiseSchedule::linear(std::size_t steps, double start, double end) {
    if (steps < 1) throw SpecificationError("noise schedule needs at least one step");
    std::vector<double> b(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
        b[i] = start + (end - start) * frac;
    }
    return NoiseSchedule(std::move(b));
}

NoiseSchedule NoiseSchedule::scaled_linear(std::size_t steps) {
    if (steps < 1) throw SpecificationError("noise schedule needs at least one step");
    const double t = static_cast<double>(steps);
    return linear(steps, std::min(0.1 / t, 0.5), std::min(20.0 / t, 0.999));
}

nlohmann::json NoiseSchedule::to_json() const { return {{"betas", betas_}}; }

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
    return NoiseSchedule(j.at("betas").get<std::vector<double>>());
}

NoiseSchedule default_schedule(std::size_t steps) { return NoiseSchedule::scaled_linear(steps); }

NoisedSample forward_sample(const Matrix& x0, std::size_t t, const NoiseSchedule& schedule, Rng& rng) {
    if (t < 1 || t > schedule.steps()) {
        throw SpecificationError("diffusion step " + std::to_string(t) + " outside [1, " +
                                 std::to_string(schedule.steps()) + "]");
    }
    const double a = std::sqrt(schedule.alpha_bar(t)), s = std::sqrt(1.0 - schedule.alpha_bar(t));
    NoisedSample out{Matrix(x0.rows(), x0.cols()), Matrix(x0.rows(), x0.cols())};
    for (std::size_t i = 0; i < x0.data().size(); ++i) {
        const double e = standard_normal(rng);
        out.eps.data()[i] = e;
        out.x_t.data()[i] = a * x0.data()[i] + s * e;
    }
    return out;
}

}  // namespace comets::diffusion

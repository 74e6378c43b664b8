#include "comets/generation/rollout.hpp"

#include <cmath>

#include "comets/error.hpp"

namespace comets::generation {

RolloutResult rollout(gan::GanModel& model, const RolloutConfig& config) {
    const auto& gc = model.config().generator;
    const std::size_t p = gc.past, f = gc.future, c = gc.channels;
    if (config.total_steps < 1) throw SpecificationError("rollout needs total_steps >= 1");
    if (config.start_window.rows() != p || config.start_window.cols() != c) {
        throw ShapeError("rollout start window", nn::shape_str({p, c}),
                         nn::shape_str({config.start_window.rows(), config.start_window.cols()}));
    }
    if (config.perturbation) config.perturbation->validate(c, config.total_steps);
    if (config.start_minute < 0) throw SpecificationError("start minute must be >= 0");

    Rng rng = make_rng(config.seed, "sample");
    Matrix history = config.start_window;
    RolloutResult out;
    out.values = Matrix(0, c);
    auto minute_at = [&](std::size_t row) {  // row index into history
        return static_cast<int>((static_cast<std::size_t>(config.start_minute) + row) % ts::kSessionMinutes);
    };
    while (out.values.rows() < config.total_steps) {
        const std::size_t produced = out.values.rows();
        const std::size_t h = history.rows();
        std::vector<int> minutes(p);
        for (std::size_t i = 0; i < p; ++i) minutes[i] = minute_at(h - p + i);
        Matrix block = model.sample({history.slice_rows(h - p, h)}, {minutes}, rng).front();
        ++out.model_calls;
        for (std::size_t r = 0; r < f; ++r)
            for (std::size_t k = 0; k < c; ++k)
                if (!std::isfinite(block(r, k))) {
                    throw NumericalError(produced + r, "rollout produced a non-finite value");
                }
        if (const auto& pert = config.perturbation) {
            const std::size_t lo = std::max(pert->start, produced), hi = std::min(pert->end, produced + f);
            if (lo < hi) block = apply_perturbation(block, pert->channels, pert->intensity, lo - produced, hi - produced);
        }
        history.append_rows(block);
        out.values.append_rows(block);
    }
    out.values = out.values.slice_rows(0, config.total_steps);
    out.minutes.resize(config.total_steps);
    for (std::size_t r = 0; r < config.total_steps; ++r) out.minutes[r] = minute_at(p + r);
    return out;
}

}  // namespace comets::generation

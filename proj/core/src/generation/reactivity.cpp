#include "comets/generation/reactivity.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/eval/metrics.hpp"

namespace comets::generation {
namespace {

struct Accumulator {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }
    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return values.empty() ? 0.0 : s / static_cast<double>(values.size());
    }
    double stderr_of_mean() const {
        if (values.size() < 2) return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
    }
};

std::vector<double> column_range(const Matrix& m, std::size_t c, std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    for (std::size_t r = lo; r < hi; ++r) out.push_back(m(r, c));
    return out;
}

}  // namespace

nlohmann::json ReactivityEntry::to_json() const {
    return {{"pair", pair},
            {"curve", curve},
            {"intensity", intensity},
            {"mean_corr", mean_corr},
            {"stderr", stderr_corr},
            {"n_seeds", n_seeds}};
}

std::vector<ReactivityEntry> reactivity_experiment(gan::GanModel& model, const ReactivityConfig& config) {
    const std::size_t c = model.config().generator.channels, f = model.config().generator.future;
    if (config.seeds.empty()) throw SpecificationError("reactivity experiment needs at least one seed");
    if (config.intensities.empty()) throw SpecificationError("reactivity experiment needs at least one intensity");
    if (config.target >= c) {
        throw SpecificationError("target channel " + std::to_string(config.target) + " is not in the layout");
    }
    std::vector<std::size_t> others = config.others;
    if (others.empty()) {
        for (std::size_t k = 0; k < c; ++k)
            if (k != config.target) others.push_back(k);
    }
    for (std::size_t o : others) {
        if (o >= c || o == config.target) throw SpecificationError("invalid comparison channel " + std::to_string(o));
    }
    const std::size_t total = config.base.total_steps;
    const std::size_t lo = config.window_start;
    const std::size_t hi = std::min(total, config.window_end + config.response_horizon.value_or(f));
    if (hi - lo < 2 || lo >= config.window_end) throw SpecificationError("reactivity window is too short");

    auto name = [&](std::size_t k) {
        return k < config.channel_names.size() ? config.channel_names[k] : "ch" + std::to_string(k);
    };

    // Unperturbed rollouts do not depend on the intensity.
    std::vector<Matrix> plain;
    for (auto seed : config.seeds) {
        RolloutConfig rc = config.base;
        rc.seed = seed;
        rc.perturbation.reset();
        plain.push_back(rollout(model, rc).values);
    }

    std::vector<ReactivityEntry> out;
    for (double a : config.intensities) {
        std::vector<Accumulator> synth(others.size()), frozen(others.size()), reactive(others.size());
        for (std::size_t s = 0; s < config.seeds.size(); ++s) {
            RolloutConfig rc = config.base;
            rc.seed = config.seeds[s];
            rc.perturbation = PerturbationSpec{{config.target}, config.window_start, config.window_end, a};
            const Matrix pert = rollout(model, rc).values;
            const auto target_plain = column_range(plain[s], config.target, lo, hi);
            const auto target_pert = column_range(pert, config.target, lo, hi);
            for (std::size_t k = 0; k < others.size(); ++k) {
                const auto other_plain = column_range(plain[s], others[k], lo, hi);
                const auto other_pert = column_range(pert, others[k], lo, hi);
                synth[k].add(eval::pearson(target_plain, other_plain));
                frozen[k].add(eval::pearson(target_pert, other_plain));
                reactive[k].add(eval::pearson(target_pert, other_pert));
            }
        }
        for (std::size_t k = 0; k < others.size(); ++k) {
            const std::string pair = name(config.target) + "~" + name(others[k]);
            const std::size_t n = config.seeds.size();
            if (config.real) {
                const auto& r = *config.real;
                const double rho = eval::pearson(r.column(config.target), r.column(others[k]));
                out.push_back({pair, "real_real", a, rho, 0.0, 1});
            }
            out.push_back({pair, "synth_synth", a, synth[k].mean(), synth[k].stderr_of_mean(), n});
            out.push_back({pair, "perturbed_vs_unperturbed", a, frozen[k].mean(), frozen[k].stderr_of_mean(), n});
            out.push_back({pair, "perturbed_vs_reactive", a, reactive[k].mean(), reactive[k].stderr_of_mean(), n});
        }
    }
    return out;
}

nlohmann::json reactivity_report_json(const std::vector<ReactivityEntry>& entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries) arr.push_back(e.to_json());
    return arr;
}

}  // namespace comets::generation

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/gan/model.hpp"

namespace comets::gan {

struct GanTrainConfig {
    std::size_t batch_size = 64;
    std::size_t critic_steps = 5;
    std::size_t generator_steps = 1000;
    std::size_t eval_every = 50;
    double holdout_fraction = 0.1;
    /// Upper bound on held-out pairs used per evaluation (evenly spaced).
    std::size_t eval_windows = 256;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainLogEntry {
    std::size_t step = 0;
    double loss_d = 0.0;
    double loss_g = 0.0;
    double mean_ccd = 0.0;
    double wall_ms = 0.0;

    nlohmann::json to_json() const;
};

struct DatasetSplit {
    std::vector<ts::SegmentPair> train;
    std::vector<ts::SegmentPair> holdout;
};

/// The final `fraction` of pairs (at least one) is held out; order is kept.
DatasetSplit split_holdout(std::vector<ts::SegmentPair> pairs, double fraction);

/// Mean over channel pairs of (rho_real - rho_generated)^2, where each rho is
/// the Pearson coefficient over the concatenated real or generated futures.
double held_out_ccd(GanModel& model, const std::vector<ts::SegmentPair>& holdout, std::size_t max_windows,
                    std::uint64_t seed);

/// Critic/generator alternation on `dataset` (split internally). Calls `on_log`
/// at step 0, every eval_every generator steps, and at the end.
std::vector<TrainLogEntry> train_gan(GanModel& model, const std::vector<ts::SegmentPair>& dataset,
                                     const GanTrainConfig& config,
                                     const std::function<void(const TrainLogEntry&)>& on_log = {});

}  // namespace comets::gan

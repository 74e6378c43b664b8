#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/diffusion/epsnet.hpp"
#include "comets/diffusion/schedule.hpp"
#include "comets/nn/optim.hpp"

namespace comets::diffusion {

/// Noise network, schedule and optimiser state. Not copyable or movable.
class DiffusionModel {
public:
    DiffusionModel(const EpsNetConfig& config, NoiseSchedule schedule, nn::AdamConfig adam, std::uint64_t seed);
    DiffusionModel(const DiffusionModel&) = delete;
    DiffusionModel& operator=(const DiffusionModel&) = delete;

    EpsNet net;
    nn::Adam opt;

    const EpsNetConfig& config() const noexcept { return net.config(); }
    const NoiseSchedule& schedule() const noexcept { return schedule_; }
    std::size_t steps() const noexcept { return static_cast<std::size_t>(step_[0]); }
    void set_steps(std::size_t s) { step_[0] = static_cast<double>(s); }

    nn::StateList state();
    std::string encode();
    void save(const std::filesystem::path& path);
    static std::unique_ptr<DiffusionModel> load(const std::filesystem::path& path);
    static std::unique_ptr<DiffusionModel> decode(const std::string& bytes);

private:
    NoiseSchedule schedule_;
    nn::AdamConfig adam_;
    std::vector<double> step_{0.0};
};

struct DiffusionTrainConfig {
    std::size_t batch_size = 64;
    std::size_t train_steps = 2000;
    std::size_t log_every = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DiffusionLogEntry {
    std::size_t step = 0;
    double loss = 0.0;
    double wall_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Minimises E||eps - eps_phi(x_t, t)||^2 with t uniform on 1..T.
std::vector<DiffusionLogEntry> train_diffusion(DiffusionModel& model, const std::vector<Matrix>& windows,
                                               const DiffusionTrainConfig& config,
                                               const std::function<void(const DiffusionLogEntry&)>& on_log = {});

}  // namespace comets::diffusion

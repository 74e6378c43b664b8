#include "comets/diffusion/train.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/io.hpp"
#include "comets/nn/checkpoint.hpp"

namespace comets::diffusion {
namespace {

std::vector<nn::ParamRef> params_of(EpsNet& net) {
    nn::StateList s;
    net.collect("eps", s);
    return s.params;
}

nlohmann::json adam_json(const nn::AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

}  // namespace

DiffusionModel::DiffusionModel(const EpsNetConfig& config, NoiseSchedule schedule, nn::AdamConfig adam,
                               std::uint64_t seed)
    : schedule_(std::move(schedule)), adam_(adam) {
    Rng rng = make_rng(seed, "init");
    net = EpsNet(config, rng);
    opt = nn::Adam(params_of(net), adam_);
}

nn::StateList DiffusionModel::state() {
    nn::StateList s;
    net.collect("eps", s);
    opt.collect("adam", s);
    s.buffer("steps", step_);
    return s;
}

std::string DiffusionModel::encode() {
    const nlohmann::json cfg = {{"kind", "diffusion"},
                                {"model", config().to_json()},
                                {"schedule", schedule_.to_json()},
                                {"adam", adam_json(adam_)}};
    return nn::encode_checkpoint(state(), cfg);
}

void DiffusionModel::save(const std::filesystem::path& path) { write_file_atomic(path, encode()); }

std::unique_ptr<DiffusionModel> DiffusionModel::decode(const std::string& bytes) {
    const auto cfg = nn::decode_checkpoint_config(bytes);
    if (cfg.value("kind", "") != "diffusion") throw CheckpointError("checkpoint does not hold a diffusion model");
    std::unique_ptr<DiffusionModel> model;
    try {
        const auto& a = cfg.at("adam");
        model = std::make_unique<DiffusionModel>(EpsNetConfig::from_json(cfg.at("model")),
                                                 NoiseSchedule::from_json(cfg.at("schedule")),
                                                 nn::AdamConfig{a.at("lr"), a.at("beta1"), a.at("beta2"), a.at("eps")},
                                                 0);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("invalid diffusion config in checkpoint: ") + e.what());
    }
    auto s = model->state();
    nn::decode_checkpoint(bytes, s);
    return model;
}

std::unique_ptr<DiffusionModel> DiffusionModel::load(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const SpecificationError& e) {
        throw CheckpointError(e.what());
    }
    return decode(bytes);
}

void DiffusionTrainConfig::validate() const {
    if (batch_size < 1 || log_every < 1) throw SpecificationError("batch size and log cadence must be >= 1");
}

nlohmann::json DiffusionLogEntry::to_json() const {
    return {{"step", step}, {"loss", loss}, {"wall_ms", wall_ms}};
}

std::vector<DiffusionLogEntry> train_diffusion(DiffusionModel& model, const std::vector<Matrix>& windows,
                                               const DiffusionTrainConfig& config,
                                               const std::function<void(const DiffusionLogEntry&)>& on_log) {
    config.validate();
    if (windows.empty()) throw SpecificationError("diffusion training needs at least one window");
    const std::size_t f = model.config().window, c = model.config().channels;
    for (const auto& w : windows) {
        if (w.rows() != f || w.cols() != c) {
            throw ShapeError("train_diffusion window", nn::shape_str({f, c}), nn::shape_str({w.rows(), w.cols()}));
        }
    }
    const auto& sched = model.schedule();
    Rng rng = make_rng(config.seed, "train");
    const nn::Context ctx{nn::Mode::Train, &rng, 1};
    const auto start = std::chrono::steady_clock::now();
    std::vector<DiffusionLogEntry> log;
    const std::size_t b = config.batch_size, first = model.steps();
    for (std::size_t step = first + 1; step <= first + config.train_steps; ++step) {
        nn::Tensor xt({b, f, c}), eps({b, f, c});
        std::vector<int> ts(b);
        for (std::size_t i = 0; i < b; ++i) {
            const auto& x0 = windows[uniform_index(rng, windows.size())];
            ts[i] = static_cast<int>(1 + uniform_index(rng, sched.steps()));
            const double a = std::sqrt(sched.alpha_bar(ts[i])), s = std::sqrt(1.0 - sched.alpha_bar(ts[i]));
            for (std::size_t k = 0; k < f * c; ++k) {
                const double e = standard_normal(rng);
                eps[i * f * c + k] = e;
                xt[i * f * c + k] = a * x0.data()[k] + s * e;
            }
        }
        const nn::Var loss = nn::mse(model.net.forward(nn::Var(std::move(xt)), ts, ctx), nn::Var(std::move(eps)));
        const double value = loss.item();
        if (!std::isfinite(value)) throw NumericalError(step, "diffusion loss is not finite");
        nn::backward(loss);
        model.opt.step(step);
        model.opt.zero_grad();
        model.set_steps(step);
        if ((step - first) % config.log_every == 0 || step == first + config.train_steps) {
            DiffusionLogEntry e{step, value,
                                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                                    .count()};
            log.push_back(e);
            if (on_log) on_log(e);
        }
    }
    return log;
}

}  // namespace comets::diffusion

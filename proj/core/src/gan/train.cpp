#include "comets/gan/train.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/gan/correlation.hpp"
#include "comets/gan/losses.hpp"

namespace comets::gan {
namespace {

nn::Tensor stack_batch(const nn::Tensor& a, const nn::Tensor& b) {
    nn::Shape s = a.shape();
    s[0] += b.shape()[0];
    std::vector<double> d = a.storage();
    d.insert(d.end(), b.storage().begin(), b.storage().end());
    return nn::Tensor(std::move(s), std::move(d));
}

std::vector<std::size_t> draw_indices(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(count);
    for (auto& i : idx) i = uniform_index(rng, n);
    return idx;
}

std::vector<int> twice(const std::vector<int>& v) {
    std::vector<int> out = v;
    out.insert(out.end(), v.begin(), v.end());
    return out;
}

void check_finite(double v, std::size_t step, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(step, std::string(what) + " is not finite");
}

// Scores of one batch under the current critic; no parameters change.
WganLosses probe_losses(GanModel& model, const std::vector<ts::SegmentPair>& data, std::size_t batch, Rng& rng) {
    nn::NoGradGuard guard;
    const nn::Context ctx{nn::Mode::Eval, nullptr, 1};
    const auto b = make_batch(data, draw_indices(data.size(), batch, rng));
    const nn::Var past(b.past);
    const nn::Var z(normal_tensor(b.past.shape(), rng));
    const nn::Var fake = model.generator.forward(past, z, b.past_bins, ctx);
    const auto real = model.critic.forward(past, nn::Var(b.future), b.bins, ctx).o.value().storage();
    const auto gen = model.critic.forward(past, fake, b.bins, ctx).o.value().storage();
    return wgan_losses(real, gen);
}

}  // namespace

void GanTrainConfig::validate() const {
    if (batch_size < 1 || critic_steps < 1 || eval_every < 1 || eval_windows < 1) {
        throw SpecificationError("batch size, critic steps, eval cadence and eval windows must be >= 1");
    }
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw SpecificationError("holdout fraction must be in (0, 1)");
    }
}

nlohmann::json TrainLogEntry::to_json() const {
    return {{"step", step}, {"loss_D", loss_d}, {"loss_G", loss_g}, {"mean_ccd", mean_ccd}, {"wall_ms", wall_ms}};
}

DatasetSplit split_holdout(std::vector<ts::SegmentPair> pairs, double fraction) {
    if (pairs.size() < 2) throw SpecificationError("need at least two segment pairs to hold one out");
    std::size_t held = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pairs.size())));
    held = std::clamp<std::size_t>(held, 1, pairs.size() - 1);
    DatasetSplit s;
    const auto cut = pairs.begin() + static_cast<std::ptrdiff_t>(pairs.size() - held);
    s.holdout.assign(std::make_move_iterator(cut), std::make_move_iterator(pairs.end()));
    pairs.erase(cut, pairs.end());
    s.train = std::move(pairs);
    return s;
}

double held_out_ccd(GanModel& model, const std::vector<ts::SegmentPair>& holdout, std::size_t max_windows,
                    std::uint64_t seed) {
    if (holdout.empty()) throw SpecificationError("held-out slice is empty");
    const std::size_t n = std::min(max_windows, holdout.size());
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i * holdout.size() / n;

    Rng rng = make_rng(seed, "eval");
    std::vector<Matrix> pasts;
    std::vector<std::vector<int>> minutes;
    Matrix real(0, holdout[0].future.cols());
    for (std::size_t i : idx) {
        const auto& pr = holdout[i];
        pasts.push_back(pr.past);
        minutes.emplace_back(pr.minute_of_day.begin(),
                             pr.minute_of_day.begin() + static_cast<std::ptrdiff_t>(pr.past.rows()));
        real.append_rows(pr.future);
    }
    Matrix fake(0, real.cols());
    for (const auto& m : model.sample(pasts, minutes, rng)) fake.append_rows(m);
    const auto a = pairwise_correlation_features(real);
    const auto b = pairwise_correlation_features(fake);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

std::vector<TrainLogEntry> train_gan(GanModel& model, const std::vector<ts::SegmentPair>& dataset,
                                     const GanTrainConfig& config,
                                     const std::function<void(const TrainLogEntry&)>& on_log) {
    config.validate();
    const auto& gc = model.config().generator;
    for (const auto& p : dataset) {
        if (p.past.rows() != gc.past || p.future.rows() != gc.future || p.past.cols() != gc.channels) {
            throw ShapeError("train_gan dataset", nn::shape_str({gc.past, gc.future, gc.channels}),
                             nn::shape_str({p.past.rows(), p.future.rows(), p.past.cols()}));
        }
    }
    const DatasetSplit split = split_holdout(dataset, config.holdout_fraction);
    const auto start = std::chrono::steady_clock::now();
    std::vector<TrainLogEntry> log;
    auto record = [&](std::size_t step, WganLosses losses) {
        TrainLogEntry e;
        e.step = step;
        e.loss_d = losses.loss_d;
        e.loss_g = losses.loss_g;
        e.mean_ccd = held_out_ccd(model, split.holdout, config.eval_windows, config.seed);
        e.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        log.push_back(e);
        if (on_log) on_log(e);
    };

    Rng rng = make_rng(config.seed, "train");
    const nn::Context train_ctx{nn::Mode::Train, &rng, 1};
    const nn::Context frozen_ctx{nn::Mode::Eval, nullptr, 1};
    const std::size_t b = config.batch_size;

    const std::size_t first = model.steps();
    {
        Rng probe = make_rng(config.seed, "probe");
        record(first, probe_losses(model, split.train, b, probe));
    }
    WganLosses last;
    for (std::size_t step = first + 1; step <= first + config.generator_steps; ++step) {
        for (std::size_t k = 0; k < config.critic_steps; ++k) {
            const auto batch = make_batch(split.train, draw_indices(split.train.size(), b, rng));
            nn::Tensor fake;
            {
                nn::NoGradGuard guard;
                const nn::Var z(normal_tensor(batch.past.shape(), rng));
                fake = model.generator.forward(nn::Var(batch.past), z, batch.past_bins, train_ctx).value();
            }
            const auto out = model.critic.forward(nn::Var(stack_batch(batch.past, batch.past)),
                                                  nn::Var(stack_batch(batch.future, fake)), twice(batch.bins),
                                                  train_ctx);
            const nn::Var loss = critic_loss(nn::slice(out.o, 0, 0, b), nn::slice(out.o, 0, b, b));
            last.loss_d = loss.item();
            check_finite(last.loss_d, step, "critic loss");
            nn::backward(loss);
            model.opt_d.step(step);
            model.opt_d.zero_grad();
        }
        const auto batch = make_batch(split.train, draw_indices(split.train.size(), b, rng));
        const nn::Var z(normal_tensor(batch.past.shape(), rng));
        const nn::Var past(batch.past);
        const nn::Var fake = model.generator.forward(past, z, batch.past_bins, train_ctx);
        const nn::Var loss = generator_loss(model.critic.forward(past, fake, batch.bins, frozen_ctx).o);
        last.loss_g = loss.item();
        check_finite(last.loss_g, step, "generator loss");
        nn::backward(loss);
        model.opt_g.step(step);
        model.opt_g.zero_grad();
        model.opt_d.zero_grad();
        model.set_steps(step);

        if ((step - first) % config.eval_every == 0 || step == first + config.generator_steps) record(step, last);
    }
    return log;
}

}  // namespace comets::gan

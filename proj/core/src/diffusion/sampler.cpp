#include "comets/diffusion/sampler.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/io.hpp"
#include "comets/ts/csv.hpp"

namespace comets::diffusion {
namespace {

constexpr std::size_t kSampleChunk = 64;

void check_critic(const DiffusionModel& model, const gan::Critic& critic) {
    const auto& cc = critic.config();
    if (cc.future != model.config().window || cc.channels != model.config().channels) {
        throw ShapeError("guidance critic", nn::shape_str({model.config().window, model.config().channels}),
                         nn::shape_str({cc.future, cc.channels}));
    }
}

std::vector<Matrix> run_sampler(DiffusionModel& model, const GuidanceConfig* guidance, std::size_t count,
                                std::uint64_t seed) {
    const std::size_t f = model.config().window, c = model.config().channels, n = f * c;
    const auto& sched = model.schedule();
    const std::uint64_t root = substream_seed(seed, "sample");
    const nn::Context ctx{nn::Mode::Eval, nullptr, 1};
    std::vector<Matrix> out;
    out.reserve(count);
    for (std::size_t begin = 0; begin < count; begin += kSampleChunk) {
        const std::size_t b = std::min(kSampleChunk, count - begin);
        std::vector<Rng> streams;
        for (std::size_t i = 0; i < b; ++i) streams.emplace_back(indexed_seed(root, begin + i));
        nn::Tensor x({b, f, c});
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t k = 0; k < n; ++k) x[i * n + k] = standard_normal(streams[i]);

        for (std::size_t t = sched.steps(); t >= 1; --t) {
            nn::Tensor eps;
            {
                nn::NoGradGuard guard;
                eps = model.net.forward(nn::Var(x), std::vector<int>(b, static_cast<int>(t)), ctx).value();
            }
            const double ab = sched.alpha_bar(t), beta = sched.beta(t);
            if (guidance != nullptr && guidance->w != 0.0) {
                const nn::Tensor g = guidance_gradient(*guidance->critic, x, guidance->input, guidance->start_minute);
                const double k = guidance->w * std::sqrt(1.0 - ab);
                for (std::size_t i = 0; i < eps.size(); ++i) eps[i] -= k * g[i];
            }
            const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
            const double coef = beta / std::sqrt(1.0 - ab);
            const double sigma = std::sqrt(beta);
            for (std::size_t i = 0; i < b; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    const std::size_t j = i * n + k;
                    double v = inv_sqrt_alpha * (x[j] - coef * eps[j]);
                    if (t > 1) v += sigma * standard_normal(streams[i]);
                    x[j] = v;
                }
            }
        }
        for (std::size_t i = 0; i < b; ++i) {
            Matrix m(f, c, std::vector<double>(x.data() + i * n, x.data() + (i + 1) * n));
            for (double v : m.data()) {
                if (!std::isfinite(v)) throw NumericalError(begin + i, "sampled window is not finite");
            }
            out.push_back(std::move(m));
        }
    }
    return out;
}

}  // namespace

std::vector<Matrix> sample_unguided(DiffusionModel& model, std::size_t count, std::uint64_t seed) {
    return run_sampler(model, nullptr, count, seed);
}

std::vector<Matrix> sample_guided(DiffusionModel& model, const GuidanceConfig& guidance, std::size_t count,
                                  std::uint64_t seed) {
    if (!std::isfinite(guidance.w)) throw SpecificationError("guidance weight must be finite");
    if (guidance.critic == nullptr) throw SpecificationError("guided sampling needs a critic");
    check_critic(model, *guidance.critic);
    return run_sampler(model, &guidance, count, seed);
}

nn::Var guidance_score(gan::Critic& critic, const nn::Var& x, CriticInput input, int start_minute) {
    const nn::Context ctx{nn::Mode::Eval, nullptr, 1};
    if (input == CriticInput::Unconditional) return critic.correlation_score(x, ctx);
    const auto& cc = critic.config();
    const std::size_t batch = x.shape().at(0);
    const nn::Var past(nn::Tensor({batch, cc.past, cc.channels}));
    std::vector<int> bins;
    bins.reserve(batch * (cc.past + cc.future));
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t s = 0; s < cc.past + cc.future; ++s)
            bins.push_back(ts::minute_bin((start_minute + static_cast<int>(s)) % ts::kSessionMinutes));
    return critic.forward(past, x, bins, ctx).o;
}

nn::Tensor guidance_gradient(gan::Critic& critic, const nn::Tensor& x, CriticInput input, int start_minute) {
    const nn::Var xv(x, true);
    nn::backward(nn::sum(guidance_score(critic, xv, input, start_minute)));
    nn::Tensor g(x.shape());
    if (!xv.grad().empty()) g.storage() = xv.grad();
    // Critic parameters received gradients as a side effect; drop them.
    nn::StateList s;
    critic.collect("critic", s);
    for (auto& p : s.params) p.var->zero_grad();
    return g;
}

void write_sample_dump(const std::filesystem::path& dir, const std::vector<Matrix>& windows,
                       const std::vector<ts::ChannelMeta>& channels, const nlohmann::json& manifest) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        ts::MultivariateSeries s;
        s.values = windows[i];
        s.channels = channels;
        char name[32];
        std::snprintf(name, sizeof name, "sample_%05zu.csv", i);
        write_file_atomic(dir / name, ts::series_to_csv(s));
    }
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string critic_input_name(CriticInput input) {
    return input == CriticInput::ZeroPast ? "zero_past" : "unconditional";
}

CriticInput parse_critic_input(const std::string& name) {
    if (name == "zero_past") return CriticInput::ZeroPast;
    if (name == "unconditional") return CriticInput::Unconditional;
    throw SpecificationError("unknown critic input mode '" + name + "' (expected zero_past or unconditional)");
}

}  // namespace comets::diffusion

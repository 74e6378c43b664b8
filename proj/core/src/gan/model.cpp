#include "comets/gan/model.hpp"

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/io.hpp"
#include "comets/nn/checkpoint.hpp"

namespace comets::gan {
namespace {

nlohmann::json adam_json(const nn::AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

nn::AdamConfig adam_from(const nlohmann::json& j) {
    return {j.at("lr"), j.at("beta1"), j.at("beta2"), j.at("eps")};
}

std::vector<nn::ParamRef> params_of(Generator& g) {
    nn::StateList s;
    g.collect("generator", s);
    return s.params;
}

std::vector<nn::ParamRef> params_of(Critic& c) {
    nn::StateList s;
    c.collect("critic", s);
    return s.params;
}

}  // namespace

GanConfig GanConfig::make(std::size_t past, std::size_t future, std::size_t channels) {
    GanConfig c;
    c.generator.past = c.critic.past = past;
    c.generator.future = c.critic.future = future;
    c.generator.channels = c.critic.channels = channels;
    return c;
}

void GanConfig::validate() const {
    generator.validate();
    critic.validate();
    if (generator.past != critic.past || generator.future != critic.future ||
        generator.channels != critic.channels) {
        throw SpecificationError("generator and critic disagree on window sizes or channel count");
    }
}

nlohmann::json GanConfig::to_json() const {
    return {{"generator", generator.to_json()},
            {"critic", critic.to_json()},
            {"adam_g", adam_json(adam_g)},
            {"adam_d", adam_json(adam_d)}};
}

GanConfig GanConfig::from_json(const nlohmann::json& j) {
    GanConfig c;
    c.generator = GeneratorConfig::from_json(j.at("generator"));
    c.critic = CriticConfig::from_json(j.at("critic"));
    c.adam_g = adam_from(j.at("adam_g"));
    c.adam_d = adam_from(j.at("adam_d"));
    c.validate();
    return c;
}

GanModel::GanModel(const GanConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng = make_rng(seed, "init");
    generator = Generator(config_.generator, rng);
    critic = Critic(config_.critic, rng);
    opt_g = nn::Adam(params_of(generator), config_.adam_g);
    opt_d = nn::Adam(params_of(critic), config_.adam_d);
}

nn::StateList GanModel::state() {
    nn::StateList s;
    generator.collect("generator", s);
    critic.collect("critic", s);
    opt_g.collect("adam_g", s);
    opt_d.collect("adam_d", s);
    s.buffer("steps", step_);
    return s;
}

std::string GanModel::encode() {
    return nn::encode_checkpoint(state(), {{"kind", "gan"}, {"model", config_.to_json()}});
}

void GanModel::save(const std::filesystem::path& path) { write_file_atomic(path, encode()); }

std::unique_ptr<GanModel> GanModel::decode(const std::string& bytes) {
    const auto cfg = nn::decode_checkpoint_config(bytes);
    if (cfg.value("kind", "") != "gan") throw CheckpointError("checkpoint does not hold a GAN model");
    std::unique_ptr<GanModel> model;
    try {
        model = std::make_unique<GanModel>(GanConfig::from_json(cfg.at("model")), 0);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("invalid GAN config in checkpoint: ") + e.what());
    }
    auto s = model->state();
    nn::decode_checkpoint(bytes, s);
    return model;
}

std::unique_ptr<GanModel> GanModel::load(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const SpecificationError& e) {
        throw CheckpointError(e.what());
    }
    return decode(bytes);
}

std::vector<Matrix> GanModel::sample(const std::vector<Matrix>& pasts,
                                     const std::vector<std::vector<int>>& past_minutes, Rng& rng) {
    const std::size_t p = config_.generator.past, c = config_.generator.channels;
    const std::size_t batch = pasts.size();
    if (past_minutes.size() != batch) throw ShapeError("sample minutes", std::to_string(batch),
                                                       std::to_string(past_minutes.size()));
    nn::Tensor past({batch, p, c});
    std::vector<int> bins;
    for (std::size_t b = 0; b < batch; ++b) {
        if (pasts[b].rows() != p || pasts[b].cols() != c) {
            throw ShapeError("sample past", nn::shape_str({p, c}), nn::shape_str({pasts[b].rows(), pasts[b].cols()}));
        }
        std::copy(pasts[b].data().begin(), pasts[b].data().end(), past.data() + b * p * c);
        const auto mb = minute_bins(past_minutes[b]);
        if (mb.size() != p) throw ShapeError("sample minutes", std::to_string(p), std::to_string(mb.size()));
        bins.insert(bins.end(), mb.begin(), mb.end());
    }
    const nn::Tensor z = normal_tensor({batch, p, c}, rng);
    nn::NoGradGuard guard;
    const nn::Context ctx{nn::Mode::Eval, nullptr, 1};
    const nn::Var out = generator.forward(nn::Var(std::move(past)), nn::Var(z), bins, ctx);
    std::vector<Matrix> result;
    for (std::size_t b = 0; b < batch; ++b) result.push_back(out.value().matrix(b));
    return result;
}

GanBatch make_batch(const std::vector<ts::SegmentPair>& pairs, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw SpecificationError("empty batch");
    const auto& first = pairs.at(indices[0]);
    const std::size_t p = first.past.rows(), f = first.future.rows(), c = first.past.cols();
    GanBatch b;
    b.past = nn::Tensor({indices.size(), p, c});
    b.future = nn::Tensor({indices.size(), f, c});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto& pr = pairs.at(indices[i]);
        std::copy(pr.past.data().begin(), pr.past.data().end(), b.past.data() + i * p * c);
        std::copy(pr.future.data().begin(), pr.future.data().end(), b.future.data() + i * f * c);
        const auto mb = minute_bins(pr.minute_of_day);
        b.bins.insert(b.bins.end(), mb.begin(), mb.end());
        b.past_bins.insert(b.past_bins.end(), mb.begin(), mb.begin() + static_cast<std::ptrdiff_t>(p));
    }
    return b;
}

std::vector<int> minute_bins(const std::vector<int>& minutes) {
    std::vector<int> out;
    out.reserve(minutes.size());
    for (int m : minutes) out.push_back(ts::minute_bin(m));
    return out;
}

nn::Tensor normal_tensor(const nn::Shape& shape, Rng& rng) {
    nn::Tensor t(shape);
    for (auto& x : t.storage()) x = standard_normal(rng);
    return t;
}

}  // namespace comets::gan

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "comets/diffusion/sampler.hpp"
#include "comets/error.hpp"
#include "comets/gan/model.hpp"
#include "comets/nn/spectral.hpp"
#include "comets/ts/segment.hpp"
#include "comets/ts/synthetic.hpp"
#include "gradcheck.hpp"
#include "stats.hpp"

using namespace comets;
using namespace comets::diffusion;
using comets::testing::random_tensor;

namespace {

EpsNetConfig small_net(std::size_t window = 12, std::size_t channels = 3) {
    EpsNetConfig c;
    c.window = window;
    c.channels = channels;
    c.hidden = 16;
    c.step_embed_dim = 8;
    return c;
}

std::vector<Matrix> sine_windows(std::size_t window, std::size_t channels) {
    ts::SyntheticDatasetSpec spec;
    spec.channels = channels;
    spec.length = 600;
    spec.seed = 4;
    return ts::windows(ts::generate_sines(spec).values, window, 1);
}

gan::CriticConfig small_critic(std::size_t window = 12, std::size_t channels = 3) {
    auto c = gan::GanConfig::make(window, window, channels).critic;
    c.conv_channels = {4, 8};
    c.linear = {8, 1};
    c.time_embed_dim = 8;
    return c;
}

/// A model trained briefly on sines, shared across tests.
DiffusionModel& trained_sines_model() {
    static DiffusionModel* model = [] {
        auto* m = new DiffusionModel(small_net(), default_schedule(), {1e-3, 0.9, 0.999, 1e-8}, 5);
        DiffusionTrainConfig tc;
        tc.batch_size = 32;
        tc.train_steps = 2000;
        tc.seed = 5;
        train_diffusion(*m, sine_windows(12, 3), tc);
        return m;
    }();
    return *model;
}

}  // namespace

TEST(Schedule, ZeroBetasLeaveSampleUnchanged) {
    const NoiseSchedule s(std::vector<double>{0.0, 0.0, 0.0});
    Rng rng(1);
    Matrix x0(4, 2);
    for (auto& v : x0.data()) v = standard_normal(rng);
    EXPECT_EQ(forward_sample(x0, 3, s, rng).x_t, x0);
}

TEST(Schedule, AlphaBarProduct) {
    const NoiseSchedule s(std::vector<double>{0.1, 0.1});
    EXPECT_NEAR(s.alpha_bar(2), 0.81, 1e-15);
    EXPECT_EQ(s.alpha_bar(0), 1.0);
    Rng rng(1);
    EXPECT_THROW(forward_sample(Matrix(2, 2), 0, s, rng), SpecificationError);
    EXPECT_THROW(forward_sample(Matrix(2, 2), 3, s, rng), SpecificationError);
    EXPECT_THROW(NoiseSchedule(std::vector<double>{1.0}), SpecificationError);
}

TEST(Schedule, ConsistencyAndMonotonicity) {
    const auto s = default_schedule();
    ASSERT_EQ(s.steps(), 100u);
    for (std::size_t t = 1; t <= s.steps(); ++t) {
        EXPECT_NEAR(s.alpha_bar(t) / s.alpha_bar(t - 1), 1.0 - s.beta(t), 1e-12);
        EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
        EXPECT_GT(s.beta(t), 0.0);
    }
    EXPECT_EQ(NoiseSchedule::from_json(s.to_json()).betas(), s.betas());
}

TEST(Schedule, TerminalMarginalIsStandardNormal) {
    const auto s = default_schedule();
    Rng rng(2);
    Matrix x0(1, 1, 0.8);
    std::vector<double> xs;
    for (int i = 0; i < 10000; ++i) xs.push_back(forward_sample(x0, s.steps(), s, rng).x_t(0, 0));
    const double d = comets::testing::ks_statistic_normal(xs);
    EXPECT_GT(comets::testing::ks_pvalue(d, xs.size()), 0.01) << "D = " << d;
}

TEST(Schedule, MarginalComposition) {
    const auto s = default_schedule();
    const std::size_t t = 60, k = 25;
    Rng rng(3);
    const Matrix x0(1, 1, 1.5);
    std::vector<double> direct, composed;
    for (int i = 0; i < 10000; ++i) {
        direct.push_back(forward_sample(x0, t, s, rng).x_t(0, 0));
        const double xs = forward_sample(x0, k, s, rng).x_t(0, 0);
        const double ratio = s.alpha_bar(t) / s.alpha_bar(k);
        composed.push_back(std::sqrt(ratio) * xs + std::sqrt(1.0 - ratio) * standard_normal(rng));
    }
    EXPECT_NEAR(comets::testing::mean_of(direct), comets::testing::mean_of(composed), 0.02 * 2);
    EXPECT_NEAR(comets::testing::mean_of(direct), std::sqrt(s.alpha_bar(t)) * 1.5, 0.02 * 2);
    EXPECT_NEAR(comets::testing::variance_of(composed), 1.0 - s.alpha_bar(t), 0.02 * 2);
}

TEST(EpsNet, ShapeAndStepSensitivity) {
    Rng rng(4);
    EpsNet net(small_net(), rng);
    const nn::Var x(random_tensor({2, 12, 3}, rng));
    const auto a = net.forward(x, {5, 5}, {}).value();
    EXPECT_EQ(a.shape(), x.shape());
    EXPECT_NE(a, net.forward(x, {50, 50}, {}).value());
    EXPECT_THROW(net.forward(x, {5}, {}), ShapeError);
}

TEST(EpsNet, GradientCheck) {
    Rng rng(5);
    EpsNet net(small_net(8, 2), rng);
    nn::StateList s;
    net.collect("eps", s);
    nn::Var x(random_tensor({2, 8, 2}, rng), true);
    std::vector<nn::Var*> inputs{&x};
    for (auto& p : s.params) inputs.push_back(p.var);
    const auto r = comets::testing::grad_check(
        [&] { return comets::testing::weighted_sum(net.forward(x, {3, 70}, {})); }, inputs, 3);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(DiffusionTrain, ZeroNetworkLossIsUnitVariance) {
    DiffusionModel m(small_net(), default_schedule(), {}, 6);
    nn::StateList s;
    m.net.collect("eps", s);
    for (auto& p : s.params)
        if (p.name.rfind("eps.output", 0) == 0) p.var->mutable_value() = nn::Tensor(p.var->shape());
    const auto windows = sine_windows(12, 3);
    DiffusionTrainConfig tc;
    tc.batch_size = 256;
    tc.train_steps = 1;
    m.opt = nn::Adam(s.params, {0.0, 0.9, 0.999, 1e-8});
    const auto log = train_diffusion(m, windows, tc);
    EXPECT_NEAR(log.front().loss, 1.0, 0.05);
}

TEST(DiffusionTrain, LossDecreasesOnSines) {
    DiffusionModel m(small_net(), default_schedule(), {1e-3, 0.9, 0.999, 1e-8}, 7);
    DiffusionTrainConfig tc;
    tc.batch_size = 32;
    tc.train_steps = 300;
    tc.log_every = 1;
    const auto log = train_diffusion(m, sine_windows(12, 3), tc);
    double head = 0, tail = 0;
    for (std::size_t i = 0; i < 30; ++i) head += log[i].loss, tail += log[log.size() - 1 - i].loss;
    EXPECT_LT(tail, head);
}

TEST(DiffusionTrain, DeterministicCheckpoints) {
    auto run = [] {
        DiffusionModel m(small_net(), default_schedule(), {}, 8);
        DiffusionTrainConfig tc;
        tc.batch_size = 8;
        tc.train_steps = 5;
        tc.seed = 2;
        train_diffusion(m, sine_windows(12, 3), tc);
        return m.encode();
    };
    const auto bytes = run();
    EXPECT_EQ(bytes, run());
    const auto back = DiffusionModel::decode(bytes);
    EXPECT_EQ(back->encode(), bytes);
    EXPECT_EQ(back->steps(), 5u);
}

TEST(Sampler, ShapesFiniteReproducible) {
    auto& m = trained_sines_model();
    const auto a = sample_unguided(m, 5, 11);
    ASSERT_EQ(a.size(), 5u);
    for (const auto& w : a) {
        EXPECT_EQ(w.rows(), 12u);
        EXPECT_EQ(w.cols(), 3u);
        for (double v : w.data()) EXPECT_TRUE(std::isfinite(v));
    }
    EXPECT_EQ(a, sample_unguided(m, 5, 11));
    EXPECT_NE(a, sample_unguided(m, 5, 12));
    // Window i depends only on (seed, i).
    EXPECT_EQ(sample_unguided(m, 2, 11)[1], a[1]);
}

TEST(Sampler, SinesModelStaysInRange) {
    auto& m = trained_sines_model();
    std::size_t inside = 0, total = 0;
    for (const auto& w : sample_unguided(m, 32, 13))
        for (double v : w.data()) inside += std::abs(v) <= 1.5, ++total;
    EXPECT_GE(static_cast<double>(inside) / total, 0.95);
}

TEST(Guidance, ZeroWeightIsBitIdentical) {
    auto& m = trained_sines_model();
    Rng rng(14);
    gan::Critic critic(small_critic(), rng);
    for (auto mode : {CriticInput::ZeroPast, CriticInput::Unconditional}) {
        GuidanceConfig g{0.0, &critic, mode, 0};
        EXPECT_EQ(sample_guided(m, g, 4, 21), sample_unguided(m, 4, 21));
    }
}

TEST(Guidance, NonZeroWeightChangesSamples) {
    auto& m = trained_sines_model();
    Rng rng(15);
    gan::Critic critic(small_critic(), rng);
    GuidanceConfig g{5.0, &critic, CriticInput::ZeroPast, 0};
    const auto plus = sample_guided(m, g, 3, 21);
    g.w = -5.0;
    const auto minus = sample_guided(m, g, 3, 21);
    EXPECT_NE(plus, sample_unguided(m, 3, 21));
    EXPECT_NE(plus, minus);
}

TEST(Guidance, OppositeWeightsGiveOppositeCorrections) {
    // With a single diffusion step no noise is added, so the only effect of w is
    // the correction applied to the shared x_1.
    DiffusionModel m(small_net(), NoiseSchedule(std::vector<double>{0.3}), {}, 19);
    Rng rng(16);
    gan::Critic critic(small_critic(), rng);
    const auto base = sample_unguided(m, 3, 5);
    GuidanceConfig g{2.0, &critic, CriticInput::ZeroPast, 30};
    const auto plus = sample_guided(m, g, 3, 5);
    g.w = -2.0;
    const auto minus = sample_guided(m, g, 3, 5);
    double moved = 0;
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t k = 0; k < base[i].data().size(); ++k) {
            const double dp = plus[i].data()[k] - base[i].data()[k], dm = minus[i].data()[k] - base[i].data()[k];
            EXPECT_NEAR(dp, -dm, 1e-12);
            moved = std::max(moved, std::abs(dp));
        }
    EXPECT_GT(moved, 0.0);
}

TEST(Guidance, GradientMatchesFiniteDifferences) {
    Rng rng(17);
    gan::Critic critic(small_critic(), rng);
    for (auto [w, u] : critic.normalized_weights()) {
        std::vector<double> v;
        nn::power_iteration(w->value(), *u, v, 2000);
    }
    nn::Tensor x = random_tensor({2, 12, 3}, rng);
    for (auto mode : {CriticInput::ZeroPast, CriticInput::Unconditional}) {
        const auto g = guidance_gradient(critic, x, mode, 0);
        auto score = [&] {
            const auto s = guidance_score(critic, nn::Var(x), mode, 0).value();
            double total = 0;
            for (double v : s.storage()) total += v;
            return total;
        };
        for (std::size_t i = 0; i < x.size(); i += 5) {
            const double orig = x[i], h = 1e-5;
            x[i] = orig + h;
            const double up = score();
            x[i] = orig - h;
            const double down = score();
            x[i] = orig;
            const double fd = (up - down) / (2 * h);
            EXPECT_LE(std::abs(fd - g[i]), 1e-3 * std::max({std::abs(fd), std::abs(g[i]), 1e-6})) << i;
        }
    }
}

TEST(Guidance, ShapeMismatchRejected) {
    auto& m = trained_sines_model();
    Rng rng(18);
    gan::Critic critic(small_critic(10, 3), rng);
    GuidanceConfig g{1.0, &critic, CriticInput::ZeroPast, 0};
    EXPECT_THROW(sample_guided(m, g, 1, 1), ShapeError);
}

TEST(Sampler, DumpWritesFilesAndManifest) {
    const auto dir = std::filesystem::temp_directory_path() / "comets_dump_test";
    std::filesystem::remove_all(dir);
    const std::vector<Matrix> windows(2, Matrix(3, 2, 0.5));
    write_sample_dump(dir, windows, ts::raw_layout(2), {{"w", 0.0}, {"seed", 1}});
    EXPECT_TRUE(std::filesystem::exists(dir / "sample_00000.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "sample_00001.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
    std::filesystem::remove_all(dir);
    EXPECT_EQ(parse_critic_input(critic_input_name(CriticInput::Unconditional)), CriticInput::Unconditional);
    EXPECT_THROW(parse_critic_input("bogus"), SpecificationError);
}

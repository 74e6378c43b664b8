#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/SVD>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/nn/checkpoint.hpp"
#include "comets/nn/layers.hpp"
#include "comets/nn/ops.hpp"
#include "comets/nn/optim.hpp"
#include "comets/nn/spectral.hpp"
#include "gradcheck.hpp"

using namespace comets;
using namespace comets::nn;
using comets::testing::grad_check;
using comets::testing::random_tensor;
using comets::testing::weighted_sum;

namespace {

constexpr double kGradTol = 1e-4;

double svd_norm(const Tensor& w) {
    Eigen::MatrixXd m(w.dim(0), w.dim(1));
    for (std::size_t r = 0; r < w.dim(0); ++r)
        for (std::size_t c = 0; c < w.dim(1); ++c) m(r, c) = w[r * w.dim(1) + c];
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

TEST(Ops, LeakyReluDefinition) {
    const Var x(Tensor({2}, std::vector<double>{-1.0, 2.0}));
    const auto y = leaky_relu(x, 0.2).value();
    EXPECT_DOUBLE_EQ(y[0], -0.2);
    EXPECT_DOUBLE_EQ(y[1], 2.0);
}

TEST(Ops, SiluAtZero) {
    EXPECT_DOUBLE_EQ(silu(Var(Tensor({1}, 0.0))).item(), 0.0);
    EXPECT_NEAR(silu(Var(Tensor({1}, 1.0))).item(), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(Ops, ConvIdentityKernel) {
    Rng rng(1);
    Conv1d conv(1, 1, 1, 1, 1, Padding::Causal, false, rng);
    conv.weight.mutable_value()[0] = 1.0;
    const Var x(random_tensor({2, 6, 1}, rng));
    const auto y = conv.forward(x, Context{}).value();
    EXPECT_EQ(y.storage(), x.value().storage());
}

TEST(Ops, DenseGradientIsOuterProduct) {
    Rng rng(2);
    Var x(random_tensor({1, 3}, rng), false);
    Var w(random_tensor({3, 2}, rng), true);
    const Tensor g = random_tensor({1, 2}, rng);
    backward(linear(x, w), g);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t n = 0; n < 2; ++n) EXPECT_NEAR(w.grad()[k * 2 + n], x.value()[k] * g[n], 1e-15);
}

TEST(Ops, ZeroUpstreamGradientGivesZeroGradients) {
    Rng rng(3);
    Dense d(4, 3, false, rng);
    const Var x(random_tensor({2, 4}, rng));
    backward(d.forward(x, Context{}), Tensor({2, 3}));
    for (double g : d.weight.grad()) EXPECT_EQ(g, 0.0);
    for (double g : d.bias.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Ops, BackwardTwiceThrows) {
    Var x(Tensor({1}, 2.0), true);
    const Var y = mul(x, x);
    backward(y);
    EXPECT_THROW(backward(y), std::logic_error);
}

TEST(Ops, ShapeMismatchReportsShapes) {
    const Var a(Tensor({2, 3})), b(Tensor({3, 2}));
    try {
        add(a, b);
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_EQ(e.expected(), "[2, 3]");
        EXPECT_EQ(e.actual(), "[3, 2]");
    }
}

TEST(Grad, Elementwise) {
    Rng rng(4);
    Var a(random_tensor({3, 4}, rng), true), b(random_tensor({3, 4}, rng), true);
    const std::vector<bool> mask{true, false, true, false};
    const auto r = grad_check(
        [&] {
            Var y = add(mul(a, b), sub(a, scale(b, 0.3)));
            y = add(leaky_relu(y, 0.2), add(silu(a), add(tanh(b), sigmoid(y))));
            return weighted_sum(tanh_masked(y, mask));
        },
        {&a, &b});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, Dense) {
    Rng rng(5);
    Dense d(4, 3, false, rng);
    Var x(random_tensor({2, 5, 4}, rng), true);
    d.bias.mutable_value() = random_tensor({3}, rng);
    const auto r = grad_check([&] { return weighted_sum(d.forward(x, Context{})); }, {&x, &d.weight, &d.bias});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, Conv1dCausalDilated) {
    Rng rng(6);
    Conv1d conv(3, 4, 3, 2, 1, Padding::Causal, false, rng);
    conv.bias.mutable_value() = random_tensor({4}, rng);
    Var x(random_tensor({2, 9, 3}, rng), true);
    const auto r = grad_check([&] { return weighted_sum(conv.forward(x, Context{})); }, {&x, &conv.weight, &conv.bias});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, Conv1dStrided) {
    Rng rng(7);
    Conv1d conv(2, 3, 5, 1, 2, Padding::Symmetric, false, rng);
    Var x(random_tensor({2, 11, 2}, rng), true);
    EXPECT_EQ(conv.forward(x, Context{}).shape(), (Shape{2, 6, 3}));
    const auto r = grad_check([&] { return weighted_sum(conv.forward(x, Context{})); }, {&x, &conv.weight, &conv.bias});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, TemporalBlockWithDropout) {
    Rng rng(8);
    TemporalBlock block(3, 5, 3, 2, 0.1, rng);
    Var x(random_tensor({2, 8, 3}, rng), true);
    const auto r = grad_check(
        [&] {
            Rng drop(99);
            return weighted_sum(block.forward(x, Context{Mode::Train, &drop, 1}));
        },
        {&x, &block.conv1.weight, &block.conv2.weight, &block.skip.weight, &block.conv2.bias});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, TimeLinearConcatSliceReshape) {
    Rng rng(9);
    Var x(random_tensor({2, 4, 3}, rng), true), y(random_tensor({2, 4, 2}, rng), true);
    Var w(random_tensor({5, 4}, rng), true), b(random_tensor({5}, rng), true);
    Var e(random_tensor({2, 5}, rng), true);
    const auto r = grad_check(
        [&] {
            Var h = concat({x, y}, 2);
            h = time_linear(h, w, b);
            h = slice(h, 1, 1, 3);
            h = reshape(h, {2, 15});
            return weighted_sum(add_over_time(reshape(h, {2, 3, 5}), e));
        },
        {&x, &y, &w, &b, &e});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, PairwiseCorrelation) {
    Rng rng(10);
    Var x(random_tensor({1, 4, 3}, rng), true);
    const auto r = grad_check([&] { return weighted_sum(pairwise_correlation(x)); }, {&x});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, LossesAndReductions) {
    Rng rng(11);
    Var a(random_tensor({3, 2}, rng), true), b(random_tensor({3, 2}, rng), true);
    Var z(random_tensor({6}, rng), true);
    const std::vector<double> labels{1, 0, 1, 1, 0, 0};
    const auto r = grad_check(
        [&] {
            return add(add(mse(a, b), bce_with_logits(z, labels)), weighted_sum(mean_per_sample(mul(a, a))));
        },
        {&a, &b, &z});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, SpectralNormalizedDense) {
    Rng rng(12);
    Dense d(5, 4, true, rng);
    std::vector<double> v;
    power_iteration(d.weight.value(), d.u, v, 2000);
    Var x(random_tensor({3, 5}, rng), true);
    const auto r = grad_check([&] { return weighted_sum(d.forward(x, Context{})); }, {&x, &d.weight});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Grad, EmbeddingMlp) {
    Rng rng(13);
    EmbeddingMlp mlp(8, 6, 3, false, rng);
    const std::vector<int> pos{0, 5, 38, 12};
    const auto r = grad_check([&] { return weighted_sum(mlp.forward(pos, 2, 2, Context{})); },
                              {&mlp.l1.weight, &mlp.l1.bias, &mlp.l2.weight});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Layers, TemporalBlockIsCausal) {
    Rng rng(14);
    TemporalBlock block(2, 4, 3, 4, 0.1, rng);
    Tensor x = random_tensor({1, 20, 2}, rng);
    const auto base = block.forward(Var(x), Context{}).value();
    for (std::size_t t = 11; t < 20; ++t) x[t * 2] += 5.0;
    const auto moved = block.forward(Var(x), Context{}).value();
    EXPECT_EQ(base.shape(), (Shape{1, 20, 4}));
    for (std::size_t i = 0; i < 11 * 4; ++i) EXPECT_EQ(base[i], moved[i]);
    bool changed = false;
    for (std::size_t i = 11 * 4; i < 20 * 4; ++i) changed = changed || base[i] != moved[i];
    EXPECT_TRUE(changed);
}

TEST(Layers, DropoutEvalIsIdentity) {
    Rng rng(15);
    const Var x(random_tensor({4, 7}, rng));
    EXPECT_EQ(apply_dropout(x, 0.5, Context{}).value(), x.value());
    Rng drop(1);
    const auto y = apply_dropout(x, 0.5, Context{Mode::Train, &drop, 1}).value();
    EXPECT_NE(y, x.value());
}

TEST(Layers, InvalidSettingsRejected) {
    Rng rng(16);
    EXPECT_THROW(Conv1d(1, 1, 0, 1, 1, Padding::Causal, false, rng), SpecificationError);
    EXPECT_THROW(TemporalBlock(1, 1, 3, 1, 1.0, rng), SpecificationError);
}

TEST(Embedding, BinZeroAlternates) {
    const auto e = sinusoidal_embedding(0, 8);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(e[i], i % 2 ? 1.0 : 0.0);
}

TEST(Embedding, DistinctBoundedAndEvenOnly) {
    std::vector<std::vector<double>> all;
    for (int b = 0; b < 39; ++b) {
        all.push_back(sinusoidal_embedding(b, 32));
        for (double v : all.back()) {
            EXPECT_LE(std::abs(v), 1.0);
        }
    }
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i], all[j]);
    EXPECT_THROW(sinusoidal_embedding(1, 7), SpecificationError);
}

TEST(Spectral, DiagonalMatrix) {
    Var w(Tensor({2, 2}, std::vector<double>{3, 0, 0, 1}), true);
    std::vector<double> u{0.6, 0.8};
    const auto n = spectral_normalize(w, u, 50, true).value();
    EXPECT_NEAR(svd_norm(n), 1.0, 1e-6);
    EXPECT_NEAR(n[0], 1.0, 1e-6);
    EXPECT_NEAR(n[3], 1.0 / 3.0, 1e-6);
}

TEST(Spectral, FixedPointUnchanged) {
    Var w(Tensor({2, 3}, std::vector<double>{1, 0, 0, 0, 0.5, 0}), true);
    std::vector<double> u{1.0, 0.3};
    const auto n = spectral_normalize(w, u, 50, false).value();
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(n[i], w.value()[i], 1e-9);
}

TEST(Spectral, ZeroMatrixReturnedAsIs) {
    Var w(Tensor({3, 2}), true);
    std::vector<double> u{1, 0, 0};
    const auto n = spectral_normalize(w, u, 5, false).value();
    for (double v : n.storage()) EXPECT_EQ(v, 0.0);
}

TEST(Spectral, OperatorNormBoundOnRandomMatrices) {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 20), n = 1 + uniform_index(rng, 20);
        Var w(random_tensor({k, n}, rng, 3.0), true);
        std::vector<double> u(k, 1.0 / std::sqrt(static_cast<double>(k)));
        const auto out = spectral_normalize(w, u, 50, true).value();
        EXPECT_LE(svd_norm(out), 1.0 + 1e-3);
        EXPECT_NEAR(operator_norm(out), svd_norm(out), 1e-9);
    }
}

TEST(Spectral, EvalModeLeavesUUntouched) {
    Rng rng(18);
    Dense d(6, 4, true, rng);
    const auto before = d.u;
    d.forward(Var(random_tensor({2, 6}, rng)), Context{});
    EXPECT_EQ(d.u, before);
    Rng drop(1);
    d.forward(Var(random_tensor({2, 6}, rng)), Context{Mode::Train, &drop, 1});
    EXPECT_NE(d.u, before);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Var p(Tensor({3}, std::vector<double>{1, 2, 3}), true);
    Adam opt({{"p", &p}}, {0.1, 0.9, 0.999, 1e-8});
    p.zero_grad();
    opt.step(1);
    EXPECT_EQ(p.value().storage(), (std::vector<double>{1, 2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Var p(Tensor({1}, 0.0), true);
    Adam opt({{"p", &p}}, {0.1, 0.9, 0.999, 1e-8});
    backward(scale(p, 1.0));  // gradient 1
    opt.step(1);
    // Bias-corrected first step: m_hat = 1, v_hat = 1.
    EXPECT_NEAR(p.value()[0], -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientThrows) {
    Var p(Tensor({1}, 0.0), true);
    Adam opt({{"p", &p}}, {});
    backward(scale(p, std::numeric_limits<double>::infinity()));
    EXPECT_THROW(opt.step(4), NumericalError);
    EXPECT_EQ(p.value()[0], 0.0);
}

TEST(Adam, Deterministic) {
    auto run = [] {
        Rng rng(19);
        Dense d(3, 2, false, rng);
        Adam opt({{"w", &d.weight}, {"b", &d.bias}}, {0.05, 0.5, 0.9, 1e-8});
        for (int s = 1; s <= 20; ++s) {
            backward(weighted_sum(d.forward(Var(random_tensor({4, 3}, rng)), Context{})));
            opt.step(s);
            opt.zero_grad();
        }
        return d.weight.value();
    };
    EXPECT_EQ(run(), run());
}

namespace {

struct ToyModel {
    explicit ToyModel(std::size_t in, std::uint64_t seed) : rng(seed), d(in, 3, true, rng), c(in, 2, 3, 1, 1, Padding::Causal, false, rng) {
        StateList s;
        collect_params(s);
        opt = Adam(s.params, {});
    }
    void collect_params(StateList& s) {
        d.collect("dense", s);
        c.collect("conv", s);
    }
    StateList state() {
        StateList s;
        collect_params(s);
        opt.collect("adam", s);
        return s;
    }
    Rng rng;
    Dense d;
    Conv1d c;
    Adam opt;
};

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
    ToyModel a(4, 20);
    Rng drop(2);
    backward(weighted_sum(a.d.forward(Var(random_tensor({2, 4}, a.rng)), Context{Mode::Train, &drop, 1})));
    a.opt.step(1);
    const std::string bytes = encode_checkpoint(a.state(), {{"note", "toy"}});
    ToyModel b(4, 21);
    auto sb = b.state();
    const auto cfg = decode_checkpoint(bytes, sb);
    EXPECT_EQ(cfg.at("note"), "toy");
    EXPECT_EQ(a.d.weight.value(), b.d.weight.value());
    EXPECT_EQ(a.c.weight.value(), b.c.weight.value());
    EXPECT_EQ(a.d.u, b.d.u);
    EXPECT_EQ(encode_checkpoint(b.state(), {{"note", "toy"}}), bytes);
}

TEST(Checkpoint, CorruptMagicRejected) {
    ToyModel a(4, 22);
    std::string bytes = encode_checkpoint(a.state(), {});
    bytes[0] = 'X';
    auto s = a.state();
    EXPECT_THROW(decode_checkpoint(bytes, s), CheckpointError);
}

TEST(Checkpoint, TruncationRejected) {
    ToyModel a(4, 23);
    const std::string bytes = encode_checkpoint(a.state(), {});
    auto s = a.state();
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3), s), CheckpointError);
    EXPECT_THROW(decode_checkpoint(bytes.substr(0, 10), s), CheckpointError);
}

TEST(Checkpoint, ShapeMismatchRejected) {
    ToyModel four(4, 24), five(5, 24);
    const std::string bytes = encode_checkpoint(four.state(), {});
    auto s = five.state();
    EXPECT_THROW(decode_checkpoint(bytes, s), CheckpointError);
}

TEST(Checkpoint, LayoutOnDisk) {
    ToyModel a(2, 25);
    const auto path = std::filesystem::temp_directory_path() / "comets_ckpt_layout.bin";
    save_checkpoint(path, a.state(), {{"k", 1}});
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(bytes.substr(0, 8), "COMETSCK");
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[12 + i])) << (8 * i);
    const auto manifest = nlohmann::json::parse(bytes.substr(20, len));
    EXPECT_EQ(manifest[0]["name"], "dense.weight");
    EXPECT_EQ(manifest[0]["dtype"], "f64");
    EXPECT_EQ(load_checkpoint_config(path).at("k"), 1);
    std::filesystem::remove(path);
}

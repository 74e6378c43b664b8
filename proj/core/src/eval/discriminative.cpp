#include "comets/eval/discriminative.hpp"

#include <algorithm>
#include <cmath>

#include "comets/error.hpp"
#include "comets/nn/layers.hpp"
#include "comets/nn/optim.hpp"

namespace comets::eval {
namespace {

class LstmClassifier {
public:
    LstmClassifier(std::size_t channels, std::size_t hidden, Rng& rng) : hidden_(hidden) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        auto uniform = [&](nn::Shape s) {
            nn::Tensor t(std::move(s));
            for (auto& x : t.storage()) x = (2.0 * uniform01(rng) - 1.0) * bound;
            return t;
        };
        wx_ = nn::Var(uniform({channels, 4 * hidden}), true);
        wh_ = nn::Var(uniform({hidden, 4 * hidden}), true);
        nn::Tensor b({4 * hidden});
        for (std::size_t k = hidden; k < 2 * hidden; ++k) b[k] = 1.0;  // forget gate
        b_ = nn::Var(std::move(b), true);
        head_ = nn::Dense(hidden, 1, false, rng);
    }

    /// x: B windows of L x C -> logits [B].
    nn::Var forward(const std::vector<const Matrix*>& x) {
        const std::size_t batch = x.size(), len = x[0]->rows(), c = x[0]->cols(), h = hidden_;
        const nn::Context ctx;
        nn::Var hs(nn::Tensor({batch, h}));
        nn::Var cs(nn::Tensor({batch, h}));
        for (std::size_t t = 0; t < len; ++t) {
            nn::Tensor xt({batch, c});
            for (std::size_t b = 0; b < batch; ++b) {
                const auto row = x[b]->row(t);
                std::copy(row.begin(), row.end(), xt.data() + b * c);
            }
            const nn::Var gates = nn::add(nn::linear(nn::Var(std::move(xt)), wx_, &b_), nn::linear(hs, wh_));
            const nn::Var i = nn::sigmoid(nn::slice(gates, 1, 0, h));
            const nn::Var f = nn::sigmoid(nn::slice(gates, 1, h, h));
            const nn::Var g = nn::tanh(nn::slice(gates, 1, 2 * h, h));
            const nn::Var o = nn::sigmoid(nn::slice(gates, 1, 3 * h, h));
            cs = nn::add(nn::mul(f, cs), nn::mul(i, g));
            hs = nn::mul(o, nn::tanh(cs));
        }
        return nn::reshape(head_.forward(hs, ctx), {batch});
    }

    std::vector<nn::ParamRef> params() {
        nn::StateList s;
        s.param("wx", wx_);
        s.param("wh", wh_);
        s.param("b", b_);
        head_.collect("head", s);
        return s.params;
    }

private:
    std::size_t hidden_;
    nn::Var wx_, wh_, b_;
    nn::Dense head_;
};

}  // namespace

double score_from_predictions(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size() || labels.empty()) {
        throw ShapeError("score_from_predictions", std::to_string(labels.size()) + " predictions",
                         std::to_string(predicted.size()));
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i];
    return std::abs(static_cast<double>(correct) / static_cast<double>(labels.size()) - 0.5);
}

double discriminative_score(const std::vector<Matrix>& real, const std::vector<Matrix>& synthetic,
                            const DiscriminativeConfig& config) {
    if (real.size() < 20 || synthetic.size() < 20) {
        throw SpecificationError("discriminative score needs at least 20 windows per side");
    }
    const std::size_t len = real[0].rows(), c = real[0].cols();
    for (const auto* set : {&real, &synthetic})
        for (const auto& w : *set)
            if (w.rows() != len || w.cols() != c) {
                throw ShapeError("discriminative_score window", nn::shape_str({len, c}),
                                 nn::shape_str({w.rows(), w.cols()}));
            }
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw SpecificationError("train fraction must be in (0, 1)");
    }

    Rng split_rng = make_rng(config.seed, "split");
    auto split = [&](std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(split_rng, i)]);
        const auto cut = static_cast<std::size_t>(std::round(config.train_fraction * static_cast<double>(n)));
        return std::pair{std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut)),
                         std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end())};
    };
    const auto [real_train, real_test] = split(real.size());
    const auto [syn_train, syn_test] = split(synthetic.size());
    if (real_train.size() != syn_train.size() || real_test.size() != syn_test.size() || real_test.empty()) {
        throw SpecificationError("class imbalance after the train/test split (" + std::to_string(real.size()) +
                                 " real vs " + std::to_string(synthetic.size()) + " synthetic windows)");
    }

    std::vector<std::pair<const Matrix*, double>> train;
    for (std::size_t i : real_train) train.emplace_back(&real[i], 1.0);
    for (std::size_t i : syn_train) train.emplace_back(&synthetic[i], 0.0);

    Rng rng = make_rng(config.seed, "classifier");
    LstmClassifier model(c, config.hidden.value_or(std::max<std::size_t>(8, c / 2)), rng);
    nn::Adam opt(model.params(), {config.lr, 0.9, 0.999, 1e-8});
    const std::size_t batch = std::min(config.batch_size, train.size());
    for (std::size_t step = 1; step <= config.train_steps; ++step) {
        std::vector<const Matrix*> xs(batch);
        std::vector<double> ys(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            const auto& item = train[uniform_index(rng, train.size())];
            xs[b] = item.first;
            ys[b] = item.second;
        }
        const nn::Var loss = nn::bce_with_logits(model.forward(xs), ys);
        if (!std::isfinite(loss.item())) throw NumericalError(step, "classifier loss is not finite");
        nn::backward(loss);
        opt.step(step);
        opt.zero_grad();
    }

    std::vector<const Matrix*> xs;
    std::vector<int> labels;
    for (std::size_t i : real_test) {
        xs.push_back(&real[i]);
        labels.push_back(1);
    }
    for (std::size_t i : syn_test) {
        xs.push_back(&synthetic[i]);
        labels.push_back(0);
    }
    nn::NoGradGuard guard;
    const auto logits = model.forward(xs).value().storage();
    std::vector<int> predicted(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) predicted[i] = logits[i] > 0.0 ? 1 : 0;
    return score_from_predictions(predicted, labels);
}

}  // namespace comets::eval

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/eval/report.hpp"
#include "comets/rng.hpp"
#include "comets/ts/synthetic.hpp"
#include "oracles.hpp"

using namespace comets;
using namespace comets::eval;
using comets::testing::oracle_pearson;
using comets::testing::oracle_wasserstein;

namespace {

std::vector<double> normals(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = standard_normal(rng);
    return v;
}

ts::MultivariateSeries raw_series(const Matrix& values) {
    ts::MultivariateSeries s;
    s.values = values;
    s.channels = ts::raw_layout(values.cols());
    return s;
}

ts::MultivariateSeries market(std::size_t days, std::size_t assets, std::uint64_t seed) {
    Rng rng(seed);
    ts::MultivariateSeries s;
    std::vector<std::string> tickers;
    for (std::size_t k = 0; k < assets; ++k) tickers.push_back("S" + std::to_string(k));
    s.channels = ts::stock_layout(tickers);
    s.values = Matrix(days * ts::kSessionMinutes, 2 * assets);
    std::vector<double> price(assets, 100.0);
    for (std::size_t t = 0; t < s.values.rows(); ++t) {
        const double common = standard_normal(rng);
        for (std::size_t k = 0; k < assets; ++k) {
            const double r = 0.001 * (0.7 * common + 0.7 * standard_normal(rng));
            price[k] *= std::exp(r);
            s.values(t, 2 * k) = price[k];
            s.values(t, 2 * k + 1) = 100 + 1e5 * std::abs(r) + 10 * uniform01(rng);
        }
    }
    return s;
}

}  // namespace

TEST(Pearson, Identities) {
    Rng rng(1);
    const auto x = normals(50, rng);
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    EXPECT_NEAR(pearson(x, x), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
    EXPECT_EQ(pearson(x, std::vector<double>(50, 2.0)), 0.0);
    EXPECT_THROW(pearson(x, std::vector<double>(3, 1.0)), ShapeError);
}

TEST(Pearson, SmallHandCase) {
    const std::vector<double> x{1, 2, 4}, y{1, 3, 5};
    // Means 7/3 and 3: sum of cross deviations 6, squared deviations 14/3 and 8.
    EXPECT_NEAR(pearson(x, y), 6.0 / std::sqrt(14.0 / 3.0 * 8.0), 1e-15);
    EXPECT_NEAR(pearson(x, y), static_cast<double>(oracle_pearson(x, y)), 1e-15);
}

TEST(Pearson, RandomOracleAndAffineInvariance) {
    Rng rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 60);
        const auto x = normals(n, rng), y = normals(n, rng);
        const double r = pearson(x, y);
        ASSERT_NEAR(r, static_cast<double>(oracle_pearson(x, y)), 1e-9);
        const double a = 0.01 + 10 * uniform01(rng), b = 5 * standard_normal(rng);
        std::vector<double> z(n);
        std::transform(x.begin(), x.end(), z.begin(), [&](double v) { return a * v + b; });
        ASSERT_NEAR(pearson(z, y), r, 1e-9);
    }
}

TEST(CrossCorrelationDistance, ArithmeticAndSymmetry) {
    EXPECT_NEAR(std::pow(0.94 - 0.90, 2), 0.0016, 1e-15);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 30);
        const auto a = normals(n, rng), b = normals(n, rng), c = normals(n, rng), d = normals(n, rng);
        const double dist = cross_correlation_distance(a, b, c, d);
        const double oracle = std::pow(static_cast<double>(oracle_pearson(a, b) - oracle_pearson(c, d)), 2);
        ASSERT_NEAR(dist, oracle, 1e-9);
        ASSERT_NEAR(dist, cross_correlation_distance(c, d, a, b), 1e-15);
        ASSERT_LE(dist, 4.0);
        ASSERT_EQ(cross_correlation_distance(a, b, a, b), 0.0);
    }
}

TEST(WindowedCorrelations, CountsAndLinearPairs) {
    Matrix m(100, 2);
    for (std::size_t t = 0; t < 100; ++t) m(t, 0) = std::sin(0.3 * t), m(t, 1) = 2 * std::sin(0.3 * t) + 1;
    EXPECT_EQ(windowed_correlations(m, 0, 1, {100, 100}).size(), 1u);
    const auto vals = windowed_correlations(m, 0, 1, {10, 3});
    EXPECT_EQ(vals.size(), (100u - 10u) / 3u + 1u);
    for (double v : vals) EXPECT_NEAR(v, 1.0, 1e-12);
    EXPECT_THROW(windowed_correlations(m, 0, 1, {101, 1}), SpecificationError);
    EXPECT_THROW(windowed_correlations(m, 0, 1, {1, 1}), SpecificationError);
}

TEST(WindowedCorrelations, RandomOracle) {
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t t = 10 + uniform_index(rng, 60), w = 2 + uniform_index(rng, t - 1), s = 1 + uniform_index(rng, 7);
        Matrix m(t, 3);
        for (auto& v : m.data()) v = standard_normal(rng);
        const auto got = windowed_correlations(m, 0, 2, {w, s});
        std::vector<double> want;
        for (std::size_t start = 0; start + w <= t; start += s) {
            std::vector<double> a, b;
            for (std::size_t r = start; r < start + w; ++r) a.push_back(m(r, 0)), b.push_back(m(r, 2));
            want.push_back(static_cast<double>(oracle_pearson(a, b)));
        }
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t k = 0; k < got.size(); ++k) ASSERT_NEAR(got[k], want[k], 1e-9);
    }
}

TEST(Wasserstein, BasicCases) {
    EXPECT_EQ(wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{1.0}), 1.0);
    EXPECT_EQ(wasserstein_1d(std::vector<double>{3, 1, 2}, std::vector<double>{2, 3, 1}), 0.0);
    EXPECT_THROW(wasserstein_1d({}, std::vector<double>{1.0}), SpecificationError);
}

TEST(Wasserstein, OracleAndMetricAxioms) {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = normals(1 + uniform_index(rng, 100), rng);
        const auto b = normals(1 + uniform_index(rng, 100), rng);
        const auto c = normals(1 + uniform_index(rng, 100), rng);
        const double ab = wasserstein_1d(a, b), bc = wasserstein_1d(b, c), ac = wasserstein_1d(a, c);
        ASSERT_NEAR(ab, oracle_wasserstein(a, b), 1e-9);
        ASSERT_NEAR(ab, wasserstein_1d(b, a), 1e-12);
        ASSERT_LE(ac, ab + bc + 1e-9);
        ASSERT_EQ(wasserstein_1d(a, a), 0.0);
    }
}

TEST(Benchmark, IdenticalSeriesGiveZeroDistances) {
    Rng rng(6);
    Matrix m(800, 4);
    for (auto& v : m.data()) v = standard_normal(rng);
    const auto table = correlation_benchmark(m, m, {100, 100});
    EXPECT_EQ(table.size(), 6u);
    for (const auto& p : table) EXPECT_EQ(p.value, 0.0);
    for (const auto& p : cross_correlation_table(m, m)) EXPECT_EQ(p.value, 0.0);
    EXPECT_THROW(correlation_benchmark(m, Matrix(800, 3), {100, 100}), ShapeError);
}

TEST(Stylized, KurtosisAndJarqueBeraOracles) {
    const std::vector<double> x{1, 2, 3, 4, 10};
    const double m = 4.0;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) m2 += std::pow(v - m, 2) / 5, m3 += std::pow(v - m, 3) / 5, m4 += std::pow(v - m, 4) / 5;
    const double k = m4 / (m2 * m2) - 3, s = m3 / std::pow(m2, 1.5);
    EXPECT_NEAR(excess_kurtosis(x), k, 1e-12);
    EXPECT_NEAR(jarque_bera(x), 5.0 / 6.0 * (s * s + k * k / 4), 1e-12);
}

TEST(Stylized, AutocorrelationOracle) {
    Rng rng(7);
    const auto x = normals(200, rng);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 200;
    double num = 0, den = 0;
    for (std::size_t t = 0; t < 200; ++t) den += (x[t] - mean) * (x[t] - mean);
    for (std::size_t t = 0; t + 3 < 200; ++t) num += (x[t] - mean) * (x[t + 3] - mean);
    EXPECT_NEAR(autocorrelation(x, 3), num / den, 1e-12);
    EXPECT_EQ(autocorrelation(std::vector<double>(10, 1.0), 1), 0.0);
}

TEST(Stylized, GaussianFixtureIsThinTailedAndUncorrelated) {
    Rng rng(8);
    const std::size_t days = 400;
    Matrix m(days * 390, 1);
    for (auto& v : m.data()) v = standard_normal(rng);
    const auto facts = stylized_facts(raw_series(m), {});
    ASSERT_EQ(facts.size(), 1u);
    for (const auto& h : facts[0].horizons) EXPECT_LE(std::abs(h.excess_kurtosis), 0.3) << h.horizon;
    for (const auto& lag : facts[0].return_autocorr) EXPECT_LE(std::abs(lag.pooled), facts[0].autocorr_band) << lag.lag;
    EXPECT_NEAR(facts[0].autocorr_band, 2.0 / std::sqrt(days * 390.0), 1e-12);
}

TEST(Stylized, StudentTFixtureIsFatTailedAndAggregates) {
    Rng rng(9);
    Matrix m(200 * 390, 1);
    for (auto& v : m.data()) {
        double chi = 0;
        for (int k = 0; k < 3; ++k) chi += std::pow(standard_normal(rng), 2);
        v = standard_normal(rng) / std::sqrt(chi / 3);
    }
    const auto f = stylized_facts(raw_series(m), {})[0];
    EXPECT_GT(f.horizons.front().excess_kurtosis, 1.0);
    EXPECT_LT(f.horizons.back().excess_kurtosis, f.horizons.front().excess_kurtosis);
    EXPECT_TRUE(f.aggregational_normality);
}

TEST(Stylized, VolumeTracksVolatility) {
    const auto s = market(6, 1, 10);
    const auto facts = stylized_facts(s, {});
    ASSERT_EQ(facts.size(), 1u);
    ASSERT_TRUE(facts[0].volume_volatility_mean.has_value());
    EXPECT_GT(*facts[0].volume_volatility_mean, 0.3);
    EXPECT_GE(facts[0].volume_volatility.size(), 2u);
    EXPECT_FALSE(facts[0].volatility_autocorr.empty());
}

TEST(Stylized, InsufficientDataNamesStatistic) {
    Matrix m(20, 1, 0.0);
    for (std::size_t t = 0; t < 20; ++t) m(t, 0) = std::sin(static_cast<double>(t));
    try {
        stylized_facts(raw_series(m), {});
        FAIL();
    } catch (const SpecificationError& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient data"), std::string::npos);
    }
}

TEST(Discriminative, ConstantPredictorScoresZero) {
    const std::vector<int> labels{0, 1, 0, 1, 1, 0};
    EXPECT_EQ(score_from_predictions(std::vector<int>(6, 1), labels), 0.0);
    EXPECT_EQ(score_from_predictions(labels, labels), 0.5);
}

TEST(Discriminative, PreconditionsAndDeterminism) {
    Rng rng(11);
    auto windows = [&](std::size_t n, double scale) {
        std::vector<Matrix> out;
        for (std::size_t i = 0; i < n; ++i) {
            Matrix m(10, 2);
            for (auto& v : m.data()) v = scale * standard_normal(rng);
            out.push_back(m);
        }
        return out;
    };
    const auto a = windows(30, 1.0), b = windows(30, 3.0);
    EXPECT_THROW(discriminative_score(windows(10, 1.0), windows(10, 1.0)), SpecificationError);
    EXPECT_THROW(discriminative_score(a, windows(25, 1.0)), SpecificationError);
    DiscriminativeConfig cfg;
    cfg.train_steps = 30;
    cfg.seed = 3;
    const double s1 = discriminative_score(a, b, cfg);
    EXPECT_EQ(s1, discriminative_score(a, b, cfg));
    EXPECT_GE(s1, 0.0);
    EXPECT_LE(s1, 0.5);
}

TEST(Report, SelfComparisonAndSchema) {
    const auto s = market(4, 2, 12);
    EvaluationConfig cfg;
    cfg.include_discriminative = false;
    const auto report = evaluate(s, s, cfg);
    EXPECT_EQ(report.pairs.size(), 6u);
    EXPECT_EQ(report.mean_cross_correlation_distance, 0.0);
    for (const auto& p : report.pairs) {
        EXPECT_EQ(p.cross_correlation_distance, 0.0);
        EXPECT_EQ(p.windowed_wasserstein, 0.0);
    }
    const auto j = report.to_json();
    EXPECT_TRUE(j.contains("stylized_facts"));
    EXPECT_TRUE(j.contains("correlation"));
    const auto dir = std::filesystem::temp_directory_path() / "comets_figures_test";
    std::filesystem::remove_all(dir);
    write_figure_data(dir, s, s, report, cfg);
    EXPECT_TRUE(std::filesystem::exists(dir / "windowed_correlations.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "kurtosis.csv"));
    std::filesystem::remove_all(dir);
}

TEST(Report, LayoutMismatchRejected) {
    EXPECT_THROW(evaluate(market(2, 2, 13), market(2, 1, 13), {}), SpecificationError);
}

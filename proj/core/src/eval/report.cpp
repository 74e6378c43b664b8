#include "comets/eval/report.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "comets/error.hpp"
#include "comets/io.hpp"
#include "comets/ts/segment.hpp"

namespace comets::eval {
namespace {

std::vector<Matrix> classifier_windows(const Matrix& values, std::size_t window, const std::vector<double>& mean,
                                       const std::vector<double>& scale) {
    std::vector<Matrix> out = ts::windows(values, window, window);
    for (auto& w : out)
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = (w(r, c) - mean[c]) / scale[c];
    return out;
}

void check_layout(const ts::MultivariateSeries& real, const ts::MultivariateSeries& synthetic) {
    if (real.channel_count() != synthetic.channel_count()) {
        throw SpecificationError("channel layouts differ: real has " + std::to_string(real.channel_count()) +
                                 " channels, synthetic has " + std::to_string(synthetic.channel_count()));
    }
    for (std::size_t c = 0; c < real.channel_count(); ++c) {
        if (!(real.channels.at(c) == synthetic.channels.at(c))) {
            throw SpecificationError("channel layouts differ at column " + std::to_string(c) + " (" +
                                     ts::channel_name(real.channels[c]) + " vs " +
                                     ts::channel_name(synthetic.channels[c]) + ")");
        }
    }
}

std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

}  // namespace

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json j;
    auto facts = [](const std::vector<AssetFacts>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& f : v) a.push_back(f.to_json());
        return a;
    };
    j["stylized_facts"] = {{"real", facts(real_facts)}, {"synthetic", facts(synthetic_facts)}};
    j["correlation"] = nlohmann::json::array();
    for (const auto& p : pairs) {
        j["correlation"].push_back({{"pair", p.pair},
                                    {"i", p.i},
                                    {"j", p.j},
                                    {"real_corr", p.real_corr},
                                    {"synthetic_corr", p.synthetic_corr},
                                    {"cross_correlation_distance", p.cross_correlation_distance},
                                    {"windowed_wasserstein", p.windowed_wasserstein}});
    }
    j["mean_cross_correlation_distance"] = mean_cross_correlation_distance;
    j["discriminative_score"] = discriminative_score ? nlohmann::json(*discriminative_score) : nlohmann::json();
    return j;
}

EvaluationReport evaluate(const ts::MultivariateSeries& real, const ts::MultivariateSeries& synthetic,
                          const EvaluationConfig& config) {
    check_layout(real, synthetic);
    EvaluationReport r;
    if (config.include_stylized) {
        r.real_facts = stylized_facts(real, config.stylized);
        r.synthetic_facts = stylized_facts(synthetic, config.stylized);
    }
    const std::size_t c = real.channel_count();
    double total = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = i + 1; j < c; ++j) {
            PairReport p;
            p.pair = ts::channel_name(real.channels[i]) + "~" + ts::channel_name(real.channels[j]);
            p.i = i;
            p.j = j;
            const auto ri = real.values.column(i), rj = real.values.column(j);
            const auto si = synthetic.values.column(i), sj = synthetic.values.column(j);
            p.real_corr = pearson(ri, rj);
            p.synthetic_corr = pearson(si, sj);
            p.cross_correlation_distance = (p.real_corr - p.synthetic_corr) * (p.real_corr - p.synthetic_corr);
            p.windowed_wasserstein = wasserstein_1d(windowed_correlations(real.values, i, j, config.correlation),
                                                    windowed_correlations(synthetic.values, i, j, config.correlation));
            total += p.cross_correlation_distance;
            r.pairs.push_back(std::move(p));
        }
    }
    r.mean_cross_correlation_distance = r.pairs.empty() ? 0.0 : total / static_cast<double>(r.pairs.size());

    if (config.include_discriminative) {
        std::vector<double> mean(c), scale(c);
        for (std::size_t k = 0; k < c; ++k) {
            const auto col = real.values.column(k);
            double m = 0.0, ss = 0.0;
            for (double v : col) m += v;
            m /= static_cast<double>(col.size());
            for (double v : col) ss += (v - m) * (v - m);
            const double sd = std::sqrt(ss / static_cast<double>(col.size()));
            mean[k] = m;
            scale[k] = sd > 0.0 ? sd : 1.0;
        }
        auto rw = classifier_windows(real.values, config.discriminative_window, mean, scale);
        auto sw = classifier_windows(synthetic.values, config.discriminative_window, mean, scale);
        const std::size_t n = std::min(rw.size(), sw.size());
        if (n < 20) {
            throw SpecificationError("discriminative score needs 20 windows of " +
                                     std::to_string(config.discriminative_window) + " rows per side, got " +
                                     std::to_string(n));
        }
        rw.resize(n);
        sw.resize(n);
        r.discriminative_score = discriminative_score(rw, sw, config.discriminative);
    }
    return r;
}

void write_figure_data(const std::filesystem::path& dir, const ts::MultivariateSeries& real,
                       const ts::MultivariateSeries& synthetic, const EvaluationReport& report,
                       const EvaluationConfig& config) {
    {
        std::string csv = join({"pair", "source", "window", "corr"});
        for (const auto& p : report.pairs) {
            for (const auto* s : {&real, &synthetic}) {
                const auto v = windowed_correlations(s->values, p.i, p.j, config.correlation);
                for (std::size_t k = 0; k < v.size(); ++k) {
                    csv += join({p.pair, s == &real ? "real" : "synthetic", std::to_string(k), format_double(v[k])});
                }
            }
        }
        write_file_atomic(dir / "windowed_correlations.csv", csv);
    }
    if (!config.include_stylized) return;
    std::string autocorr = join({"asset", "source", "lag", "day", "autocorr"});
    std::string volatility = join({"asset", "source", "lag", "autocorr"});
    std::string volvol = join({"asset", "source", "window", "corr"});
    std::string kurt = join({"asset", "source", "horizon", "samples", "excess_kurtosis", "jarque_bera"});
    for (const auto* set : {&report.real_facts, &report.synthetic_facts}) {
        const std::string src = set == &report.real_facts ? "real" : "synthetic";
        for (const auto& f : *set) {
            for (const auto& a : f.return_autocorr)
                for (std::size_t d = 0; d < a.per_day.size(); ++d)
                    autocorr += join({f.asset, src, std::to_string(a.lag), std::to_string(d), format_double(a.per_day[d])});
            for (const auto& v : f.volatility_autocorr)
                volatility += join({f.asset, src, std::to_string(v.lag), format_double(v.value)});
            for (std::size_t w = 0; w < f.volume_volatility.size(); ++w)
                volvol += join({f.asset, src, std::to_string(w), format_double(f.volume_volatility[w])});
            for (const auto& h : f.horizons)
                kurt += join({f.asset, src, std::to_string(h.horizon), std::to_string(h.samples),
                              format_double(h.excess_kurtosis), format_double(h.jarque_bera)});
        }
    }
    write_file_atomic(dir / "return_autocorrelation.csv", autocorr);
    write_file_atomic(dir / "volatility_autocorrelation.csv", volatility);
    write_file_atomic(dir / "volume_volatility.csv", volvol);
    write_file_atomic(dir / "kurtosis.csv", kurt);
}

}  // namespace comets::eval

#include "comets/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "comets/error.hpp"

namespace comets::eval {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("pearson", std::to_string(x.size()) + " samples", std::to_string(y.size()) + " samples");
    }
    if (x.size() < 2) throw SpecificationError("pearson needs at least two samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // Spread at rounding level of the mean counts as constant.
    const double tx = n * 1e-28 * mx * mx, ty = n * 1e-28 * my * my;
    if (!(sxx > tx) || !(syy > ty)) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cross_correlation_distance(std::span<const double> real_a, std::span<const double> real_b,
                                  std::span<const double> syn_a, std::span<const double> syn_b) {
    const double d = pearson(real_a, real_b) - pearson(syn_a, syn_b);
    return d * d;
}

void CorrelationWindowSpec::validate() const {
    if (window < 2) throw SpecificationError("correlation window must be >= 2");
    if (stride < 1) throw SpecificationError("correlation stride must be >= 1");
}

std::vector<double> windowed_correlations(const Matrix& series, std::size_t i, std::size_t j,
                                          const CorrelationWindowSpec& spec) {
    spec.validate();
    if (i >= series.cols() || j >= series.cols()) throw SpecificationError("correlation channel out of range");
    if (series.rows() < spec.window) {
        throw SpecificationError("series has " + std::to_string(series.rows()) + " rows, window needs " +
                                 std::to_string(spec.window));
    }
    const auto a = series.column(i), b = series.column(j);
    std::vector<double> out;
    for (std::size_t s = 0; s + spec.window <= series.rows(); s += spec.stride) {
        out.push_back(pearson(std::span(a).subspan(s, spec.window), std::span(b).subspan(s, spec.window)));
    }
    return out;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw SpecificationError("wasserstein_1d needs non-empty samples");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    // Integrate |F_a - F_b| between consecutive points of the merged support.
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double prev = std::min(x[0], y[0]), total = 0.0;
    while (i < x.size() || j < y.size()) {
        const double next = j >= y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
        prev = next;
        while (i < x.size() && x[i] == next) ++i;
        while (j < y.size() && y[j] == next) ++j;
    }
    return total;
}

std::vector<PairDistance> correlation_benchmark(const Matrix& real, const Matrix& synthetic,
                                                const CorrelationWindowSpec& spec) {
    if (real.cols() != synthetic.cols()) {
        throw ShapeError("correlation_benchmark", std::to_string(real.cols()) + " channels",
                         std::to_string(synthetic.cols()) + " channels");
    }
    std::vector<PairDistance> out;
    for (std::size_t i = 0; i < real.cols(); ++i)
        for (std::size_t j = i + 1; j < real.cols(); ++j) {
            out.push_back({i, j,
                           wasserstein_1d(windowed_correlations(real, i, j, spec),
                                          windowed_correlations(synthetic, i, j, spec))});
        }
    return out;
}

std::vector<PairDistance> cross_correlation_table(const Matrix& real, const Matrix& synthetic) {
    if (real.cols() != synthetic.cols()) {
        throw ShapeError("cross_correlation_table", std::to_string(real.cols()) + " channels",
                         std::to_string(synthetic.cols()) + " channels");
    }
    std::vector<PairDistance> out;
    for (std::size_t i = 0; i < real.cols(); ++i)
        for (std::size_t j = i + 1; j < real.cols(); ++j) {
            out.push_back({i, j,
                           cross_correlation_distance(real.column(i), real.column(j), synthetic.column(i),
                                                      synthetic.column(j))});
        }
    return out;
}

}  // namespace comets::eval

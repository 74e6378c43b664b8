#pragma once

#include <span>
#include <string>
#include <vector>

#include "comets/matrix.hpp"

namespace comets::eval {

/// Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// (rho(real_a, real_b) - rho(syn_a, syn_b))^2.
double cross_correlation_distance(std::span<const double> real_a, std::span<const double> real_b,
                                  std::span<const double> syn_a, std::span<const double> syn_b);

struct CorrelationWindowSpec {
    std::size_t window = 390;
    std::size_t stride = 390;

    void validate() const;
};

/// Pearson of channels (i, j) over windows starting at 0, stride, 2*stride, ...
/// floor((T - window) / stride) + 1 values.
std::vector<double> windowed_correlations(const Matrix& series, std::size_t i, std::size_t j,
                                          const CorrelationWindowSpec& spec);

/// Order-1 Wasserstein distance between two empirical distributions.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

struct PairDistance {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
};

/// Per channel pair: Wasserstein distance between the real and synthetic
/// windowed-correlation distributions.
std::vector<PairDistance> correlation_benchmark(const Matrix& real, const Matrix& synthetic,
                                                const CorrelationWindowSpec& spec);

/// Per channel pair: cross-correlation distance over the full series.
std::vector<PairDistance> cross_correlation_table(const Matrix& real, const Matrix& synthetic);

}  // namespace comets::eval

#include "comets/ts/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "comets/error.hpp"
#include "comets/rng.hpp"

namespace comets::ts {

void SyntheticDatasetSpec::validate() const {
    if (channels < 1) throw SpecificationError("synthetic dataset needs at least one channel");
    if (length < 1) throw SpecificationError("synthetic dataset needs length >= 1");
    if (kind == SyntheticKind::Sines) {
        if (frequencies) {
            if (frequencies->size() != channels) {
                throw SpecificationError("expected " + std::to_string(channels) + " frequencies");
            }
            for (double eta : *frequencies) {
                if (!(eta >= 0.0 && eta <= 1.0)) throw SpecificationError("frequency outside [0, 1]");
            }
        }
        if (phases) {
            if (phases->size() != channels) {
                throw SpecificationError("expected " + std::to_string(channels) + " phases");
            }
            for (double th : *phases) {
                if (!(th >= -std::numbers::pi && th <= std::numbers::pi)) {
                    throw SpecificationError("phase outside [-pi, pi]");
                }
            }
        }
        return;
    }
    if (!(phi >= 0.0 && phi <= 1.0)) throw SpecificationError("phi outside [0, 1]");
    if (!(sigma >= -1.0 && sigma <= 1.0)) throw SpecificationError("sigma outside [-1, 1]");
    if (channels > 1) {
        const double floor = -1.0 / static_cast<double>(channels - 1);
        if (sigma < floor) {
            throw SpecificationError("noise covariance is not positive semidefinite (PSD): sigma " +
                                     std::to_string(sigma) + " < -1/(channels-1) = " +
                                     std::to_string(floor));
        }
    }
}

MultivariateSeries generate_sines(const SyntheticDatasetSpec& spec) {
    if (spec.kind != SyntheticKind::Sines) throw SpecificationError("generate_sines: kind is not Sines");
    spec.validate();
    Rng rng = make_rng(spec.seed, "sines");
    std::vector<double> eta(spec.channels), theta(spec.channels);
    for (std::size_t i = 0; i < spec.channels; ++i) {
        eta[i] = uniform01(rng);
        theta[i] = -std::numbers::pi + 2.0 * std::numbers::pi * uniform01(rng);
    }
    if (spec.frequencies) eta = *spec.frequencies;
    if (spec.phases) theta = *spec.phases;

    MultivariateSeries out;
    out.values = Matrix(spec.length, spec.channels);
    out.channels = raw_layout(spec.channels);
    for (std::size_t t = 0; t < spec.length; ++t) {
        for (std::size_t i = 0; i < spec.channels; ++i) {
            out.values(t, i) =
                std::sin(2.0 * std::numbers::pi * eta[i] * static_cast<double>(t) + theta[i]);
        }
    }
    return out;
}

MultivariateSeries generate_gaussian_ar(const SyntheticDatasetSpec& spec) {
    if (spec.kind != SyntheticKind::GaussianAR) {
        throw SpecificationError("generate_gaussian_ar: kind is not GaussianAR");
    }
    spec.validate();
    const std::size_t c = spec.channels;
    const double cd = static_cast<double>(c);
    // q = sqrt(1-sigma) e + k s 1 with s = sum(e)/sqrt(C) has covariance (1-sigma) I + sigma J
    // when k^2 + 2k sqrt((1-sigma)/C) - sigma = 0. Real roots exist iff sigma >= -1/(C-1).
    const double a = std::sqrt(1.0 - spec.sigma);
    const double b = std::sqrt((1.0 - spec.sigma) / cd);
    const double k = -b + std::sqrt(std::max(0.0, b * b + spec.sigma));

    Rng rng = make_rng(spec.seed, "gaussian_ar");
    MultivariateSeries out;
    out.values = Matrix(spec.length, c);
    out.channels = raw_layout(c);
    std::vector<double> e(c), prev(c, 0.0);
    for (std::size_t t = 0; t < spec.length; ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            e[i] = standard_normal(rng);
            s += e[i];
        }
        s /= std::sqrt(cd);
        for (std::size_t i = 0; i < c; ++i) {
            const double q = a * e[i] + k * s;
            const double g = (t == 0) ? q : spec.phi * prev[i] + q;
            out.values(t, i) = g;
            prev[i] = g;
        }
    }
    return out;
}

MultivariateSeries generate_synthetic(const SyntheticDatasetSpec& spec) {
    return spec.kind == SyntheticKind::Sines ? generate_sines(spec) : generate_gaussian_ar(spec);
}

}  // namespace comets::ts

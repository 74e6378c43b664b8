#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "comets/ts/series.hpp"

namespace comets::ts {

struct ChannelTransform {
    ChannelKind kind = ChannelKind::Raw;
    // Price: statistics of log-returns and the raw prices bracketing the fit window.
    double mean = 0.0;
    double std = 1.0;
    double first_price = 0.0;
    double last_price = 0.0;
    // Volume: min-max range.
    double min = 0.0;
    double max = 1.0;
};

/// Everything needed to map between raw prices/volumes and the model space.
struct PreprocessState {
    std::vector<ChannelTransform> channels;

    nlohmann::json to_json() const;
    static PreprocessState from_json(const nlohmann::json& j);
};

/// Fits z-score statistics of log-returns (prices) and min-max ranges (volumes).
/// Raw channels pass through unchanged.
PreprocessState fit_preprocess(const MultivariateSeries& series);

/// Prices -> z-scored log-returns, volumes -> [-1, 1]. The first row is dropped
/// from every channel so the output has T-1 aligned rows.
MultivariateSeries apply_preprocess(const MultivariateSeries& series, const PreprocessState& state);

enum class InvertAnchor {
    Start,         // rebuild the fitted series from its first raw price
    Continuation,  // continue after the fitted series from its last raw price
};

/// Inverse of apply_preprocess. Prices are rebuilt by cumulative exponentiation
/// from the anchor (explicit `anchor_prices`, one per price channel, take
/// precedence). Volumes map back to [min, max] and are clamped at 0.
MultivariateSeries invert_preprocess(const MultivariateSeries& series, const PreprocessState& state,
                                     InvertAnchor anchor = InvertAnchor::Continuation,
                                     std::span<const double> anchor_prices = {});

}  // namespace comets::ts

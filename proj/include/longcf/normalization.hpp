#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"

namespace longcf {

enum class ScaleKind { Mad, Aad, ChangeRate, CrossSectionalMad };

enum class CategoricalRateMode { PerFeature, PerTransition };

/// Per-feature scale constant. For categorical features in per-transition
/// mode, transition_rates holds the observed rate of each specific
/// from->to change; value keeps the overall change rate as fallback.
struct FeatureScale {
    ScaleKind kind = ScaleKind::Mad;
    double value = 0.0;
    std::unordered_map<std::uint64_t, double> transition_rates;

    static std::uint64_t key(std::int32_t from, std::int32_t to) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
               static_cast<std::uint32_t>(to);
    }
};

/// Scale constants for every schema feature plus the division-by-zero
/// tolerance. The effective divisor is always (scale + tolerance): a feature
/// that never changes gets scale 0, so any change to it costs 1/tolerance.
struct NormalizationProfile {
    std::vector<FeatureScale> scales;
    double tolerance = 1e-5;

    void validate(std::size_t n_features) const {
        if (scales.size() != n_features)
            raise(errc::schema_mismatch, "profile has " + std::to_string(scales.size()) +
                                             " scales for " + std::to_string(n_features) +
                                             " features");
        if (tolerance < 0) raise(errc::invalid_argument, "tolerance must be >= 0");
        for (const auto& s : scales)
            if (!(s.value >= 0))
                raise(errc::invalid_argument, "scale values must be >= 0");
    }
};

/// median(|v - median(v)|), the standard median absolute deviation.
inline double mad_of_column(std::vector<double> values) {
    if (values.empty()) raise(errc::empty_input, "mad_of_column");
    auto median = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double m = median(values);
    for (double& v : values) v = std::abs(v - m);
    return median(values);
}

/// mean(|delta|): average absolute deviation about zero. Zero iff the column
/// never changed, which is exactly the case the big-distance detection keys on.
inline double aad_of_column(const std::vector<double>& deltas) {
    if (deltas.empty()) raise(errc::empty_input, "aad_of_column");
    double sum = 0.0;
    for (double d : deltas) sum += std::abs(d);
    return sum / static_cast<double>(deltas.size());
}

/// Fraction of records in which the level changed.
inline double change_rate(const std::vector<DiffCell>& transitions) {
    if (transitions.empty()) raise(errc::empty_input, "change_rate");
    std::size_t changed = 0;
    for (const auto& t : transitions)
        if (t.changed_level()) ++changed;
    return static_cast<double>(changed) / static_cast<double>(transitions.size());
}

/// Builds the longitudinal profile: continuous features get the chosen
/// dispersion of their delta column, categorical features their change rate.
inline NormalizationProfile build_profile(const DiffMatrix& diffs, ScaleKind continuous_kind,
                                          double tolerance,
                                          CategoricalRateMode rate_mode =
                                              CategoricalRateMode::PerFeature) {
    if (diffs.rows.empty()) raise(errc::empty_input, "build_profile: no difference records");
    if (continuous_kind != ScaleKind::Mad && continuous_kind != ScaleKind::Aad)
        raise(errc::invalid_argument, "continuous scale kind must be MAD or AAD");

    NormalizationProfile profile;
    profile.tolerance = tolerance;
    const std::size_t d = diffs.schema.size();
    const std::size_t n = diffs.rows.size();
    profile.scales.resize(d);

    for (std::size_t j = 0; j < d; ++j) {
        FeatureScale& s = profile.scales[j];
        if (diffs.schema.at(j).is_continuous()) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = diffs.rows[i][j].delta;
            s.kind = continuous_kind;
            s.value = continuous_kind == ScaleKind::Mad ? mad_of_column(std::move(col))
                                                        : aad_of_column(col);
        } else {
            std::vector<DiffCell> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = diffs.rows[i][j];
            s.kind = ScaleKind::ChangeRate;
            s.value = change_rate(col);
            if (rate_mode == CategoricalRateMode::PerTransition) {
                std::unordered_map<std::uint64_t, std::size_t> counts;
                for (const auto& t : col)
                    if (t.changed_level()) ++counts[FeatureScale::key(t.from, t.to)];
                for (const auto& [k, c] : counts)
                    s.transition_rates[k] =
                        static_cast<double>(c) / static_cast<double>(n);
            }
        }
    }
    profile.validate(d);
    return profile;
}

/// Cross-sectional profile for the proximity objective: MAD of each training
/// feature column, not of the longitudinal differences.
inline NormalizationProfile build_cross_profile(const Dataset& data, double tolerance) {
    if (data.rows.empty()) raise(errc::empty_input, "build_cross_profile: no rows");
    NormalizationProfile profile;
    profile.tolerance = tolerance;
    profile.scales.resize(data.schema.size());
    for (std::size_t j = 0; j < data.schema.size(); ++j) {
        profile.scales[j].kind = ScaleKind::CrossSectionalMad;
        if (data.schema.at(j).is_continuous()) {
            std::vector<double> col(data.rows.size());
            for (std::size_t i = 0; i < data.rows.size(); ++i) col[i] = data.rows[i].real(j);
            profile.scales[j].value = mad_of_column(std::move(col));
        }
        // categorical features contribute a plain 0/1 indicator in proximity;
        // no scale needed
    }
    profile.validate(data.schema.size());
    return profile;
}

}  // namespace longcf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/normalization.hpp"
#include "longcf/schema.hpp"

namespace longcf {

enum class NormOrder { L1, L2 };

/// Parameters of the longitudinal distance: s is the number of most similar
/// observed changes to average over; norm combines the per-feature
/// contributions of each comparison.
struct LongitudinalConfig {
    std::size_t s = 1;
    NormOrder norm = NormOrder::L1;
};

namespace detail {

// A proposed categorical change agrees with an observed transition when both
// leave the feature unchanged, or both change it and land on the same level.
// The observed from-level is irrelevant: the subject's own from-level is
// fixed by x.
inline bool transition_agrees(const DiffCell& proposed, const DiffCell& observed) {
    const bool p_changed = proposed.changed_level();
    const bool o_changed = observed.changed_level();
    if (!p_changed && !o_changed) return true;
    return p_changed && o_changed && observed.to == proposed.to;
}

inline double categorical_divisor(const FeatureScale& scale, const DiffCell& proposed,
                                  double tolerance) {
    if (!scale.transition_rates.empty() && proposed.changed_level()) {
        auto it = scale.transition_rates.find(FeatureScale::key(proposed.from, proposed.to));
        const double rate = it == scale.transition_rates.end() ? 0.0 : it->second;
        return rate + tolerance;
    }
    return scale.value + tolerance;
}

}  // namespace detail

/// Distance between a proposed change vector and one observed difference
/// record, normalized per feature. Continuous features contribute
/// |delta_j - D_ij| / (scale_j + tol); categorical features contribute 0 when
/// the changes agree and 1 / (scale_j + tol) otherwise.
inline double normalized_delta_distance(const DiffRow& delta, const DiffRow& d_row,
                                        const NormalizationProfile& profile, NormOrder norm) {
    if (delta.size() != d_row.size() || delta.size() != profile.scales.size())
        raise(errc::schema_mismatch, "normalized_delta_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
        if (delta[j].is_level() != d_row[j].is_level())
            raise(errc::schema_mismatch,
                  "normalized_delta_distance: feature kind mismatch at " + std::to_string(j));
        double contribution;
        if (!delta[j].is_level()) {
            const double gap = std::abs(delta[j].delta - d_row[j].delta);
            contribution =
                gap == 0.0 ? 0.0 : gap / (profile.scales[j].value + profile.tolerance);
        } else if (detail::transition_agrees(delta[j], d_row[j])) {
            contribution = 0.0;
        } else {
            contribution =
                1.0 / detail::categorical_divisor(profile.scales[j], delta[j], profile.tolerance);
        }
        acc += norm == NormOrder::L1 ? contribution : contribution * contribution;
    }
    return norm == NormOrder::L1 ? acc : std::sqrt(acc);
}

/// The longitudinal distance: the minimum over index sets of size s of the
/// mean normalized distance between the proposed change (e - x) and the
/// chosen observed difference records. Separability across chosen rows
/// reduces the minimization to the mean of the s smallest per-row distances;
/// the selected values are accumulated in ascending order so the result is
/// invariant under permutations of the difference records.
inline double longitudinal_distance(const FeatureVector& x, const FeatureVector& e,
                                    const DiffMatrix& diffs, const NormalizationProfile& profile,
                                    const LongitudinalConfig& config) {
    const std::size_t n = diffs.rows.size();
    if (n == 0) raise(errc::empty_input, "longitudinal_distance: no difference records");
    if (config.s < 1 || config.s > n)
        raise(errc::s_too_large,
              "s = " + std::to_string(config.s) + " must be in [1, " + std::to_string(n) + "]");
    const DiffRow delta = diff_row_between(diffs.schema, x, e);

    std::vector<double> dists(n);
    for (std::size_t i = 0; i < n; ++i)
        dists[i] = normalized_delta_distance(delta, diffs.rows[i], profile, config.norm);

    std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(config.s),
                      dists.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < config.s; ++i) sum += dists[i];
    return sum / static_cast<double>(config.s);
}

/// Geometric closeness of e to x: continuous features weighted by the inverse
/// cross-sectional MAD, categorical features counted as 0/1 indicators.
inline double proximity(const FeatureSchema& schema, const FeatureVector& x,
                        const FeatureVector& e, const NormalizationProfile& cross_profile) {
    if (x.size() != schema.size() || e.size() != schema.size())
        raise(errc::schema_mismatch, "proximity: vector length mismatch");
    cross_profile.validate(schema.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema.at(j).is_continuous()) {
            const double gap = std::abs(x.real(j) - e.real(j));
            if (gap != 0.0)
                acc += gap / (cross_profile.scales[j].value + cross_profile.tolerance);
        } else {
            acc += x.level(j) != e.level(j) ? 1.0 : 0.0;
        }
    }
    return acc;
}

/// Number of features whose value differs; continuous values compared exactly.
inline std::size_t sparsity(const FeatureVector& x, const FeatureVector& e) {
    if (x.size() != e.size()) raise(errc::schema_mismatch, "sparsity: vector length mismatch");
    std::size_t count = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x.values[j] != e.values[j]) ++count;
    return count;
}

}  // namespace longcf

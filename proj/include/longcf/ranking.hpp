#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/generation.hpp"
#include "longcf/metrics.hpp"
#include "longcf/normalization.hpp"

namespace longcf {

/// Fraction-of-subjects and fraction-of-explanations curves over a grid of
/// plausibility thresholds, plus the reference line (the cost of a change
/// observed exactly once).
struct ThresholdCurve {
    std::vector<double> thresholds;
    std::vector<double> any_fraction;   // subjects with >= 1 explanation at or below t
    std::vector<double> mean_fraction;  // mean per-subject fraction at or below t
    double reference = 0.0;
};

/// Validity and immutability summaries over a collection of scored sets.
struct AuditSummary {
    double mean_validity = 0.0;          // mean over subjects of per-subject validity
    double pct_validity_zero = 0.0;      // subjects with no valid explanation
    double pct_validity_all = 0.0;       // subjects whose whole set is valid
    double pct_immutable_changed = 0.0;  // explanations touching an immutable feature
    double pct_big_distance = 0.0;       // explanations at or above the cutoff
    double mean_features_changed = 0.0;
    double cutoff = 1e5;
    std::size_t subjects = 0;
    std::size_t counterfactuals = 0;
};

/// Scores every candidate by longitudinal distance and re-orders the set
/// ascending by it (validity first on ties; stable otherwise). Idempotent.
inline CounterfactualSet score_set(const CounterfactualSet& set, const DiffMatrix& diffs,
                                   const NormalizationProfile& profile,
                                   const LongitudinalConfig& config) {
    if (set.subject.size() != diffs.schema.size())
        raise(errc::schema_mismatch, "set subject does not match diff schema");
    CounterfactualSet out = set;
    for (auto& c : out.candidates)
        c.longitudinal = longitudinal_distance(set.subject, c.vec, diffs, profile, config);
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.longitudinal != b.longitudinal)
                             return a.longitudinal < b.longitudinal;
                         if (a.valid != b.valid) return a.valid;
                         return false;
                     });
    return out;
}

/// any_fraction(t) = |{subjects with min score <= t}| / N;
/// mean_fraction(t) = mean over subjects of the fraction of their
/// explanations with score <= t.
inline ThresholdCurve threshold_curve(const std::vector<CounterfactualSet>& sets,
                                      const std::vector<double>& thresholds, double reference) {
    if (sets.empty()) raise(errc::empty_input, "threshold_curve: no sets");
    for (const auto& s : sets)
        if (s.candidates.empty()) raise(errc::empty_input, "threshold_curve: empty set");
    if (thresholds.empty()) raise(errc::empty_input, "threshold_curve: no thresholds");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        raise(errc::invalid_argument, "thresholds must be ascending");

    ThresholdCurve curve;
    curve.thresholds = thresholds;
    curve.reference = reference;
    curve.any_fraction.resize(thresholds.size());
    curve.mean_fraction.resize(thresholds.size());
    const double n_subjects = static_cast<double>(sets.size());
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
        const double t = thresholds[ti];
        std::size_t any = 0;
        double frac_sum = 0.0;
        for (const auto& s : sets) {
            std::size_t below = 0;
            for (const auto& c : s.candidates)
                if (c.longitudinal <= t) ++below;
            if (below > 0) ++any;
            frac_sum += static_cast<double>(below) / static_cast<double>(s.candidates.size());
        }
        curve.any_fraction[ti] = static_cast<double>(any) / n_subjects;
        curve.mean_fraction[ti] = frac_sum / n_subjects;
    }
    return curve;
}

/// Longitudinal cost of a change observed exactly once among n records: the
/// scale is 1/n, so the normalized unit cost is n / (1 + n * tolerance).
inline double one_observation_threshold(const DiffMatrix& diffs,
                                        const NormalizationProfile& profile) {
    const double n = static_cast<double>(diffs.rows.size());
    return n / (1.0 + n * profile.tolerance);
}

/// Table-style summary. Immutability comes from the schema flags alone,
/// independent of any longitudinal score.
inline AuditSummary audit(const std::vector<CounterfactualSet>& sets,
                          const FeatureSchema& schema, double cutoff = 1e5) {
    if (sets.empty()) raise(errc::empty_input, "audit: no sets");
    AuditSummary out;
    out.cutoff = cutoff;
    out.subjects = sets.size();

    double validity_sum = 0.0;
    std::size_t zero = 0, all = 0, immutable_changed = 0, big = 0, total = 0;
    double changed_sum = 0.0;
    for (const auto& s : sets) {
        if (s.candidates.empty()) raise(errc::empty_input, "audit: empty set");
        std::size_t valid = 0;
        for (const auto& c : s.candidates) {
            ++total;
            if (c.valid) ++valid;
            bool touches_immutable = false;
            std::size_t changed = 0;
            for (std::size_t j = 0; j < schema.size(); ++j) {
                if (c.vec.values[j] == s.subject.values[j]) continue;
                ++changed;
                if (schema.at(j).immutable) touches_immutable = true;
            }
            if (touches_immutable) ++immutable_changed;
            changed_sum += static_cast<double>(changed);
            if (c.longitudinal >= cutoff) ++big;
        }
        validity_sum +=
            static_cast<double>(valid) / static_cast<double>(s.candidates.size());
        if (valid == 0) ++zero;
        if (valid == s.candidates.size()) ++all;
    }

    const double n_subjects = static_cast<double>(sets.size());
    const double n_total = static_cast<double>(total);
    out.counterfactuals = total;
    out.mean_validity = validity_sum / n_subjects;
    out.pct_validity_zero = 100.0 * static_cast<double>(zero) / n_subjects;
    out.pct_validity_all = 100.0 * static_cast<double>(all) / n_subjects;
    out.pct_immutable_changed = 100.0 * static_cast<double>(immutable_changed) / n_total;
    out.pct_big_distance = 100.0 * static_cast<double>(big) / n_total;
    out.mean_features_changed = changed_sum / n_total;
    return out;
}

}  // namespace longcf

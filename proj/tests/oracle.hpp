#pragma once

// Test-only reference implementations, kept independent of the library's
// computation path: the longitudinal distance is evaluated by explicit
// minimization over every size-s index set, with naive per-row distances.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "longcf/longcf.hpp"

namespace oracle {

// naive per-feature walk, no shortcuts
inline double row_distance(const longcf::DiffRow& delta, const longcf::DiffRow& observed,
                           const longcf::NormalizationProfile& profile, longcf::NormOrder norm) {
    double acc = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
        double c = 0.0;
        if (!delta[j].is_level()) {
            const double gap = std::abs(delta[j].delta - observed[j].delta);
            c = gap == 0.0 ? 0.0 : gap / (profile.scales[j].value + profile.tolerance);
        } else {
            const bool p_changed = delta[j].from != delta[j].to;
            const bool o_changed = observed[j].from != observed[j].to;
            const bool agree =
                (!p_changed && !o_changed) || (p_changed && o_changed && observed[j].to == delta[j].to);
            if (!agree) {
                double divisor = profile.scales[j].value + profile.tolerance;
                if (!profile.scales[j].transition_rates.empty() && p_changed) {
                    auto it = profile.scales[j].transition_rates.find(
                        longcf::FeatureScale::key(delta[j].from, delta[j].to));
                    divisor = (it == profile.scales[j].transition_rates.end() ? 0.0 : it->second) +
                              profile.tolerance;
                }
                c = 1.0 / divisor;
            }
        }
        acc += norm == longcf::NormOrder::L1 ? c : c * c;
    }
    return norm == longcf::NormOrder::L1 ? acc : std::sqrt(acc);
}

// min over all size-s subsets of the mean row distance; each subset's values
// are summed in ascending order, mirroring the library's accumulation
inline double longitudinal_distance(const longcf::FeatureVector& x,
                                    const longcf::FeatureVector& e,
                                    const longcf::DiffMatrix& diffs,
                                    const longcf::NormalizationProfile& profile,
                                    const longcf::LongitudinalConfig& config) {
    const std::size_t n = diffs.rows.size();
    const longcf::DiffRow delta = longcf::diff_row_between(diffs.schema, x, e);
    std::vector<double> dists(n);
    for (std::size_t i = 0; i < n; ++i)
        dists[i] = row_distance(delta, diffs.rows[i], profile, config.norm);

    const std::size_t s = config.s;
    std::vector<std::size_t> pick(s);
    double best = std::numeric_limits<double>::infinity();

    // enumerate combinations of indices 0..n-1 taken s at a time
    for (std::size_t i = 0; i < s; ++i) pick[i] = i;
    while (true) {
        std::vector<double> vals(s);
        for (std::size_t i = 0; i < s; ++i) vals[i] = dists[pick[i]];
        std::sort(vals.begin(), vals.end());
        double sum = 0.0;
        for (double v : vals) sum += v;
        best = std::min(best, sum / static_cast<double>(s));

        std::size_t i = s;
        while (i > 0 && pick[i - 1] == n - s + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < s; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

// random mixed-kind instance: a diff matrix plus a subject/counterfactual pair
struct Instance {
    longcf::FeatureSchema schema;
    longcf::LongitudinalPair pair;
    longcf::DiffMatrix diffs;
    longcf::FeatureVector x, e;
    longcf::NormalizationProfile profile;
    longcf::LongitudinalConfig config;
};

inline Instance random_instance(longcf::Rng& rng, double tolerance = 1e-3) {
    using namespace longcf;
    Instance inst;
    const std::size_t d = 1 + rng.below(5);
    const std::size_t n = 1 + rng.below(20);

    for (std::size_t j = 0; j < d; ++j) {
        FeatureSpec spec;
        spec.name = "f" + std::to_string(j);
        if (rng.bernoulli(0.6)) {
            spec.kind = FeatureKind::Continuous;
        } else {
            spec.kind = FeatureKind::Categorical;
            const std::size_t levels = 2 + rng.below(3);
            for (std::size_t l = 0; l < levels; ++l)
                spec.levels.push_back("L" + std::to_string(l));
        }
        inst.schema.features.push_back(std::move(spec));
    }

    LongitudinalPair pair;
    pair.schema = inst.schema;
    auto random_row = [&] {
        FeatureVector r;
        for (std::size_t j = 0; j < d; ++j) {
            if (inst.schema.at(j).is_continuous())
                r.values.push_back(rng.uniform(-5.0, 5.0));
            else
                r.values.push_back(
                    static_cast<double>(rng.below(inst.schema.at(j).levels.size())));
        }
        return r;
    };
    for (std::size_t i = 0; i < n; ++i) {
        pair.time1.push_back(random_row());
        pair.time2.push_back(random_row());
    }
    inst.diffs = compute_diffs(pair);
    inst.pair = std::move(pair);
    inst.x = random_row();
    inst.e = random_row();
    inst.profile = build_profile(inst.diffs, ScaleKind::Aad, tolerance);
    inst.config.s = 1 + rng.below(std::min<std::size_t>(3, n));
    inst.config.norm = rng.bernoulli(0.5) ? NormOrder::L1 : NormOrder::L2;
    return inst;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/rng.hpp"
#include "longcf/schema.hpp"

namespace longcf {

/// Career-swap simulation parameters. With probability p_edu_bump an
/// individual raises their education one level (capped); with probability
/// p_swap they take the whole swap-feature block of a random individual from
/// the same (post-bump) education class. Age always advances by a uniform
/// integer in the configured range. Everything else is copied.
struct SimulationConfig {
    double p_swap = 0.3;
    double p_edu_bump = 0.1;
    std::vector<std::string> swap_features;
    std::string education_feature;
    std::string age_feature;
    std::int64_t age_min = 1;
    std::int64_t age_max = 10;
    std::uint64_t seed = 0;
};

struct SimulationResult {
    LongitudinalPair pair;
    std::vector<std::size_t> skipped_swaps;  // individuals without a donor
};

namespace detail {

inline std::size_t require_feature(const FeatureSchema& schema, const std::string& name,
                                   const char* role) {
    auto j = schema.index_of(name);
    if (!j)
        raise(errc::invalid_argument,
              std::string(role) + " feature '" + name + "' not in schema");
    if (schema.at(*j).immutable)
        raise(errc::invalid_argument,
              std::string(role) + " feature '" + name + "' is immutable");
    return *j;
}

}  // namespace detail

/// Generates the second time point. Swaps are one-directional copies: the
/// recipient takes the donor's block, the donor's own row is untouched, and
/// donors are drawn from the pre-swap population.
inline SimulationResult simulate_second_timepoint(const Dataset& data,
                                                  const SimulationConfig& config) {
    if (data.rows.empty()) raise(errc::empty_input, "simulation needs a nonempty dataset");
    if (config.p_swap < 0 || config.p_swap > 1 || config.p_edu_bump < 0 || config.p_edu_bump > 1)
        raise(errc::invalid_argument, "probabilities must lie in [0, 1]");
    if (config.age_min < 1 || config.age_max < config.age_min)
        raise(errc::invalid_argument, "age increment range must satisfy 1 <= low <= high");

    const auto& schema = data.schema;
    const std::size_t edu = detail::require_feature(schema, config.education_feature, "education");
    const std::size_t age = detail::require_feature(schema, config.age_feature, "age");
    if (!schema.at(edu).is_categorical())
        raise(errc::invalid_argument, "education feature must be categorical");
    if (!schema.at(age).is_continuous())
        raise(errc::invalid_argument, "age feature must be continuous");

    std::vector<std::size_t> swap_idx;
    for (const auto& name : config.swap_features) {
        const std::size_t j = detail::require_feature(schema, name, "swap");
        if (j == edu || j == age)
            raise(errc::invalid_argument,
                  "swap feature '" + name + "' overlaps education/age");
        swap_idx.push_back(j);
    }

    const auto max_level = static_cast<std::int32_t>(schema.at(edu).levels.size()) - 1;
    const std::size_t n = data.rows.size();

    SimulationResult result;
    result.pair.schema = schema;
    result.pair.time1 = data.rows;
    result.pair.time2 = data.rows;

    Rng rng(config.seed);
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector& row = result.pair.time2[i];

        std::int32_t edu_class = data.rows[i].level(edu);
        if (rng.bernoulli(config.p_edu_bump) && edu_class < max_level) {
            ++edu_class;
            row.values[edu] = static_cast<double>(edu_class);
        }

        if (rng.bernoulli(config.p_swap)) {
            std::vector<std::size_t> pool;
            for (std::size_t d = 0; d < n; ++d)
                if (d != i && data.rows[d].level(edu) == edu_class) pool.push_back(d);
            if (pool.empty()) {
                result.skipped_swaps.push_back(i);
            } else {
                const std::size_t donor = pool[rng.below(pool.size())];
                for (std::size_t j : swap_idx) row.values[j] = data.rows[donor].values[j];
            }
        }

        row.values[age] += static_cast<double>(rng.int_in(config.age_min, config.age_max));
    }
    return result;
}

/// Synthetic income-classification population with the schema roles the
/// career-swap simulation expects: immutable demographics, ordered education,
/// a swappable career block, and a label from a noisy linear score in which
/// the immutable demographics genuinely matter.
inline Dataset make_adult_like(std::size_t n, std::uint64_t seed) {
    if (n == 0) raise(errc::empty_input, "population size must be positive");

    FeatureSchema schema;
    schema.id_column = "id";
    schema.features = {
        {"age", FeatureKind::Continuous, {}, false, Monotone::NonDecreasing},
        {"education",
         FeatureKind::Categorical,
         {"HS-grad", "Some-college", "Assoc", "Bachelors", "Masters", "Doctorate"},
         false,
         Monotone::NonDecreasing},
        {"occupation",
         FeatureKind::Categorical,
         {"Admin", "Craft", "Exec", "Prof", "Sales", "Service", "Tech", "Transport"},
         false,
         Monotone::None},
        {"hours_per_week", FeatureKind::Continuous, {}, false, Monotone::None},
        {"capital_gain", FeatureKind::Continuous, {}, false, Monotone::None},
        {"race",
         FeatureKind::Categorical,
         {"White", "Black", "Asian-Pac", "Amer-Indian", "Other"},
         true,
         Monotone::None},
        {"gender", FeatureKind::Categorical, {"Male", "Female"}, true, Monotone::None},
        {"native_country",
         FeatureKind::Categorical,
         {"US", "Mexico", "Philippines", "Germany", "Other"},
         true,
         Monotone::None},
    };
    schema.validate();

    // occupation propensity by education band: higher bands favor Exec/Prof
    static const double kOccWeights[3][8] = {
        // Admin Craft Exec Prof Sales Service Tech Transport
        {0.14, 0.22, 0.02, 0.02, 0.14, 0.22, 0.06, 0.18},  // HS-grad / Some-college
        {0.16, 0.12, 0.10, 0.14, 0.16, 0.10, 0.14, 0.08},  // Assoc / Bachelors
        {0.08, 0.02, 0.28, 0.38, 0.06, 0.02, 0.14, 0.02},  // Masters / Doctorate
    };
    static const double kOccScore[8] = {-0.2, -0.1, 1.0, 0.9, 0.2, -0.6, 0.4, -0.5};

    Rng rng(seed);
    Dataset ds;
    ds.schema = schema;
    ds.labels.emplace();
    ds.rows.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double age = static_cast<double>(rng.int_in(18, 64));

        // education skewed toward the lower levels
        const double eu = rng.uniform01();
        std::int32_t edu;
        if (eu < 0.32) edu = 0;
        else if (eu < 0.55) edu = 1;
        else if (eu < 0.67) edu = 2;
        else if (eu < 0.87) edu = 3;
        else if (eu < 0.96) edu = 4;
        else edu = 5;

        const std::size_t band = edu <= 1 ? 0 : edu <= 3 ? 1 : 2;
        double pick = rng.uniform01();
        std::int32_t occ = 0;
        for (std::int32_t o = 0; o < 8; ++o) {
            pick -= kOccWeights[band][o];
            if (pick <= 0) {
                occ = o;
                break;
            }
            occ = o;
        }

        const double hours =
            std::clamp(std::round(40.0 + 12.0 * (rng.uniform01() + rng.uniform01() - 1.0)), 10.0,
                       80.0);
        const double gain = std::round(std::max(0.0, 2500.0 * (rng.uniform01() * 2.0 - 1.0)));
        const auto race = static_cast<std::int32_t>(rng.below(5));
        const auto gender = static_cast<std::int32_t>(rng.below(2));
        const auto country = static_cast<std::int32_t>(rng.below(5));

        // noisy linear income score; gender and race carry strong signal so a
        // trained model leans on them, mirroring the disparities the audit is
        // meant to surface
        const double noise = 1.1 * (rng.uniform01() + rng.uniform01() - 1.0);
        const double score = 0.045 * (age - 40.0) + 0.75 * (static_cast<double>(edu) - 1.5) +
                             0.05 * (hours - 40.0) + 0.0004 * gain + kOccScore[occ] +
                             (gender == 0 ? 1.1 : -1.1) + (race == 0 ? 0.8 : -0.8) + noise;

        FeatureVector row;
        row.values = {age,
                      static_cast<double>(edu),
                      static_cast<double>(occ),
                      hours,
                      gain,
                      static_cast<double>(race),
                      static_cast<double>(gender),
                      static_cast<double>(country)};
        ds.rows.push_back(std::move(row));
        ds.labels->push_back(score > 1.5 ? 1 : 0);
    }
    return ds;
}

}  // namespace longcf

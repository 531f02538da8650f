#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/metrics.hpp"
#include "longcf/models.hpp"
#include "longcf/normalization.hpp"
#include "longcf/rng.hpp"
#include "longcf/schema.hpp"

namespace longcf {

enum class Objective { Proximity, Sparsity, Longitudinal };

enum class ValidityMode { HardConstraint, HingePenalty };

struct ObjectiveTerm {
    Objective kind = Objective::Proximity;
    double weight = 1.0;
};

/// Which objectives the search minimizes and how validity is handled.
/// HingePenalty adds weight * max(0, margin to the decision threshold);
/// HardConstraint ranks invalid candidates strictly after valid ones.
struct FitnessConfig {
    std::vector<ObjectiveTerm> objectives;
    ValidityMode validity = ValidityMode::HingePenalty;
    double hinge_weight = 10.0;

    bool uses(Objective o) const {
        for (const auto& t : objectives)
            if (t.kind == o) return true;
        return false;
    }

    void validate() const {
        if (objectives.empty()) raise(errc::invalid_argument, "no objectives configured");
        for (const auto& t : objectives)
            if (!(t.weight > 0)) raise(errc::invalid_argument, "objective weights must be > 0");
        if (validity == ValidityMode::HingePenalty && !(hinge_weight > 0))
            raise(errc::invalid_argument, "hinge weight must be > 0");
    }

    // proximity + sparsity, the naive baseline
    static FitnessConfig default_config() {
        return {{{Objective::Proximity, 1.0}, {Objective::Sparsity, 1.0}},
                ValidityMode::HingePenalty,
                10.0};
    }

    // proximity + longitudinal distance
    static FitnessConfig longitudinal_config() {
        return {{{Objective::Proximity, 1.0}, {Objective::Longitudinal, 1.0}},
                ValidityMode::HingePenalty,
                10.0};
    }
};

/// Structural constraints every emitted candidate satisfies: frozen features
/// keep the subject's value, continuous features stay within bounds, and
/// monotone features only move in the allowed direction.
struct SearchConstraints {
    std::vector<bool> frozen;
    std::vector<double> lower, upper;  // continuous features only
    std::vector<Monotone> monotone;
    std::int32_t desired_class = 1;

    /// Frozen set from the schema's immutable flags (optional), bounds from
    /// the observed data range, directions from the schema.
    static SearchConstraints for_data(const Dataset& data, std::int32_t desired,
                                      bool respect_immutable = true) {
        if (data.rows.empty()) raise(errc::empty_input, "constraints need a nonempty dataset");
        const auto& schema = data.schema;
        SearchConstraints c;
        c.desired_class = desired;
        c.frozen.resize(schema.size(), false);
        c.lower.assign(schema.size(), 0.0);
        c.upper.assign(schema.size(), 0.0);
        c.monotone.resize(schema.size(), Monotone::None);
        for (std::size_t j = 0; j < schema.size(); ++j) {
            c.frozen[j] = respect_immutable && schema.at(j).immutable;
            c.monotone[j] = schema.at(j).monotone;
            if (schema.at(j).is_continuous()) {
                double lo = data.rows[0].real(j), hi = lo;
                for (const auto& r : data.rows) {
                    lo = std::min(lo, r.real(j));
                    hi = std::max(hi, r.real(j));
                }
                c.lower[j] = lo;
                c.upper[j] = hi;
            }
        }
        return c;
    }

    void freeze(const FeatureSchema& schema, const std::string& name) {
        auto j = schema.index_of(name);
        if (!j) raise(errc::missing_column, name);
        frozen[*j] = true;
    }

    bool satisfied_by(const FeatureSchema& schema, const FeatureVector& x,
                      const FeatureVector& e) const {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (frozen[j] && e.values[j] != x.values[j]) return false;
            if (schema.at(j).is_continuous() &&
                (e.real(j) < lower[j] || e.real(j) > upper[j]))
                return false;
            if (monotone[j] == Monotone::NonDecreasing && e.values[j] < x.values[j]) return false;
            if (monotone[j] == Monotone::NonIncreasing && e.values[j] > x.values[j]) return false;
        }
        return true;
    }
};

/// A candidate explanation with its cached scores. longitudinal is NaN until
/// a longitudinal context or a post-hoc scoring pass fills it. rank records
/// the position assigned at generation time and survives later re-ordering.
struct Candidate {
    FeatureVector vec;
    double fitness = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
    double proba = 0.0;
    double proximity = 0.0;
    double sparsity = 0.0;
    double longitudinal = std::numeric_limits<double>::quiet_NaN();
    std::int32_t rank = 0;

    bool scored() const { return !std::isnan(fitness); }
};

struct Population {
    std::vector<Candidate> members;
    std::size_t generation = 0;
};

/// The subject plus its ranked explanations. Ordering is non-decreasing in
/// fitness under the validity-first tie-break. candidates.size() < requested
/// marks a shortfall.
struct CounterfactualSet {
    FeatureVector subject;
    std::int32_t desired_class = 1;
    std::string method;
    std::vector<Candidate> candidates;
    std::size_t requested = 0;
    bool duplicates_padded = false;
    std::vector<double> best_trace;  // best fitness per generation (genetic only)

    bool shortfall() const { return candidates.size() < requested; }
};

/// Everything fitness evaluation may need. diffs + longitudinal_profile are
/// optional; they are required when the Longitudinal objective is active and
/// otherwise only enable score reporting.
struct GenerationContext {
    const Classifier* model = nullptr;
    const FeatureSchema* schema = nullptr;
    const NormalizationProfile* cross_profile = nullptr;
    const DiffMatrix* diffs = nullptr;
    const NormalizationProfile* longitudinal_profile = nullptr;
    LongitudinalConfig longitudinal;
    std::int32_t desired_class = 1;

    bool has_longitudinal() const { return diffs != nullptr && longitudinal_profile != nullptr; }
};

struct GeneticParams {
    std::size_t pop_size = 60;
    double p_mut = 0.3;
    std::size_t max_generations = 200;
    double convergence_epsilon = 1e-4;
    std::size_t patience = 5;
    std::size_t k = 10;
    double crossover_bias = 0.5;         // P(gene taken from the first parent)
    std::size_t init_retry_factor = 10;  // rejection-sampling draw budget, x pop_size

    void validate() const {
        if (pop_size < 4 || pop_size % 2 != 0)
            raise(errc::invalid_argument, "pop_size must be even and >= 4");
        if (k < 1 || k > pop_size) raise(errc::invalid_argument, "k must be in [1, pop_size]");
        if (!(p_mut > 0) || p_mut > 1) raise(errc::invalid_argument, "p_mut must be in (0, 1]");
        if (patience == 0) raise(errc::invalid_argument, "patience must be positive");
    }
};

struct RandomSearchParams {
    std::size_t n_samples = 5000;
    std::size_t k = 10;
};

namespace detail {

// Per-feature sampling domain for one subject under the constraints.
struct FeatureDomain {
    bool pinned = false;
    double lo = 0.0, hi = 0.0;         // continuous interval
    std::vector<std::int32_t> levels;  // categorical choices
};

inline std::vector<FeatureDomain> build_domains(const FeatureSchema& schema,
                                                const SearchConstraints& constraints,
                                                const FeatureVector& x) {
    if (x.size() != schema.size() || constraints.frozen.size() != schema.size())
        raise(errc::schema_mismatch, "constraints/subject do not match schema");
    std::vector<FeatureDomain> domains(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
        FeatureDomain& dom = domains[j];
        if (constraints.frozen[j]) {
            dom.pinned = true;
            continue;
        }
        if (schema.at(j).is_continuous()) {
            dom.lo = constraints.lower[j];
            dom.hi = constraints.upper[j];
            if (constraints.monotone[j] == Monotone::NonDecreasing)
                dom.lo = std::max(dom.lo, x.real(j));
            if (constraints.monotone[j] == Monotone::NonIncreasing)
                dom.hi = std::min(dom.hi, x.real(j));
            if (dom.lo > dom.hi) {
                if (x.real(j) >= constraints.lower[j] && x.real(j) <= constraints.upper[j])
                    dom.pinned = true;
                else
                    raise(errc::infeasible_constraints,
                          "feature '" + schema.at(j).name + "' has an empty allowed range");
            }
        } else {
            const auto n_levels = static_cast<std::int32_t>(schema.at(j).levels.size());
            const auto x_level = x.level(j);
            for (std::int32_t lv = 0; lv < n_levels; ++lv) {
                if (constraints.monotone[j] == Monotone::NonDecreasing && lv < x_level) continue;
                if (constraints.monotone[j] == Monotone::NonIncreasing && lv > x_level) continue;
                dom.levels.push_back(lv);
            }
            if (dom.levels.size() <= 1) dom.pinned = true;
        }
    }
    return domains;
}

inline void resample_feature(FeatureVector& e, std::size_t j, const FeatureDomain& dom,
                             Rng& rng) {
    if (dom.pinned) return;
    if (dom.levels.empty())
        e.values[j] = rng.uniform(dom.lo, dom.hi);
    else
        e.values[j] = static_cast<double>(dom.levels[rng.below(dom.levels.size())]);
}

inline double class_probability(double proba, std::int32_t desired) {
    return desired == 1 ? proba : 1.0 - proba;
}

}  // namespace detail

/// Weighted sum of the active objectives plus the validity hinge when that
/// mode is on. Lower is fitter.
inline double fitness(const FeatureVector& x, const FeatureVector& e, const FitnessConfig& config,
                      const GenerationContext& ctx) {
    config.validate();
    double total = 0.0;
    for (const auto& term : config.objectives) {
        switch (term.kind) {
            case Objective::Proximity:
                total += term.weight * proximity(*ctx.schema, x, e, *ctx.cross_profile);
                break;
            case Objective::Sparsity:
                total += term.weight * static_cast<double>(sparsity(x, e));
                break;
            case Objective::Longitudinal:
                if (!ctx.has_longitudinal())
                    raise(errc::invalid_argument,
                          "longitudinal objective requires difference records and a profile");
                total += term.weight * longitudinal_distance(x, e, *ctx.diffs,
                                                             *ctx.longitudinal_profile,
                                                             ctx.longitudinal);
                break;
        }
    }
    if (config.validity == ValidityMode::HingePenalty) {
        const double p = ctx.model->predict_proba(e);
        const double margin = ctx.desired_class == 1 ? ctx.model->threshold() - p
                                                     : p - ctx.model->threshold();
        total += config.hinge_weight * std::max(0.0, margin);
    }
    return total;
}

namespace detail {

// Fills every cached score except longitudinal, which is only computed when
// fill_longitudinal is set (it is the expensive term; the returned top-k get
// it during final packaging).
inline void score_candidate(Candidate& c, const FeatureVector& x, const FitnessConfig& config,
                            const GenerationContext& ctx, bool fill_longitudinal) {
    c.proba = ctx.model->predict_proba(c.vec);
    c.valid = (c.proba >= ctx.model->threshold() ? 1 : 0) == ctx.desired_class;
    c.proximity = proximity(*ctx.schema, x, c.vec, *ctx.cross_profile);
    c.sparsity = static_cast<double>(sparsity(x, c.vec));
    const bool need_long = config.uses(Objective::Longitudinal) ||
                           (fill_longitudinal && ctx.has_longitudinal());
    if (need_long)
        c.longitudinal = longitudinal_distance(x, c.vec, *ctx.diffs, *ctx.longitudinal_profile,
                                               ctx.longitudinal);

    double total = 0.0;
    for (const auto& term : config.objectives) {
        switch (term.kind) {
            case Objective::Proximity: total += term.weight * c.proximity; break;
            case Objective::Sparsity: total += term.weight * c.sparsity; break;
            case Objective::Longitudinal: total += term.weight * c.longitudinal; break;
        }
    }
    if (config.validity == ValidityMode::HingePenalty) {
        const double margin = ctx.desired_class == 1 ? ctx.model->threshold() - c.proba
                                                     : c.proba - ctx.model->threshold();
        total += config.hinge_weight * std::max(0.0, margin);
    }
    c.fitness = total;
}

// Ascending fitness; ties resolved validity-first, then lower sparsity, then
// stable input order. Under HardConstraint validity becomes the primary key.
struct CandidateOrder {
    const std::vector<Candidate>& members;
    ValidityMode mode;

    bool operator()(std::size_t a, std::size_t b) const {
        const Candidate& ca = members[a];
        const Candidate& cb = members[b];
        if (mode == ValidityMode::HardConstraint && ca.valid != cb.valid) return ca.valid;
        if (ca.fitness != cb.fitness) return ca.fitness < cb.fitness;
        if (ca.valid != cb.valid) return ca.valid;
        if (ca.sparsity != cb.sparsity) return ca.sparsity < cb.sparsity;
        return a < b;
    }
};

inline std::vector<std::size_t> sorted_order(const std::vector<Candidate>& members,
                                             ValidityMode mode) {
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), CandidateOrder{members, mode});
    return order;
}

}  // namespace detail

/// Random population of the desired class, drawn by perturbing the subject:
/// each mutable feature is independently resampled with probability p_mut.
/// Draws whose prediction misses the desired class are kept as fallback and
/// the highest-probability ones fill any remaining slots.
inline Population initial_population(const FeatureVector& x, std::int32_t z,
                                     const Classifier& model,
                                     const SearchConstraints& constraints,
                                     const FeatureSchema& schema, std::size_t pop_size,
                                     double p_mut, std::uint64_t seed,
                                     std::size_t retry_factor = 10) {
    if (pop_size < 4 || pop_size % 2 != 0)
        raise(errc::invalid_argument, "pop_size must be even and >= 4");
    const auto domains = detail::build_domains(schema, constraints, x);

    Rng rng(seed);
    std::vector<Candidate> valids, rejects;
    const std::size_t budget = std::max<std::size_t>(pop_size, pop_size * retry_factor);
    for (std::size_t t = 0; t < budget && valids.size() < pop_size; ++t) {
        Candidate c;
        c.vec = x;
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (!domains[j].pinned && rng.bernoulli(p_mut))
                detail::resample_feature(c.vec, j, domains[j], rng);
        c.proba = model.predict_proba(c.vec);
        c.valid = (c.proba >= model.threshold() ? 1 : 0) == z;
        (c.valid ? valids : rejects).push_back(std::move(c));
    }
    if (valids.size() < pop_size) {
        std::stable_sort(rejects.begin(), rejects.end(),
                         [z](const Candidate& a, const Candidate& b) {
                             return detail::class_probability(a.proba, z) >
                                    detail::class_probability(b.proba, z);
                         });
        for (auto& c : rejects) {
            if (valids.size() >= pop_size) break;
            valids.push_back(std::move(c));
        }
    }
    Population pop;
    pop.members = std::move(valids);
    return pop;
}

/// Top half of the population by ascending fitness (validity-first
/// tie-break). Members must already carry fitness scores.
inline Population select_fittest(const Population& pop, const FitnessConfig& config,
                                 const GenerationContext& ctx) {
    Population out;
    out.generation = pop.generation;
    if (pop.members.empty()) return out;
    for (const auto& m : pop.members)
        if (!m.scored())
            raise(errc::invalid_argument, "select_fittest requires scored candidates");
    (void)ctx;
    auto order = detail::sorted_order(pop.members, config.validity);
    const std::size_t half = pop.members.size() / 2;
    out.members.reserve(half);
    for (std::size_t i = 0; i < half; ++i) out.members.push_back(pop.members[order[i]]);
    return out;
}

/// Uniform crossover: parents are paired randomly and each child takes each
/// feature from one of its two parents. Output size equals parent count so
/// parents + offspring restore the population size.
inline Population mate(const Population& parents, double crossover_bias, std::uint64_t seed) {
    const std::size_t n = parents.members.size();
    if (n < 2) raise(errc::too_few_parents, "mating requires at least 2 parents");
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    Population children;
    children.generation = parents.generation + 1;
    children.members.reserve(n);
    auto cross = [&](const Candidate& a, const Candidate& b) {
        Candidate child;
        child.vec = a.vec;
        for (std::size_t j = 0; j < child.vec.size(); ++j)
            if (!rng.bernoulli(crossover_bias)) child.vec.values[j] = b.vec.values[j];
        return child;
    };
    for (std::size_t i = 0; i < n; i += 2) {
        const Candidate& a = parents.members[order[i]];
        if (i + 1 < n) {
            const Candidate& b = parents.members[order[i + 1]];
            children.members.push_back(cross(a, b));
            children.members.push_back(cross(a, b));
        } else {
            // odd parent count: the leftover parent mates with the first
            children.members.push_back(cross(a, parents.members[order[0]]));
        }
    }
    return children;
}

namespace detail {

inline CounterfactualSet package_set(const FeatureVector& x, std::int32_t z,
                                     std::vector<Candidate> members, std::size_t k,
                                     const FitnessConfig& config, const GenerationContext& ctx,
                                     const std::string& method) {
    CounterfactualSet set;
    set.subject = x;
    set.desired_class = z;
    set.method = method;
    set.requested = k;

    auto order = sorted_order(members, config.validity);

    // exact duplicates drop out first; they come back only if fewer than k
    // distinct candidates exist, and the merged selection keeps fitness order
    std::vector<std::size_t> positions, dupes;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        bool dup = false;
        for (auto p : positions)
            if (members[order[pos]].vec == members[order[p]].vec) {
                dup = true;
                break;
            }
        (dup ? dupes : positions).push_back(pos);
        if (positions.size() >= k) break;
    }
    if (positions.size() < k && !dupes.empty()) {
        set.duplicates_padded = true;
        for (auto p : dupes) {
            if (positions.size() >= k) break;
            positions.push_back(p);
        }
        std::sort(positions.begin(), positions.end());
    }
    std::vector<std::size_t> kept;
    for (auto p : positions) kept.push_back(order[p]);
    for (auto i : kept) {
        Candidate c = std::move(members[i]);
        score_candidate(c, x, config, ctx, /*fill_longitudinal=*/true);
        c.rank = static_cast<std::int32_t>(set.candidates.size() + 1);
        set.candidates.push_back(std::move(c));
    }
    return set;
}

}  // namespace detail

/// Elitist genetic search: each generation keeps its fittest half and mates
/// it; the loop stops when the best fitness has improved by less than
/// convergence_epsilon for `patience` consecutive generations, or at
/// max_generations. A set with no valid candidate is a result, not an error.
inline CounterfactualSet run_genetic(const FeatureVector& x, std::int32_t z,
                                     const FitnessConfig& config,
                                     const SearchConstraints& constraints,
                                     const GeneticParams& params, const GenerationContext& ctx,
                                     std::uint64_t seed) {
    config.validate();
    params.validate();
    GenerationContext local = ctx;
    local.desired_class = z;

    Population pop = initial_population(x, z, *local.model, constraints, *local.schema,
                                        params.pop_size, params.p_mut, derive_seed(seed, 0),
                                        params.init_retry_factor);
    for (auto& c : pop.members)
        detail::score_candidate(c, x, config, local, false);

    auto best_fitness = [&pop] {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : pop.members) best = std::min(best, c.fitness);
        return best;
    };

    std::vector<double> trace{best_fitness()};
    double best = trace.front();
    std::size_t stall = 0;
    for (std::size_t gen = 1; gen <= params.max_generations && stall < params.patience; ++gen) {
        Population parents = select_fittest(pop, config, local);
        Population children = mate(parents, params.crossover_bias, derive_seed(seed, gen));
        for (auto& c : children.members)
            detail::score_candidate(c, x, config, local, false);
        pop.members = std::move(parents.members);
        pop.members.insert(pop.members.end(),
                           std::make_move_iterator(children.members.begin()),
                           std::make_move_iterator(children.members.end()));
        pop.generation = gen;

        const double now = best_fitness();
        trace.push_back(now);
        stall = best - now < params.convergence_epsilon ? stall + 1 : 0;
        best = now;
    }

    CounterfactualSet set =
        detail::package_set(x, z, std::move(pop.members), params.k, config, local, "genetic");
    set.best_trace = std::move(trace);
    return set;
}

/// Random-search baseline: perturbs a growing random subset of the mutable
/// features until k distinct valid candidates are found or the sample budget
/// is exhausted. Only valid candidates are returned; a short set is flagged
/// by its size.
inline CounterfactualSet run_random(const FeatureVector& x, std::int32_t z,
                                    const FitnessConfig& config,
                                    const SearchConstraints& constraints,
                                    const RandomSearchParams& params,
                                    const GenerationContext& ctx, std::uint64_t seed) {
    config.validate();
    if (params.k < 1) raise(errc::invalid_argument, "k must be positive");
    GenerationContext local = ctx;
    local.desired_class = z;
    const auto domains = detail::build_domains(*local.schema, constraints, x);

    std::vector<std::size_t> mutable_features;
    for (std::size_t j = 0; j < domains.size(); ++j)
        if (!domains[j].pinned) mutable_features.push_back(j);

    Rng rng(derive_seed(seed, 0));
    std::vector<Candidate> found;
    const std::size_t m = mutable_features.size();
    for (std::size_t t = 0; t < params.n_samples && found.size() < params.k; ++t) {
        std::size_t subset = m == 0 ? 0 : 1 + t * m / std::max<std::size_t>(params.n_samples, 1);
        subset = std::min(subset, m);

        Candidate c;
        c.vec = x;
        std::vector<std::size_t> pool = mutable_features;
        rng.shuffle(pool);
        for (std::size_t i = 0; i < subset; ++i)
            detail::resample_feature(c.vec, pool[i], domains[pool[i]], rng);

        c.proba = local.model->predict_proba(c.vec);
        c.valid = (c.proba >= local.model->threshold() ? 1 : 0) == z;
        if (!c.valid) continue;
        bool dup = false;
        for (const auto& f : found)
            if (f.vec == c.vec) {
                dup = true;
                break;
            }
        if (!dup) found.push_back(std::move(c));
    }

    return detail::package_set(x, z, std::move(found), params.k, config, local, "random");
}

}  // namespace longcf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "longcf/longcf.hpp"
#include "oracle.hpp"

using namespace longcf;

namespace {

// profile with explicit per-feature scales, continuous features
NormalizationProfile flat_profile(std::initializer_list<double> scales, double tolerance) {
    NormalizationProfile p;
    p.tolerance = tolerance;
    for (double v : scales) {
        FeatureScale s;
        s.kind = ScaleKind::Aad;
        s.value = v;
        p.scales.push_back(s);
    }
    return p;
}

DiffRow continuous_delta(std::initializer_list<double> deltas) {
    DiffRow row;
    for (double d : deltas) {
        DiffCell c;
        c.delta = d;
        row.push_back(c);
    }
    return row;
}

DiffCell transition(std::int32_t from, std::int32_t to) {
    DiffCell c;
    c.from = from;
    c.to = to;
    return c;
}

}  // namespace

TEST_CASE("mad_of_column matches hand-computed values") {
    CHECK(mad_of_column({1, 2, 3, 4, 100}) == 1.0);
    CHECK(mad_of_column({5, 5, 5}) == 0.0);
    CHECK(mad_of_column({-2, 0, 2}) == 2.0);
    CHECK_THROWS_AS(mad_of_column({}), Error);
}

TEST_CASE("aad_of_column is the mean absolute delta about zero") {
    CHECK(aad_of_column({0, 0, 0, 4}) == 1.0);
    CHECK(aad_of_column({0, 0, 0}) == 0.0);
    CHECK(aad_of_column({-3, 3}) == 3.0);
    CHECK_THROWS_AS(aad_of_column({}), Error);
}

TEST_CASE("change_rate counts level changes") {
    std::vector<DiffCell> eight(8, transition(0, 0));
    eight[2] = transition(0, 1);
    eight[5] = transition(1, 0);
    CHECK(change_rate(eight) == 0.25);

    CHECK(change_rate({transition(1, 1), transition(0, 0)}) == 0.0);
    CHECK(change_rate({transition(0, 1), transition(1, 0)}) == 1.0);
    CHECK_THROWS_AS(change_rate({}), Error);
}

TEST_CASE("build_profile assigns dispersion to continuous and rate to categorical") {
    const FeatureSchema schema = testutil::mixed_schema();
    LongitudinalPair pair;
    pair.schema = schema;
    // age deltas 0,0,0,4; occupation changes once in four records
    pair.time1 = {testutil::row({10, 0}), testutil::row({10, 1}), testutil::row({10, 2}),
                  testutil::row({10, 0})};
    pair.time2 = {testutil::row({10, 0}), testutil::row({10, 1}), testutil::row({10, 2}),
                  testutil::row({14, 1})};
    const DiffMatrix diffs = compute_diffs(pair);

    const NormalizationProfile aad = build_profile(diffs, ScaleKind::Aad, 1e-5);
    CHECK(aad.scales[0].value == 1.0);
    CHECK(aad.scales[1].value == 0.25);
    CHECK(aad.tolerance == 1e-5);

    SUBCASE("a never-changed column scales to zero, so the divisor is the tolerance") {
        LongitudinalPair still;
        still.schema = schema;
        still.time1 = pair.time1;
        still.time2 = pair.time1;
        const NormalizationProfile p = build_profile(compute_diffs(still), ScaleKind::Aad, 1e-5);
        CHECK(p.scales[0].value == 0.0);
        CHECK(p.scales[1].value == 0.0);
        // a unit change to either feature now costs 1/tolerance
        const FeatureVector x = testutil::row({10, 0});
        const FeatureVector e = testutil::row({11, 0});
        const double cost = longitudinal_distance(x, e, compute_diffs(still), p, {1, NormOrder::L1});
        CHECK(cost == 1.0 / 1e-5);
        CHECK(cost >= 1e5 * (1 - 1e-12));
    }
}

TEST_CASE("mad and aad profiles diverge on mostly-idle columns") {
    // a column that moves in under half the records: its MAD-of-differences is
    // zero (changes priced at 1/tolerance) while its AAD stays positive
    FeatureSchema schema;
    schema.features = {{"v", FeatureKind::Continuous, {}, false, Monotone::None}};
    LongitudinalPair pair;
    pair.schema = schema;
    for (int i = 0; i < 10; ++i) {
        pair.time1.push_back(testutil::row({0.0}));
        pair.time2.push_back(testutil::row({i < 3 ? 5.0 : 0.0}));
    }
    const DiffMatrix diffs = compute_diffs(pair);
    const NormalizationProfile mad = build_profile(diffs, ScaleKind::Mad, 1e-5);
    const NormalizationProfile aad = build_profile(diffs, ScaleKind::Aad, 1e-5);
    CHECK(mad.scales[0].value == 0.0);
    CHECK(aad.scales[0].value == 1.5);  // (3 * 5) / 10
}

TEST_CASE("normalized_delta_distance combines per-feature contributions") {
    SUBCASE("identical continuous vectors are at distance zero") {
        const auto d = continuous_delta({0.5, -2.0});
        CHECK(normalized_delta_distance(d, d, flat_profile({1, 1}, 1e-5), NormOrder::L1) == 0.0);
    }
    SUBCASE("unit gap over unit scale") {
        const double got = normalized_delta_distance(continuous_delta({1.0}),
                                                     continuous_delta({2.0}),
                                                     flat_profile({1}, 1e-5), NormOrder::L1);
        CHECK(got == doctest::Approx(1.0 / (1.0 + 1e-5)).epsilon(1e-12));
    }
    SUBCASE("proposing a categorical change the data never makes") {
        NormalizationProfile p;
        p.tolerance = 1e-5;
        FeatureScale s;
        s.kind = ScaleKind::ChangeRate;
        s.value = 0.25;
        p.scales = {s};
        const DiffRow proposed = {transition(0, 1)};
        const DiffRow observed = {transition(2, 2)};
        const double got = normalized_delta_distance(proposed, observed, p, NormOrder::L1);
        CHECK(got == doctest::Approx(1.0 / 0.25001).epsilon(1e-12));
    }
    SUBCASE("categorical agreement rules") {
        NormalizationProfile p = flat_profile({0.5}, 0.0);
        p.scales[0].kind = ScaleKind::ChangeRate;
        // both unchanged, at different levels: agree
        CHECK(normalized_delta_distance({transition(0, 0)}, {transition(2, 2)}, p,
                                        NormOrder::L1) == 0.0);
        // both change to the same level, different origins: agree
        CHECK(normalized_delta_distance({transition(0, 1)}, {transition(2, 1)}, p,
                                        NormOrder::L1) == 0.0);
        // both change, different targets: disagree
        CHECK(normalized_delta_distance({transition(0, 1)}, {transition(0, 2)}, p,
                                        NormOrder::L1) == 2.0);
        // proposal keeps still while the record moved: disagree
        CHECK(normalized_delta_distance({transition(0, 0)}, {transition(0, 2)}, p,
                                        NormOrder::L1) == 2.0);
    }
    SUBCASE("L2 combines by root of squares") {
        const double got = normalized_delta_distance(continuous_delta({3.0, 4.0}),
                                                     continuous_delta({0.0, 0.0}),
                                                     flat_profile({1, 1}, 0.0), NormOrder::L2);
        CHECK(got == 5.0);
    }
    SUBCASE("kind mismatch raises") {
        CHECK_THROWS_AS(normalized_delta_distance({transition(0, 1)}, continuous_delta({1.0}),
                                                  flat_profile({1}, 0.0), NormOrder::L1),
                        Error);
    }
}

TEST_CASE("per-transition rate mode prices the specific proposed transition") {
    FeatureSchema schema;
    schema.features = {
        {"c", FeatureKind::Categorical, {"a", "b", "c"}, false, Monotone::None}};
    LongitudinalPair pair;
    pair.schema = schema;
    // four records: a->b twice, a->c once, one unchanged
    pair.time1 = {testutil::row({0}), testutil::row({0}), testutil::row({0}),
                  testutil::row({1})};
    pair.time2 = {testutil::row({1}), testutil::row({1}), testutil::row({2}),
                  testutil::row({1})};
    const DiffMatrix diffs = compute_diffs(pair);
    const NormalizationProfile p =
        build_profile(diffs, ScaleKind::Aad, 0.0, CategoricalRateMode::PerTransition);
    CHECK(p.scales[0].value == 0.75);  // overall change rate kept as fallback

    // proposed a->b: rate 0.5; mismatching record costs 1/0.5
    const double got = normalized_delta_distance({transition(0, 1)}, {transition(1, 1)}, p,
                                                 NormOrder::L1);
    CHECK(got == 2.0);
    // proposed b->c was never observed: rate 0, cost 1/tolerance
    NormalizationProfile tol = p;
    tol.tolerance = 1e-5;
    const double unseen = normalized_delta_distance({transition(1, 2)}, {transition(1, 1)}, tol,
                                                    NormOrder::L1);
    CHECK(unseen == doctest::Approx(1e5).epsilon(1e-9));
}

TEST_CASE("longitudinal_distance equals the worked examples") {
    FeatureSchema schema;
    schema.features = {{"a", FeatureKind::Continuous, {}, false, Monotone::None},
                       {"b", FeatureKind::Continuous, {}, false, Monotone::None}};
    LongitudinalPair pair;
    pair.schema = schema;
    pair.time1 = {testutil::row({0, 0}), testutil::row({0, 0}), testutil::row({0, 0})};
    pair.time2 = {testutil::row({1, 0}), testutil::row({2, 0}), testutil::row({0, 1})};
    const DiffMatrix diffs = compute_diffs(pair);
    const NormalizationProfile p = flat_profile({1, 1}, 0.0);

    const FeatureVector x = testutil::row({0, 0});
    const FeatureVector e = testutil::row({1, 0});

    CHECK(longitudinal_distance(x, e, diffs, p, {1, NormOrder::L1}) == 0.0);
    CHECK(longitudinal_distance(x, e, diffs, p, {2, NormOrder::L1}) == 0.5);
    // the zero change is not free unless a zero row was observed
    CHECK(longitudinal_distance(x, x, diffs, p, {1, NormOrder::L1}) == 1.0);

    SUBCASE("s out of range") {
        CHECK_THROWS_AS(longitudinal_distance(x, e, diffs, p, {4, NormOrder::L1}), Error);
        CHECK_THROWS_AS(longitudinal_distance(x, e, diffs, p, {0, NormOrder::L1}), Error);
    }
}

TEST_CASE("longitudinal_distance agrees with brute-force set minimization") {
    Rng rng(20260808);
    for (int trial = 0; trial < 250; ++trial) {
        const auto inst = oracle::random_instance(rng);
        const double got =
            longitudinal_distance(inst.x, inst.e, inst.diffs, inst.profile, inst.config);
        const double want =
            oracle::longitudinal_distance(inst.x, inst.e, inst.diffs, inst.profile, inst.config);
        REQUIRE(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("longitudinal_distance structural properties") {
    Rng rng(4477);

    SUBCASE("replay of an observed change scores zero at s=1") {
        for (int trial = 0; trial < 100; ++trial) {
            auto inst = oracle::random_instance(rng);
            // a subject standing at time1 of record i, moved to that record's
            // time2, replays D_i exactly
            const std::size_t pick = rng.below(inst.diffs.rows.size());
            CHECK(longitudinal_distance(inst.pair.time1[pick], inst.pair.time2[pick], inst.diffs,
                                        inst.profile, {1, inst.config.norm}) == 0.0);
        }
    }

    SUBCASE("non-decreasing in s") {
        for (int trial = 0; trial < 100; ++trial) {
            const auto inst = oracle::random_instance(rng);
            double prev = 0.0;
            for (std::size_t s = 1; s <= inst.diffs.rows.size(); ++s) {
                const double now = longitudinal_distance(inst.x, inst.e, inst.diffs,
                                                         inst.profile, {s, inst.config.norm});
                // tied means may differ by rounding; compare at 1e-12 granularity
                if (s > 1) CHECK(now >= prev - 1e-12 * std::max(1.0, prev));
                prev = now;
            }
        }
    }

    SUBCASE("invariant under permutation of the difference records") {
        for (int trial = 0; trial < 100; ++trial) {
            const auto inst = oracle::random_instance(rng);
            const double base =
                longitudinal_distance(inst.x, inst.e, inst.diffs, inst.profile, inst.config);
            DiffMatrix shuffled = inst.diffs;
            rng.shuffle(shuffled.rows);
            const double perm =
                longitudinal_distance(inst.x, inst.e, shuffled, inst.profile, inst.config);
            CHECK(base == perm);
        }
    }

    SUBCASE("changing a never-changed feature costs at least 1e5 / s") {
        const double tol = 1e-5;
        FeatureSchema schema;
        schema.features = {{"still", FeatureKind::Continuous, {}, false, Monotone::None},
                           {"moves", FeatureKind::Continuous, {}, false, Monotone::None}};
        for (int trial = 0; trial < 50; ++trial) {
            LongitudinalPair pair;
            pair.schema = schema;
            const std::size_t n = 2 + rng.below(15);
            for (std::size_t i = 0; i < n; ++i) {
                const double a = rng.uniform(-5, 5);
                pair.time1.push_back(testutil::row({7.0, a}));
                pair.time2.push_back(testutil::row({7.0, a + rng.uniform(-2, 2)}));
            }
            const DiffMatrix diffs = compute_diffs(pair);
            const NormalizationProfile p = build_profile(diffs, ScaleKind::Aad, tol);
            REQUIRE(p.scales[0].value == 0.0);

            const std::size_t s = 1 + rng.below(std::min<std::size_t>(3, n));
            const FeatureVector x = testutil::row({7.0, 0.0});
            const FeatureVector e = testutil::row({7.0 + 1.0 + rng.uniform01(), 0.0});
            const double got = longitudinal_distance(x, e, diffs, p, {s, NormOrder::L1});
            CHECK(got >= (1.0 / tol) / static_cast<double>(s));
        }
    }
}

TEST_CASE("proximity follows the inverse-MAD weighting") {
    const FeatureSchema schema = testutil::mixed_schema();

    SUBCASE("identity is zero") {
        const FeatureVector x = testutil::row({30, 1});
        CHECK(proximity(schema, x, x, flat_profile({5, 0}, 0.0)) == 0.0);
    }
    SUBCASE("worked example: unit-MAD step plus one categorical change") {
        const FeatureVector x = testutil::row({30, 0});
        const FeatureVector e = testutil::row({35, 1});
        CHECK(proximity(schema, x, e, flat_profile({5, 0}, 0.0)) == 2.0);
    }
    SUBCASE("only categorical changes count 1 each") {
        FeatureSchema cats;
        cats.features = {
            {"c1", FeatureKind::Categorical, {"a", "b"}, false, Monotone::None},
            {"c2", FeatureKind::Categorical, {"a", "b"}, false, Monotone::None},
            {"c3", FeatureKind::Categorical, {"a", "b"}, false, Monotone::None}};
        const FeatureVector x = testutil::row({0, 0, 0});
        const FeatureVector e = testutil::row({1, 1, 1});
        CHECK(proximity(cats, x, e, flat_profile({0, 0, 0}, 0.0)) == 3.0);
    }
}

TEST_CASE("sparsity counts changed features") {
    const FeatureVector x = testutil::row({1, 2, 3, 4});
    CHECK(sparsity(x, x) == 0);

    FeatureVector one = x;
    one.values[2] = 9;
    CHECK(sparsity(x, one) == 1);

    const FeatureVector all = testutil::row({5, 6, 7, 8});
    CHECK(sparsity(x, all) == 4);

    CHECK_THROWS_AS(sparsity(x, testutil::row({1})), Error);
}

TEST_CASE("proximity and sparsity vanish only at the subject itself") {
    Rng rng(31);
    const FeatureSchema schema = testutil::mixed_schema();
    const NormalizationProfile p = flat_profile({2, 0}, 1e-5);
    for (int trial = 0; trial < 200; ++trial) {
        const FeatureVector x =
            testutil::row({rng.uniform(-10, 10), static_cast<double>(rng.below(3))});
        FeatureVector e = x;
        if (rng.bernoulli(0.5)) e.values[0] += rng.uniform(-1, 1);
        if (rng.bernoulli(0.5)) e.values[1] = static_cast<double>(rng.below(3));
        const bool same = e == x;
        CHECK((proximity(schema, x, e, p) == 0.0) == same);
        CHECK((sparsity(x, e) == 0) == same);
    }
}

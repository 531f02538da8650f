#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "longcf/errors.hpp"

namespace longcf {

enum class FeatureKind { Continuous, Categorical };

enum class Monotone { None, NonDecreasing, NonIncreasing };

/// Declares one feature of the tabular space: its kind, whether the search is
/// allowed to change it, and whether changes are direction-constrained.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<std::string> levels;  // categorical only, order as declared
    bool immutable = false;
    Monotone monotone = Monotone::None;

    bool is_continuous() const { return kind == FeatureKind::Continuous; }
    bool is_categorical() const { return kind == FeatureKind::Categorical; }

    // -1 when the value is not a declared level
    std::int32_t level_index(std::string_view value) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == value) return static_cast<std::int32_t>(i);
        return -1;
    }
};

/// Ordered feature declarations; the contract every dataset, metric and model
/// in this library validates against.
struct FeatureSchema {
    std::vector<FeatureSpec> features;
    std::optional<std::string> id_column;

    std::size_t size() const { return features.size(); }
    const FeatureSpec& at(std::size_t j) const { return features[j]; }

    std::optional<std::size_t> index_of(std::string_view name) const {
        for (std::size_t j = 0; j < features.size(); ++j)
            if (features[j].name == name) return j;
        return std::nullopt;
    }

    void validate() const {
        if (features.empty())
            raise(errc::malformed_document, "schema declares no features");
        std::unordered_set<std::string> seen;
        for (const auto& f : features) {
            if (f.name.empty())
                raise(errc::malformed_document, "feature with empty name");
            if (!seen.insert(f.name).second)
                raise(errc::duplicate_feature_name, "feature '" + f.name + "' declared twice");
            if (f.is_categorical()) {
                std::unordered_set<std::string> lv(f.levels.begin(), f.levels.end());
                if (lv.size() != f.levels.size())
                    raise(errc::malformed_document,
                          "feature '" + f.name + "' lists a duplicate level");
                if (lv.size() < 2)
                    raise(errc::empty_level_list,
                          "feature '" + f.name + "' declares fewer than 2 levels");
            }
        }
    }

    // Stable content hash (FNV-1a over a canonical rendering). Used to refuse
    // applying a saved model to data with a different schema.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto mix = [&h](std::string_view s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 0x100000001b3ull;
            }
            h ^= 0x1f;
            h *= 0x100000001b3ull;
        };
        for (const auto& f : features) {
            mix(f.name);
            mix(f.is_continuous() ? "continuous" : "categorical");
            for (const auto& l : f.levels) mix(l);
            mix(f.immutable ? "1" : "0");
            mix(f.monotone == Monotone::None ? "none"
                : f.monotone == Monotone::NonDecreasing ? "nondecreasing"
                                                        : "nonincreasing");
        }
        return h;
    }
};

/// One observation. Continuous features hold finite reals; categorical
/// features hold the level index, stored exactly in the double.
struct FeatureVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double real(std::size_t j) const { return values[j]; }
    std::int32_t level(std::size_t j) const { return static_cast<std::int32_t>(values[j]); }

    bool operator==(const FeatureVector&) const = default;
};

inline void validate_row(const FeatureSchema& schema, const FeatureVector& row,
                         std::size_t row_no = 0) {
    const std::string where = "row " + std::to_string(row_no);
    if (row.size() != schema.size())
        raise(errc::schema_mismatch, where + " has " + std::to_string(row.size()) +
                                         " values, schema declares " +
                                         std::to_string(schema.size()));
    for (std::size_t j = 0; j < schema.size(); ++j) {
        const auto& f = schema.at(j);
        if (f.is_continuous()) {
            if (!std::isfinite(row.real(j)))
                raise(errc::non_finite_value, where + ", feature '" + f.name + "'");
        } else {
            const double v = row.values[j];
            if (v != std::floor(v) || v < 0 ||
                v >= static_cast<double>(f.levels.size()))
                raise(errc::unknown_level, where + ", feature '" + f.name +
                                               "': index out of range");
        }
    }
}

}  // namespace longcf

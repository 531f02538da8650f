#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "longcf/errors.hpp"
#include "longcf/schema.hpp"

namespace longcf {

/// Rows validated against a schema, with optional binary outcomes.
struct Dataset {
    FeatureSchema schema;
    std::vector<FeatureVector> rows;
    std::optional<std::vector<std::int32_t>> labels;

    std::size_t size() const { return rows.size(); }

    void validate() const {
        schema.validate();
        for (std::size_t i = 0; i < rows.size(); ++i) validate_row(schema, rows[i], i + 1);
        if (labels) {
            if (labels->size() != rows.size())
                raise(errc::bad_label, "label count does not match row count");
            for (std::size_t i = 0; i < labels->size(); ++i)
                if ((*labels)[i] != 0 && (*labels)[i] != 1)
                    raise(errc::bad_label, "row " + std::to_string(i + 1));
        }
    }
};

/// Row-aligned observations of the same individuals at two points in time.
struct LongitudinalPair {
    FeatureSchema schema;
    std::vector<FeatureVector> time1;
    std::vector<FeatureVector> time2;

    std::size_t size() const { return time1.size(); }
};

/// One entry of a difference record. Continuous features carry the delta;
/// categorical features carry the observed level transition.
struct DiffCell {
    double delta = 0.0;
    std::int32_t from = -1;
    std::int32_t to = -1;

    bool is_level() const { return from >= 0; }
    bool changed_level() const { return from != to; }
};

using DiffRow = std::vector<DiffCell>;

/// Per-individual changes between two time points; the ground substrate for
/// the plausibility metric.
struct DiffMatrix {
    FeatureSchema schema;
    std::vector<DiffRow> rows;

    std::size_t size() const { return rows.size(); }
};

inline DiffRow diff_row_between(const FeatureSchema& schema, const FeatureVector& a,
                                const FeatureVector& b) {
    if (a.size() != schema.size() || b.size() != schema.size())
        raise(errc::schema_mismatch, "vector length does not match schema");
    DiffRow row(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (schema.at(j).is_continuous()) {
            row[j].delta = b.real(j) - a.real(j);
        } else {
            row[j].from = a.level(j);
            row[j].to = b.level(j);
        }
    }
    return row;
}

inline DiffMatrix compute_diffs(const LongitudinalPair& pair) {
    DiffMatrix out;
    out.schema = pair.schema;
    out.rows.reserve(pair.size());
    for (std::size_t i = 0; i < pair.size(); ++i)
        out.rows.push_back(diff_row_between(pair.schema, pair.time1[i], pair.time2[i]));
    return out;
}

}  // namespace longcf

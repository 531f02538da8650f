#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "longcf/csv.hpp"
#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/schema.hpp"

namespace longcf {

/// Schema file format:
///   { "features": [ { "name": str,
///                     "kind": "continuous" | {"categorical": [levels...]},
///                     "immutable": bool (default false),
///                     "monotone": "none"|"nondecreasing"|"nonincreasing" } ],
///     "id_column": optional str }
inline FeatureSchema parse_schema_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array())
        raise(errc::malformed_document, "missing 'features' array");

    FeatureSchema schema;
    for (const auto& jf : doc["features"]) {
        FeatureSpec spec;
        if (!jf.is_object() || !jf.contains("name") || !jf["name"].is_string())
            raise(errc::malformed_document, "feature entry missing 'name'");
        spec.name = jf["name"].get<std::string>();
        if (!jf.contains("kind"))
            raise(errc::malformed_document, "feature '" + spec.name + "' missing 'kind'");
        const auto& kind = jf["kind"];
        if (kind.is_string() && kind.get<std::string>() == "continuous") {
            spec.kind = FeatureKind::Continuous;
        } else if (kind.is_object() && kind.contains("categorical") &&
                   kind["categorical"].is_array()) {
            spec.kind = FeatureKind::Categorical;
            for (const auto& lv : kind["categorical"]) {
                if (!lv.is_string())
                    raise(errc::malformed_document,
                          "feature '" + spec.name + "': levels must be strings");
                spec.levels.push_back(lv.get<std::string>());
            }
        } else {
            raise(errc::malformed_document, "feature '" + spec.name + "': bad 'kind'");
        }
        if (jf.contains("immutable")) {
            if (!jf["immutable"].is_boolean())
                raise(errc::malformed_document,
                      "feature '" + spec.name + "': 'immutable' must be a boolean");
            spec.immutable = jf["immutable"].get<bool>();
        }
        if (jf.contains("monotone")) {
            const std::string m = jf["monotone"].is_string() ? jf["monotone"].get<std::string>() : "";
            if (m == "none") spec.monotone = Monotone::None;
            else if (m == "nondecreasing") spec.monotone = Monotone::NonDecreasing;
            else if (m == "nonincreasing") spec.monotone = Monotone::NonIncreasing;
            else
                raise(errc::malformed_document,
                      "feature '" + spec.name + "': bad 'monotone' value");
        }
        schema.features.push_back(std::move(spec));
    }
    if (doc.contains("id_column")) {
        if (!doc["id_column"].is_string())
            raise(errc::malformed_document, "'id_column' must be a string");
        schema.id_column = doc["id_column"].get<std::string>();
    }
    schema.validate();
    return schema;
}

inline FeatureSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(errc::missing_file, path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(errc::malformed_document, path.string() + ": " + e.what());
    }
    return parse_schema_json(doc);
}

inline nlohmann::json schema_to_json(const FeatureSchema& schema) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : schema.features) {
        nlohmann::json jf;
        jf["name"] = f.name;
        if (f.is_continuous()) jf["kind"] = "continuous";
        else jf["kind"] = {{"categorical", f.levels}};
        jf["immutable"] = f.immutable;
        jf["monotone"] = f.monotone == Monotone::None ? "none"
                         : f.monotone == Monotone::NonDecreasing ? "nondecreasing"
                                                                 : "nonincreasing";
        features.push_back(std::move(jf));
    }
    nlohmann::json doc;
    doc["features"] = std::move(features);
    if (schema.id_column) doc["id_column"] = *schema.id_column;
    return doc;
}

inline void save_schema(const FeatureSchema& schema, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::missing_file, "cannot open for writing: " + path.string());
    out << schema_to_json(schema).dump(2) << "\n";
}

/// Parses and validates a data CSV against the schema. Categorical cells
/// carry level names verbatim; unknown levels and non-finite numbers are
/// rejected, not imputed.
inline Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema,
                            const std::optional<std::string>& label_column = std::nullopt) {
    schema.validate();
    const CsvTable table = read_csv_file(path);

    std::vector<std::size_t> col(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
        auto c = table.column(schema.at(j).name);
        if (c < 0) raise(errc::missing_column, schema.at(j).name);
        col[j] = static_cast<std::size_t>(c);
    }
    std::int64_t label_col = -1;
    if (label_column) {
        label_col = table.column(*label_column);
        if (label_col < 0) raise(errc::missing_column, *label_column);
    }

    Dataset ds;
    ds.schema = schema;
    ds.rows.reserve(table.rows.size());
    if (label_column) ds.labels.emplace();

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& rec = table.rows[i];
        const std::string where = "row " + std::to_string(i + 1);
        FeatureVector row;
        row.values.resize(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const auto& f = schema.at(j);
            const std::string& cell = rec[col[j]];
            if (f.is_continuous()) {
                auto v = parse_double(cell);
                if (!v || !std::isfinite(*v))
                    raise(errc::non_finite_value,
                          where + ", feature '" + f.name + "': '" + cell + "'");
                row.values[j] = *v;
            } else {
                auto idx = f.level_index(cell);
                if (idx < 0)
                    raise(errc::unknown_level,
                          where + ", feature '" + f.name + "': '" + cell + "'");
                row.values[j] = static_cast<double>(idx);
            }
        }
        ds.rows.push_back(std::move(row));
        if (label_column) {
            const std::string& cell = rec[static_cast<std::size_t>(label_col)];
            if (cell == "0") ds.labels->push_back(0);
            else if (cell == "1") ds.labels->push_back(1);
            else raise(errc::bad_label, where + ": '" + cell + "'");
        }
    }
    return ds;
}

/// Inverse of load_dataset: level names verbatim, continuous values with
/// round-trip precision.
inline CsvTable dataset_to_csv(const Dataset& ds,
                               const std::optional<std::string>& label_column = std::nullopt) {
    CsvTable table;
    for (const auto& f : ds.schema.features) table.header.push_back(f.name);
    const bool with_labels = ds.labels && label_column;
    if (with_labels) table.header.push_back(*label_column);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        std::vector<std::string> rec;
        rec.reserve(table.header.size());
        for (std::size_t j = 0; j < ds.schema.size(); ++j) {
            const auto& f = ds.schema.at(j);
            if (f.is_continuous()) rec.push_back(format_double(ds.rows[i].real(j)));
            else rec.push_back(f.levels[static_cast<std::size_t>(ds.rows[i].level(j))]);
        }
        if (with_labels) rec.push_back((*ds.labels)[i] ? "1" : "0");
        table.rows.push_back(std::move(rec));
    }
    return table;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path,
                         const std::optional<std::string>& label_column = std::nullopt) {
    write_csv_file(path, dataset_to_csv(ds, label_column));
}

/// Loads two row-aligned CSVs describing the same individuals at two points
/// in time. When the schema declares an id column and both files carry it,
/// the ids are checked row by row.
inline LongitudinalPair load_longitudinal(const std::filesystem::path& path_t1,
                                          const std::filesystem::path& path_t2,
                                          const FeatureSchema& schema) {
    Dataset d1 = load_dataset(path_t1, schema);
    Dataset d2 = load_dataset(path_t2, schema);
    if (d1.size() != d2.size())
        raise(errc::row_count_mismatch,
              std::to_string(d1.size()) + " vs " + std::to_string(d2.size()));
    if (schema.id_column) {
        const CsvTable t1 = read_csv_file(path_t1);
        const CsvTable t2 = read_csv_file(path_t2);
        auto c1 = t1.column(*schema.id_column);
        auto c2 = t2.column(*schema.id_column);
        if (c1 < 0 || c2 < 0) raise(errc::missing_column, *schema.id_column);
        for (std::size_t i = 0; i < t1.rows.size(); ++i) {
            const auto& a = t1.rows[i][static_cast<std::size_t>(c1)];
            const auto& b = t2.rows[i][static_cast<std::size_t>(c2)];
            if (a != b)
                raise(errc::alignment_error, "row " + std::to_string(i + 1) + ": id '" + a +
                                                 "' vs '" + b + "'");
        }
    }
    LongitudinalPair pair;
    pair.schema = schema;
    pair.time1 = std::move(d1.rows);
    pair.time2 = std::move(d2.rows);
    return pair;
}

}  // namespace longcf

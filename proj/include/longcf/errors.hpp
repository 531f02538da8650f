#pragma once

#include <stdexcept>
#include <string>

namespace longcf {

// Failure modes surfaced by the public API. Each maps 1:1 to a named error
// in the messages produced by raise().
enum class errc {
    missing_file,
    malformed_document,
    duplicate_feature_name,
    empty_level_list,
    unknown_level,
    non_finite_value,
    missing_column,
    bad_label,
    row_count_mismatch,
    alignment_error,
    empty_input,
    schema_mismatch,
    s_too_large,
    no_labels,
    degenerate_labels,
    infeasible_constraints,
    too_few_parents,
    invalid_argument,
};

inline const char* errc_name(errc c) noexcept {
    switch (c) {
        case errc::missing_file: return "MissingFile";
        case errc::malformed_document: return "MalformedDocument";
        case errc::duplicate_feature_name: return "DuplicateFeatureName";
        case errc::empty_level_list: return "EmptyLevelList";
        case errc::unknown_level: return "UnknownLevel";
        case errc::non_finite_value: return "NonFiniteValue";
        case errc::missing_column: return "MissingColumn";
        case errc::bad_label: return "BadLabel";
        case errc::row_count_mismatch: return "RowCountMismatch";
        case errc::alignment_error: return "AlignmentError";
        case errc::empty_input: return "EmptyInput";
        case errc::schema_mismatch: return "SchemaMismatch";
        case errc::s_too_large: return "STooLarge";
        case errc::no_labels: return "NoLabels";
        case errc::degenerate_labels: return "DegenerateLabels";
        case errc::infeasible_constraints: return "InfeasibleConstraints";
        case errc::too_few_parents: return "TooFewParents";
        case errc::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace longcf

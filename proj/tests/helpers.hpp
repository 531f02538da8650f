#pragma once

// Shared test utilities: throwaway directories and small fixture builders.

#include <filesystem>
#include <fstream>
#include <string>

#include "longcf/longcf.hpp"

namespace testutil {

namespace fs = std::filesystem;

// unique scratch directory, removed on destruction
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        root_ = fs::temp_directory_path() /
                ("longcf_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(root_, ec);
    }
    fs::path path(const std::string& name) const { return root_ / name; }
    const fs::path& root() const { return root_; }

private:
    fs::path root_;
};

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// two-feature schema: one continuous, one 3-level categorical
inline longcf::FeatureSchema mixed_schema() {
    longcf::FeatureSchema schema;
    schema.features = {
        {"age", longcf::FeatureKind::Continuous, {}, false, longcf::Monotone::None},
        {"occupation",
         longcf::FeatureKind::Categorical,
         {"Sales", "Exec", "Tech"},
         false,
         longcf::Monotone::None},
    };
    return schema;
}

inline longcf::FeatureVector row(std::initializer_list<double> values) {
    return longcf::FeatureVector{std::vector<double>(values)};
}

}  // namespace testutil

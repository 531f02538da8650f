#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "longcf/errors.hpp"

namespace longcf {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // column index by name, or -1
    std::int64_t column(std::string_view name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<std::int64_t>(j);
        return -1;
    }
};

// RFC 4180: quoted fields may contain commas, newlines and doubled quotes.
// Accepts both CRLF and LF records. The header row is mandatory.
inline CsvTable read_csv(std::istream& in, const std::string& origin = "csv") {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        if (!any) {
            table.header = std::move(record);
            any = true;
        } else {
            if (record.size() != table.header.size())
                raise(errc::malformed_document,
                      origin + ": record " + std::to_string(table.rows.size() + 1) + " has " +
                          std::to_string(record.size()) + " fields, header has " +
                          std::to_string(table.header.size()));
            table.rows.push_back(std::move(record));
        }
        record.clear();
    };

    char c;
    bool pending = false;  // saw content since last record break
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            pending = true;
        } else if (c == '"') {
            quoted = true;
            pending = true;
        } else if (c == ',') {
            end_field();
            pending = true;
        } else if (c == '\r') {
            // consumed with the following \n; a bare \r also ends the record
            if (in.peek() == '\n') in.get(c);
            end_record();
            pending = false;
        } else if (c == '\n') {
            end_record();
            pending = false;
        } else {
            field.push_back(c);
            pending = true;
        }
    }
    if (quoted) raise(errc::malformed_document, origin + ": unterminated quoted field");
    if (pending) end_record();
    if (!any) raise(errc::malformed_document, origin + ": missing header row");
    return table;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::missing_file, path.string());
    return read_csv(in, path.string());
}

inline std::string csv_quote(const std::string& s) {
    bool needs = s.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv(std::ostream& out, const CsvTable& table) {
    auto put = [&out](const std::vector<std::string>& rec) {
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (j) out.put(',');
            out << csv_quote(rec[j]);
        }
        out << "\r\n";
    };
    put(table.header);
    for (const auto& r : table.rows) put(r);
}

inline void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::missing_file, "cannot open for writing: " + path.string());
    write_csv(out, table);
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
    return v;
}

}  // namespace longcf

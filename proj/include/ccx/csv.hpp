#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ccx/errors.hpp"

namespace ccx::csv {

// Minimal RFC-4180-ish CSV: fields quoted only when they contain a comma,
// quote, or newline; quotes doubled inside quoted fields.

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

inline std::vector<std::string> split(const std::string& line, const std::string& where) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw parse_error(where + ": unterminated quote in CSV line");
    fields.push_back(cur);
    return fields;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Reads all rows of a CSV file, checking the expected header.
inline std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                       const std::string& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open CSV file " + path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != expected_header)
                throw parse_error(path, 1,
                                  "expected header \"" + expected_header + "\", got \"" + line + "\"");
            continue;
        }
        rows.push_back(split(line, path + ":" + std::to_string(lineno)));
    }
    return rows;
}

}  // namespace ccx::csv

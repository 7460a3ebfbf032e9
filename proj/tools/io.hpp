#pragma once

// Atomic file output, CSV tables and JSON documents.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iucert/errors.hpp"

namespace iucert::cli {

using Json = nlohmann::json;  // std::map-backed: keys come out sorted

/// Writes to `path.tmp` and renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

/// Plain decimal below 1e6 in magnitude, scientific from 1e6 up.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const double a = std::abs(x);
    if (a >= 1e6 || (a > 0.0 && a < 1e-4)) {
        std::snprintf(buf, sizeof buf, "%.15e", x);
    } else {
        std::snprintf(buf, sizeof buf, "%.15g", x);
    }
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(const std::vector<double>& row) {
        if (row.size() != header_.size()) throw ConfigError("csv row width does not match header");
        rows_.push_back(row);
    }

    std::string str() const {
        std::string s;
        for (std::size_t j = 0; j < header_.size(); ++j) s += (j ? "," : "") + header_[j];
        s += '\n';
        for (const auto& row : rows_) {
            for (std::size_t j = 0; j < row.size(); ++j) s += (j ? "," : "") + format_number(row[j]);
            s += '\n';
        }
        return s;
    }

    void write(const std::filesystem::path& path) const { write_atomic(path, str()); }
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

/// Non-finite doubles become strings so the document stays valid JSON.
inline Json num(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

inline Json num_array(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

}  // namespace iucert::cli

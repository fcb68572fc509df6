#pragma once

// Deterministic tabular output (CSV / JSON) and run manifests.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace momentray {

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite).
std::string fmt(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Rows of preformatted cells under named columns, with '#' comment lines
/// describing the operation and its parameters.
class Table {
   public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void comment(std::string line) { comments_.push_back(std::move(line)); }
    void prepend_comment(std::string line) { comments_.insert(comments_.begin(), std::move(line)); }
    /// Cells must match the column count.
    void add_row(std::vector<std::string> cells);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::string csv() const;
    /// {"comments": [...], "columns": [...], "rows": [{col: value}, ...]};
    /// cells that parse fully as numbers are emitted as numbers.
    nlohmann::ordered_json json() const;

   private:
    std::vector<std::string> comments_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> outputs;  // path, FNV-1a
    double wall_time_s = 0.0;

    nlohmann::ordered_json json() const;
};

/// Writes `contents` to `path` (binary, '\n' endings as given).
void write_file(const std::string& path, std::string_view contents);

}  // namespace momentray

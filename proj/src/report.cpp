#include "momentray/report.hpp"

#include "momentray/types.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace momentray {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 15];
    return s;
}

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw DomainError("Table: row has " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
}

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void join(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_cell(cells[i]);
    }
    out += '\n';
}

nlohmann::ordered_json cell_value(const std::string& s) {
    double v;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(v)) return v;
    return s;
}

}  // namespace

std::string Table::csv() const {
    std::string out;
    for (const auto& c : comments_) out += "# " + c + "\n";
    join(out, columns_);
    for (const auto& r : rows_) join(out, r);
    return out;
}

nlohmann::ordered_json Table::json() const {
    nlohmann::ordered_json j;
    j["comments"] = comments_;
    j["columns"] = columns_;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows_) {
        nlohmann::ordered_json row;
        for (std::size_t i = 0; i < columns_.size(); ++i) row[columns_[i]] = cell_value(r[i]);
        j["rows"].push_back(std::move(row));
    }
    return j;
}

nlohmann::ordered_json RunManifest::json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [path, hash] : outputs) j["outputs"].push_back({{"path", path}, {"fnv1a", hash}});
    j["wall_time_s"] = wall_time_s;
    return j;
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw Error("failed writing " + path);
}

}  // namespace momentray

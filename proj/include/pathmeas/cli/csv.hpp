#pragma once

// Plot-ready table output: RFC-4180-style CSV (header row, '.' decimal
// separator, 17-significant-digit floats, LF line endings) and an equivalent
// JSON rendering. Files are written atomically (temp file + rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "pathmeas/core.hpp"
#include "json.hpp"

namespace pathmeas::cli {

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Table cell: a double (formatted with %.17g) or a verbatim string.
using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void validate() const {
    for (const auto& row : rows)
      if (row.size() != columns.size())
        throw InvalidArgument("Table: ragged row (expected " +
                              std::to_string(columns.size()) + " cells)");
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  const bool needs_quotes =
      s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string cell_to_csv(const Cell& c) {
  if (std::holds_alternative<double>(c))
    return format_double(std::get<double>(c));
  return csv_escape(std::get<std::string>(c));
}

/// Writes content to path atomically: temp file in the same directory, then
/// rename over the target.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " +
                          path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " +
                        ec.message());
}

}  // namespace detail

inline void emit_csv(const Table& table, const std::filesystem::path& path) {
  table.validate();
  std::string content;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) content += ',';
    content += detail::csv_escape(table.columns[c]);
  }
  content += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) content += ',';
      content += detail::cell_to_csv(row[c]);
    }
    content += '\n';
  }
  detail::atomic_write(path, content);
}

inline void emit_json_table(const Table& table,
                            const std::filesystem::path& path) {
  table.validate();
  nlohmann::json j;
  j["columns"] = table.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const Cell& c : row) {
      if (std::holds_alternative<double>(c)) r.push_back(std::get<double>(c));
      else r.push_back(std::get<std::string>(c));
    }
    j["rows"].push_back(std::move(r));
  }
  detail::atomic_write(path, j.dump(2) + "\n");
}

}  // namespace pathmeas::cli

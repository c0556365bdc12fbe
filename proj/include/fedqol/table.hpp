#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedqol/error.hpp"
#include "fedqol/numstr.hpp"

// Schema-tagged tabular data. Cells are numeric or missing; categorical and
// ordinal variables travel as integer codes. CSV uses a header row, empty
// string for missing, shortest-round-trip floats. The schema rides in a JSON
// sidecar.

namespace fedqol::datakit {

enum class ColumnKind { numeric, categorical, ordinal, date };
enum class ColumnRole { feature, target, join_key, excluded };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  ColumnRole role = ColumnRole::feature;
  std::optional<int> follow_up_month;

  bool operator==(const ColumnSchema&) const = default;
};

using Cell = std::optional<double>;

struct Table {
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<Cell>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.size(); }

  int col_index(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  int target_index() const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].role == ColumnRole::target) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<int> feature_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].role == ColumnRole::feature) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  void check_rectangular() const {
    for (const auto& r : rows) {
      if (r.size() != schema.size()) {
        throw data_error("table row width does not match the schema");
      }
    }
  }

  // Dense feature matrix; missing cells must have been imputed away first.
  std::vector<std::vector<double>> feature_matrix() const {
    std::vector<int> cols = feature_indices();
    std::vector<std::vector<double>> X(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X[i].reserve(cols.size());
      for (int c : cols) {
        if (!rows[i][c]) {
          throw data_error("missing value in feature column '" +
                           schema[c].name + "'; impute first");
        }
        X[i].push_back(*rows[i][c]);
      }
    }
    return X;
  }

  std::vector<double> target_vector() const {
    int t = target_index();
    if (t < 0) throw data_error("table has no target column");
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) {
      if (!r[t]) {
        throw data_error("missing value in target column '" + schema[t].name +
                         "'");
      }
      y.push_back(*r[t]);
    }
    return y;
  }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    for (int c : feature_indices()) names.push_back(schema[c].name);
    return names;
  }

  Table subset(const std::vector<std::size_t>& idx) const {
    Table out;
    out.schema = schema;
    out.rows.reserve(idx.size());
    for (std::size_t i : idx) out.rows.push_back(rows.at(i));
    return out;
  }
};

inline std::string_view kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::ordinal: return "ordinal";
    case ColumnKind::date: return "date";
  }
  return "?";
}

inline ColumnKind kind_from_name(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "ordinal") return ColumnKind::ordinal;
  if (s == "date") return ColumnKind::date;
  throw data_error("unknown column kind '" + std::string(s) + "'");
}

inline std::string_view role_name(ColumnRole r) {
  switch (r) {
    case ColumnRole::feature: return "feature";
    case ColumnRole::target: return "target";
    case ColumnRole::join_key: return "join_key";
    case ColumnRole::excluded: return "excluded";
  }
  return "?";
}

inline ColumnRole role_from_name(std::string_view s) {
  if (s == "feature") return ColumnRole::feature;
  if (s == "target") return ColumnRole::target;
  if (s == "join_key") return ColumnRole::join_key;
  if (s == "excluded") return ColumnRole::excluded;
  throw data_error("unknown column role '" + std::string(s) + "'");
}

inline void save_csv(const Table& t, const std::string& path) {
  t.check_rectangular();
  std::ofstream f(path);
  if (!f) throw data_error("cannot write " + path);
  for (std::size_t i = 0; i < t.schema.size(); ++i) {
    if (t.schema[i].name.find(',') != std::string::npos) {
      throw data_error("column name '" + t.schema[i].name +
                       "' cannot contain a comma");
    }
    f << (i ? "," : "") << t.schema[i].name;
  }
  f << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      if (row[i]) f << fmt_double(*row[i]);
    }
    f << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
    out.back().pop_back();
  }
  return out;
}

}  // namespace detail

inline Table load_csv(const std::string& path,
                      const std::vector<ColumnSchema>& schema) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw data_error(path + ": missing header row");
  std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() != schema.size()) {
    throw data_error(path + ": header has " + std::to_string(header.size()) +
                     " columns, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (header[i] != schema[i].name) {
      throw data_error(path + ": unknown column '" + header[i] +
                       "' (expected '" + schema[i].name + "')");
    }
  }
  Table t;
  t.schema = schema;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != schema.size()) {
      throw data_error(path + ":" + std::to_string(line_no) +
                       ": ragged row (" + std::to_string(cells.size()) +
                       " cells)");
    }
    std::vector<Cell> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) {
      if (c.empty()) {
        row.push_back(std::nullopt);
      } else {
        row.push_back(parse_double(c));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void save_schema(const std::vector<ColumnSchema>& schema,
                        const std::string& path) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema) {
    nlohmann::json j{{"name", c.name},
                     {"kind", kind_name(c.kind)},
                     {"role", role_name(c.role)}};
    if (c.follow_up_month) j["follow_up_month"] = *c.follow_up_month;
    cols.push_back(std::move(j));
  }
  std::ofstream f(path);
  if (!f) throw data_error("cannot write " + path);
  f << nlohmann::json{{"columns", cols}}.dump(2) << '\n';
}

inline std::vector<ColumnSchema> load_schema(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot read " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
  if (!j.contains("columns") || !j["columns"].is_array()) {
    throw data_error(path + ": schema file needs a 'columns' array");
  }
  std::vector<ColumnSchema> schema;
  for (const auto& c : j["columns"]) {
    ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    col.kind = kind_from_name(c.at("kind").get<std::string>());
    col.role = role_from_name(c.at("role").get<std::string>());
    if (c.contains("follow_up_month")) {
      col.follow_up_month = c["follow_up_month"].get<int>();
    }
    schema.push_back(std::move(col));
  }
  return schema;
}

}  // namespace fedqol::datakit

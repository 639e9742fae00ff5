#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sqlspace::corpus {

/// One NL-question / gold-SQL pair tied to a database.
struct Example {
  std::string id;
  std::string question;
  std::string gold_sql;
  std::string db_id;
  std::string dataset;
  std::optional<std::string> difficulty;

  bool operator==(const Example&) const = default;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  bool operator==(const Table&) const = default;
};

struct Schema {
  std::string db_name;
  std::vector<Table> tables;
  bool operator==(const Schema&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<Example> examples;
  bool operator==(const Dataset&) const = default;
};

enum class SourceFormat { spider_json, bird_json, jsonl };

SourceFormat parse_format(const std::string& name);
std::string format_name(SourceFormat fmt);

/// Loads a dataset, normalizing source-specific field names. `dataset_name`
/// labels every example; the canonical jsonl format may carry its own
/// per-example `dataset` field, which wins when present.
Dataset load_dataset(const std::string& path, SourceFormat fmt, const std::string& dataset_name);

/// Canonical serialization: one object per line with keys
/// {id, question, gold_sql, db_id, dataset[, difficulty]}.
void save_dataset_jsonl(const Dataset& ds, const std::string& path);

/// Errors if any id appears twice, listing the collisions.
void check_unique_ids(const Dataset& ds);

/// `db_name | table : col, col | table : col, ...`
std::string linearize_schema(const Schema& schema);

/// `<db_root>/<db_id>/<db_id>.sqlite`
std::string db_path_for(const std::string& db_root, const std::string& db_id);

/// Reads tables (sqlite_master order) and columns (PRAGMA table_info order).
Schema schema_from_sqlite(const std::string& db_path);

/// First k rows of the table in natural scan order, each cell rendered as
/// text with NULL markers.
std::vector<std::vector<std::string>> sample_rows(const std::string& db_path,
                                                  const std::string& table, int k);

/// Tab-separated cells, newline-separated rows.
std::string render_rows_tsv(const std::vector<std::vector<std::string>>& rows);

}  // namespace sqlspace::corpus

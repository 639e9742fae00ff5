#include "sqlspace/corpus.hpp"

#include <sqlite3.h>

#include <map>
#include <set>

#include "sqlspace/common.hpp"
#include "sqlspace/jsonl.hpp"
#include "sqlspace/sqlite_db.hpp"

namespace sqlspace::corpus {

SourceFormat parse_format(const std::string& name) {
  if (name == "spider_json") return SourceFormat::spider_json;
  if (name == "bird_json") return SourceFormat::bird_json;
  if (name == "jsonl") return SourceFormat::jsonl;
  fail("unknown dataset format '", name, "' (expected spider_json, bird_json, or jsonl)");
}

std::string format_name(SourceFormat fmt) {
  switch (fmt) {
    case SourceFormat::spider_json: return "spider_json";
    case SourceFormat::bird_json: return "bird_json";
    case SourceFormat::jsonl: return "jsonl";
  }
  return "?";
}

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    fail("missing or non-string field '", key, "' in ", where);
  }
  return j[key].get<std::string>();
}

Dataset load_spider(const std::string& path, const std::string& dataset_name) {
  json root = json::parse(read_file(path), nullptr, false);
  if (root.is_discarded() || !root.is_array()) fail("expected a json array in ", path);
  Dataset ds;
  ds.name = dataset_name;
  size_t i = 0;
  for (const json& row : root) {
    std::string where = concat(path, "[", i, "]");
    Example ex;
    ex.id = concat(dataset_name, "-", i);
    ex.question = require_string(row, "question", where);
    ex.gold_sql = require_string(row, "query", where);
    ex.db_id = require_string(row, "db_id", where);
    ex.dataset = dataset_name;
    ds.examples.push_back(std::move(ex));
    ++i;
  }
  return ds;
}

Dataset load_bird(const std::string& path, const std::string& dataset_name) {
  json root = json::parse(read_file(path), nullptr, false);
  if (root.is_discarded() || !root.is_array()) fail("expected a json array in ", path);
  Dataset ds;
  ds.name = dataset_name;
  size_t i = 0;
  for (const json& row : root) {
    std::string where = concat(path, "[", i, "]");
    Example ex;
    if (row.contains("question_id")) {
      ex.id = concat(dataset_name, "-", row["question_id"].dump());
    } else {
      ex.id = concat(dataset_name, "-", i);
    }
    ex.question = require_string(row, "question", where);
    ex.gold_sql = require_string(row, "SQL", where);
    ex.db_id = require_string(row, "db_id", where);
    ex.dataset = dataset_name;
    if (row.contains("difficulty") && row["difficulty"].is_string()) {
      ex.difficulty = row["difficulty"].get<std::string>();
    }
    ds.examples.push_back(std::move(ex));
    ++i;
  }
  return ds;
}

Dataset load_canonical_jsonl(const std::string& path, const std::string& dataset_name) {
  Dataset ds;
  ds.name = dataset_name;
  size_t i = 0;
  for (const json& row : read_jsonl(path)) {
    std::string where = concat(path, " line ", i + 1);
    Example ex;
    ex.id = require_string(row, "id", where);
    ex.question = require_string(row, "question", where);
    ex.gold_sql = require_string(row, "gold_sql", where);
    ex.db_id = require_string(row, "db_id", where);
    ex.dataset = row.contains("dataset") && row["dataset"].is_string()
                     ? row["dataset"].get<std::string>()
                     : dataset_name;
    if (row.contains("difficulty") && row["difficulty"].is_string()) {
      ex.difficulty = row["difficulty"].get<std::string>();
    }
    ds.examples.push_back(std::move(ex));
    ++i;
  }
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, SourceFormat fmt, const std::string& dataset_name) {
  switch (fmt) {
    case SourceFormat::spider_json: return load_spider(path, dataset_name);
    case SourceFormat::bird_json: return load_bird(path, dataset_name);
    case SourceFormat::jsonl: return load_canonical_jsonl(path, dataset_name);
  }
  fail("unreachable dataset format");
}

void save_dataset_jsonl(const Dataset& ds, const std::string& path) {
  std::vector<json> rows;
  rows.reserve(ds.examples.size());
  for (const Example& ex : ds.examples) {
    json j = {{"id", ex.id},
              {"question", ex.question},
              {"gold_sql", ex.gold_sql},
              {"db_id", ex.db_id},
              {"dataset", ex.dataset}};
    if (ex.difficulty) j["difficulty"] = *ex.difficulty;
    rows.push_back(std::move(j));
  }
  write_jsonl_atomic(path, rows);
}

void check_unique_ids(const Dataset& ds) {
  std::map<std::string, int> counts;
  for (const Example& ex : ds.examples) counts[ex.id]++;
  std::vector<std::string> dups;
  for (const auto& [id, n] : counts) {
    if (n > 1) dups.push_back(concat(id, " (x", n, ")"));
  }
  if (!dups.empty()) fail("duplicate example ids: ", join(dups, ", "));
}

std::string linearize_schema(const Schema& schema) {
  if (schema.db_name.empty()) fail("linearize_schema: empty db_name");
  if (schema.tables.empty()) fail("linearize_schema: schema for '", schema.db_name, "' has no tables");
  std::string out = schema.db_name;
  for (const Table& t : schema.tables) {
    if (t.columns.empty()) fail("linearize_schema: table '", t.name, "' has no columns");
    out += " | " + t.name + " : " + join(t.columns, ", ");
  }
  return out;
}

std::string db_path_for(const std::string& db_root, const std::string& db_id) {
  return concat(db_root, "/", db_id, "/", db_id, ".sqlite");
}

namespace {

std::string quote_ident(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string cell_to_text(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      return "NULL";
    case SQLITE_INTEGER:
      return std::to_string(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return format_double(sqlite3_column_double(stmt, col));
    case SQLITE_BLOB: {
      const auto* bytes = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
      int n = sqlite3_column_bytes(stmt, col);
      static const char* hex = "0123456789abcdef";
      std::string out = "x'";
      for (int i = 0; i < n; ++i) {
        out += hex[bytes[i] >> 4];
        out += hex[bytes[i] & 0xF];
      }
      out += '\'';
      return out;
    }
    default: {
      const unsigned char* text = sqlite3_column_text(stmt, col);
      return text ? reinterpret_cast<const char*>(text) : "";
    }
  }
}

}  // namespace

Schema schema_from_sqlite(const std::string& db_path) {
  SqliteDb db = SqliteDb::open_readonly(db_path);
  Schema schema;
  {
    // Strip directory and the ".sqlite" suffix to recover the db name.
    std::string base = db_path;
    size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    size_t dot = base.rfind(".sqlite");
    if (dot != std::string::npos) base = base.substr(0, dot);
    schema.db_name = base;
  }

  sqlite3_stmt* stmt = nullptr;
  const char* list_sql =
      "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%'";
  if (sqlite3_prepare_v2(db.handle(), list_sql, -1, &stmt, nullptr) != SQLITE_OK) {
    fail("cannot list tables in ", db_path, ": ", sqlite3_errmsg(db.handle()));
  }
  std::vector<std::string> names;
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    names.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 0)));
  }
  sqlite3_finalize(stmt);

  for (const std::string& name : names) {
    Table table;
    table.name = name;
    std::string pragma = "PRAGMA table_info(" + quote_ident(name) + ")";
    if (sqlite3_prepare_v2(db.handle(), pragma.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
      fail("table_info failed for ", name, ": ", sqlite3_errmsg(db.handle()));
    }
    while (sqlite3_step(stmt) == SQLITE_ROW) {
      table.columns.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 1)));
    }
    sqlite3_finalize(stmt);
    schema.tables.push_back(std::move(table));
  }
  if (schema.tables.empty()) fail("database ", db_path, " contains no tables");
  return schema;
}

std::vector<std::vector<std::string>> sample_rows(const std::string& db_path,
                                                  const std::string& table, int k) {
  if (k < 0) fail("sample_rows: negative k");
  SqliteDb db = SqliteDb::open_readonly(db_path);
  std::string sql = "SELECT * FROM " + quote_ident(table) + " LIMIT " + std::to_string(k);
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
    fail("cannot sample rows from ", table, " in ", db_path, ": ", sqlite3_errmsg(db.handle()));
  }
  std::vector<std::vector<std::string>> rows;
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    int ncol = sqlite3_column_count(stmt);
    std::vector<std::string> row;
    row.reserve(ncol);
    for (int c = 0; c < ncol; ++c) row.push_back(cell_to_text(stmt, c));
    rows.push_back(std::move(row));
  }
  sqlite3_finalize(stmt);
  return rows;
}

std::string render_rows_tsv(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& row : rows) lines.push_back(join(row, "\t"));
  return join(lines, "\n");
}

}  // namespace sqlspace::corpus

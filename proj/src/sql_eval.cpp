#include "sqlspace/sql_eval.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "sqlspace/common.hpp"
#include "sqlspace/sqlite_db.hpp"

namespace sqlspace::sqleval {

namespace {

constexpr double kRealTolerance = 1e-6;

struct Deadline {
  std::chrono::steady_clock::time_point at;
  bool fired = false;
};

int progress_callback(void* ctx) {
  auto* deadline = static_cast<Deadline*>(ctx);
  if (std::chrono::steady_clock::now() >= deadline->at) {
    deadline->fired = true;
    return 1;  // abort the statement
  }
  return 0;
}

int read_only_authorizer(void*, int action, const char*, const char*, const char*, const char*) {
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_FUNCTION:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    default:
      return SQLITE_DENY;
  }
}

Cell read_cell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      return Cell::null();
    case SQLITE_INTEGER:
      return Cell::of_int(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return Cell::of_real(sqlite3_column_double(stmt, col));
    case SQLITE_BLOB: {
      const auto* data = static_cast<const char*>(sqlite3_column_blob(stmt, col));
      const int n = sqlite3_column_bytes(stmt, col);
      return Cell::of_blob(std::string(data, data + n));
    }
    default: {
      const auto* data = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      const int n = sqlite3_column_bytes(stmt, col);
      return Cell::of_text(std::string(data, data + n));
    }
  }
}

// Total order used to canonicalize rows for the multiset comparison. NULLs
// sort first, then numerics by value (int before real on exact ties), then
// text, then blob.
int type_rank(const Cell& c) {
  switch (c.type) {
    case CellType::null_value: return 0;
    case CellType::integer:
    case CellType::real: return 1;
    case CellType::text: return 2;
    case CellType::blob: return 3;
  }
  return 4;
}

double numeric_value(const Cell& c) {
  return c.type == CellType::integer ? static_cast<double>(c.i) : c.r;
}

bool cell_less(const Cell& a, const Cell& b) {
  const int ra = type_rank(a), rb = type_rank(b);
  if (ra != rb) return ra < rb;
  switch (a.type) {
    case CellType::null_value:
      return false;
    case CellType::integer:
    case CellType::real: {
      const double va = numeric_value(a), vb = numeric_value(b);
      if (va != vb) return va < vb;
      return static_cast<int>(a.type) < static_cast<int>(b.type);
    }
    default:
      return a.s < b.s;
  }
}

bool row_less(const Row& a, const Row& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

// Lowercased identifier/keyword tokens at parenthesis depth zero, with
// strings, quoted identifiers, and comments skipped.
std::vector<std::string> top_level_words(const std::string& sql) {
  std::vector<std::string> words;
  std::string current;
  int depth = 0;
  size_t i = 0;
  const size_t n = sql.size();
  auto flush = [&]() {
    if (!current.empty() && depth == 0) words.push_back(current);
    current.clear();
  };
  while (i < n) {
    const char c = sql[i];
    if (c == '\'' || c == '"' || c == '`') {
      flush();
      const char quote = c;
      ++i;
      while (i < n) {
        if (sql[i] == quote) {
          if (i + 1 < n && sql[i + 1] == quote) {  // doubled quote escape
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      continue;
    }
    if (c == '[') {  // bracket-quoted identifier
      flush();
      while (i < n && sql[i] != ']') ++i;
      if (i < n) ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      flush();
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      flush();
      i += 2;
      while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
      i = std::min(n, i + 2);
      continue;
    }
    if (c == '(') {
      flush();
      ++depth;
      ++i;
      continue;
    }
    if (c == ')') {
      flush();
      if (depth > 0) --depth;
      ++i;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      ++i;
      continue;
    }
    flush();
    ++i;
  }
  flush();
  return words;
}

}  // namespace

std::string exec_status_name(ExecStatus s) {
  switch (s) {
    case ExecStatus::ok: return "ok";
    case ExecStatus::error: return "error";
    case ExecStatus::timeout: return "timeout";
  }
  return "?";
}

ExecStatus parse_exec_status(const std::string& name) {
  if (name == "ok") return ExecStatus::ok;
  if (name == "error") return ExecStatus::error;
  if (name == "timeout") return ExecStatus::timeout;
  fail("unknown exec status '", name, "'");
}

ExtractedSql extract_sql(const std::string& raw) {
  ExtractedSql out;
  const size_t open = raw.find("```");
  if (open == std::string::npos) {
    out.sql = trim(raw);
    out.fenced = false;
  } else {
    size_t body = open + 3;
    // The rest of the fence line is a language tag; drop it.
    const size_t eol = raw.find('\n', body);
    const size_t close = raw.find("```", body);
    if (eol != std::string::npos && (close == std::string::npos || eol < close)) {
      body = eol + 1;
    }
    const size_t end = raw.find("```", body);
    out.sql = trim(end == std::string::npos ? raw.substr(body) : raw.substr(body, end - body));
    out.fenced = true;
  }
  if (out.sql.empty()) fail("SQL extraction produced an empty statement");
  return out;
}

ExecResult execute(const std::string& db_path, const std::string& sql, int timeout_ms) {
  ExecResult result;
  SqliteDb db;
  try {
    db = SqliteDb::open_readonly(db_path);
  } catch (const Error& e) {
    result.status = ExecStatus::error;
    result.error = e.what();
    return result;
  }

  sqlite3_set_authorizer(db.handle(), read_only_authorizer, nullptr);
  Deadline deadline{std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms),
                    false};
  sqlite3_progress_handler(db.handle(), 1000, progress_callback, &deadline);

  sqlite3_stmt* stmt = nullptr;
  const int prep = sqlite3_prepare_v2(db.handle(), sql.c_str(), -1, &stmt, nullptr);
  if (prep != SQLITE_OK || stmt == nullptr) {
    result.status = ExecStatus::error;
    result.error = concat("prepare failed: ", sqlite3_errmsg(db.handle()));
    if (stmt != nullptr) sqlite3_finalize(stmt);
    return result;
  }

  const int ncols = sqlite3_column_count(stmt);
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    Row row;
    row.reserve(static_cast<size_t>(ncols));
    for (int c = 0; c < ncols; ++c) row.push_back(read_cell(stmt, c));
    result.rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) {
    if (deadline.fired) {
      result.status = ExecStatus::timeout;
      result.error = concat("query timed out after ", timeout_ms, " ms");
    } else {
      result.status = ExecStatus::error;
      result.error = concat("step failed: ", sqlite3_errmsg(db.handle()));
    }
    result.rows.clear();
  }
  sqlite3_finalize(stmt);
  return result;
}

bool has_top_level_order_by(const std::string& sql) {
  const std::vector<std::string> words = top_level_words(sql);
  for (size_t i = 0; i + 1 < words.size(); ++i) {
    if (words[i] == "order" && words[i + 1] == "by") return true;
  }
  return false;
}

bool cells_equal(const Cell& a, const Cell& b) {
  if (a.type == CellType::null_value || b.type == CellType::null_value) {
    return a.type == b.type;
  }
  const bool a_num = a.type == CellType::integer || a.type == CellType::real;
  const bool b_num = b.type == CellType::integer || b.type == CellType::real;
  if (a_num && b_num) {
    if (a.type == CellType::integer && b.type == CellType::integer) return a.i == b.i;
    return std::abs(numeric_value(a) - numeric_value(b)) <= kRealTolerance;
  }
  if (a.type != b.type) return false;
  return a.s == b.s;  // text or blob, byte-exact
}

bool execution_match(const std::vector<Row>& pred, const std::vector<Row>& gold,
                     bool gold_has_order_by) {
  if (pred.size() != gold.size()) return false;
  const size_t width = gold.empty() ? 0 : gold.front().size();
  for (const Row& r : gold) {
    if (r.size() != width) return false;
  }
  for (const Row& r : pred) {
    if (r.size() != width) return false;
  }

  auto rows_equal = [](const Row& a, const Row& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (!cells_equal(a[i], b[i])) return false;
    }
    return true;
  };

  if (gold_has_order_by) {
    for (size_t i = 0; i < pred.size(); ++i) {
      if (!rows_equal(pred[i], gold[i])) return false;
    }
    return true;
  }

  std::vector<Row> ps = pred;
  std::vector<Row> gs = gold;
  std::sort(ps.begin(), ps.end(), row_less);
  std::sort(gs.begin(), gs.end(), row_less);
  for (size_t i = 0; i < ps.size(); ++i) {
    if (!rows_equal(ps[i], gs[i])) return false;
  }
  return true;
}

json prediction_to_json(const Prediction& p) {
  json j;
  j["example_id"] = p.example_id;
  j["model_id"] = p.model_id;
  j["raw_response"] = p.raw_response;
  j["extracted_sql"] = p.extracted_sql;
  j["exec_status"] = exec_status_name(p.exec_status);
  if (p.correct.has_value()) j["correct"] = *p.correct;
  return j;
}

Prediction prediction_from_json(const json& j) {
  Prediction p;
  p.example_id = j.at("example_id").get<std::string>();
  p.model_id = j.at("model_id").get<std::string>();
  p.raw_response = j.at("raw_response").get<std::string>();
  p.extracted_sql = j.at("extracted_sql").get<std::string>();
  if (j.contains("exec_status")) {
    p.exec_status = parse_exec_status(j.at("exec_status").get<std::string>());
  }
  if (j.contains("correct")) p.correct = j.at("correct").get<int>();
  return p;
}

double ex_accuracy(const std::vector<Prediction>& predictions, const corpus::Dataset& dataset) {
  if (dataset.examples.empty()) fail("ex_accuracy: empty dataset");
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) {
    if (!by_id.emplace(p.example_id, &p).second) {
      fail("ex_accuracy: duplicate prediction for example '", p.example_id, "'");
    }
  }
  std::vector<std::string> missing;
  double sum = 0.0;
  for (const auto& e : dataset.examples) {
    auto it = by_id.find(e.id);
    if (it == by_id.end()) {
      missing.push_back(e.id);
      continue;
    }
    if (!it->second->correct.has_value()) {
      fail("ex_accuracy: prediction for '", e.id, "' was never adjudicated");
    }
    sum += *it->second->correct;
  }
  if (!missing.empty()) {
    fail("ex_accuracy: missing predictions for: ", join(missing, ", "));
  }
  return sum / static_cast<double>(dataset.examples.size());
}

Adjudication adjudicate(const std::string& db_path, const std::string& pred_sql,
                        const std::string& gold_sql, int timeout_ms) {
  const ExecResult gold = execute(db_path, gold_sql, timeout_ms);
  if (gold.status != ExecStatus::ok) {
    fail("gold query failed on ", db_path, ": ", gold.error);
  }
  Adjudication adj;
  const ExecResult pred = execute(db_path, pred_sql, timeout_ms);
  adj.pred_status = pred.status;
  adj.pred_error = pred.error;
  if (pred.status != ExecStatus::ok) {
    adj.correct = 0;
    return adj;
  }
  adj.correct = execution_match(pred.rows, gold.rows, has_top_level_order_by(gold_sql)) ? 1 : 0;
  return adj;
}

}  // namespace sqlspace::sqleval

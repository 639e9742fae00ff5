#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqlspace/corpus.hpp"
#include "sqlspace/jsonl.hpp"

namespace sqlspace::sqleval {

// ── query results ───────────────────────────────────────────────────────────

enum class CellType { null_value, integer, real, text, blob };

struct Cell {
  CellType type = CellType::null_value;
  std::int64_t i = 0;
  double r = 0.0;
  std::string s;  // text bytes or raw blob bytes

  static Cell null() { return Cell{}; }
  static Cell of_int(std::int64_t v) { return Cell{CellType::integer, v, 0.0, {}}; }
  static Cell of_real(double v) { return Cell{CellType::real, 0, v, {}}; }
  static Cell of_text(std::string v) { return Cell{CellType::text, 0, 0.0, std::move(v)}; }
  static Cell of_blob(std::string v) { return Cell{CellType::blob, 0, 0.0, std::move(v)}; }
};

using Row = std::vector<Cell>;

enum class ExecStatus { ok, error, timeout };
std::string exec_status_name(ExecStatus s);
ExecStatus parse_exec_status(const std::string& name);

struct ExecResult {
  ExecStatus status = ExecStatus::ok;
  std::string error;  // set when status != ok
  std::vector<Row> rows;
};

// ── operations ──────────────────────────────────────────────────────────────

struct ExtractedSql {
  std::string sql;
  bool fenced = true;  // false = no fence found, whole response used (warned)
};

/// First triple-backtick fenced block with the language tag stripped; when no
/// fence exists the whole trimmed response is used and `fenced` is false.
/// Empty result after trimming is an error.
ExtractedSql extract_sql(const std::string& raw);

/// Runs `sql` against the database read-only: the connection is opened
/// read-only, an authorizer rejects everything but reads, and a progress
/// handler aborts the query once `timeout_ms` elapses. Only the first
/// statement is executed.
ExecResult execute(const std::string& db_path, const std::string& sql, int timeout_ms = 30000);

/// True when the query has an ORDER BY outside of strings, comments, and
/// parentheses — i.e. one that constrains the final result order.
bool has_top_level_order_by(const std::string& sql);

/// Cell equality: NULL matches only NULL; integers exactly; numerics
/// (real/real or int/real) within 1e-6 absolute; text and blob byte-exact.
bool cells_equal(const Cell& a, const Cell& b);

/// Ordered sequence equality when the gold query has a top-level ORDER BY,
/// multiset equality otherwise (rows sorted by a total order, then compared
/// pairwise with tolerance). Column counts must match on every row.
bool execution_match(const std::vector<Row>& pred, const std::vector<Row>& gold,
                     bool gold_has_order_by);

struct Prediction {
  std::string example_id;
  std::string model_id;
  std::string raw_response;
  std::string extracted_sql;
  ExecStatus exec_status = ExecStatus::ok;
  std::optional<int> correct;  // set iff adjudicated (errors adjudicate to 0)
};

json prediction_to_json(const Prediction& p);
Prediction prediction_from_json(const json& j);

/// Mean of the correct bits over the dataset; every example must have exactly
/// one prediction (missing ids are listed in the error).
double ex_accuracy(const std::vector<Prediction>& predictions, const corpus::Dataset& dataset);

/// Full adjudication of one example: runs gold and predicted SQL and compares.
/// A failing gold query is an error (the fixture, not the prediction, is
/// broken); a failing or timed-out prediction adjudicates to 0.
struct Adjudication {
  ExecStatus pred_status = ExecStatus::ok;
  std::string pred_error;
  int correct = 0;
};
Adjudication adjudicate(const std::string& db_path, const std::string& pred_sql,
                        const std::string& gold_sql, int timeout_ms = 30000);

}  // namespace sqlspace::sqleval

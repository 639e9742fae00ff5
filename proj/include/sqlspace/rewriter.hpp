#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sqlspace/corpus.hpp"
#include "sqlspace/discovery.hpp"
#include "sqlspace/estimator.hpp"
#include "sqlspace/gateway.hpp"

namespace sqlspace::rewriter {

struct PlanEntry {
  std::string predicate_id;
  std::string predicate_text;
  std::string mode;  // "remove" (harmful, bit 1) | "add" (helpful, bit 0)
};

struct RewritePlan {
  std::string example_id;
  std::vector<PlanEntry> entries;  // at most k, in ranking order
};

/// Walks the importance ranking and picks up to k applicable features:
/// harmful features the question exhibits (mode remove) and helpful ones it
/// lacks (mode add). An empty plan means the example passes through with its
/// original prediction.
RewritePlan select_rewrite_targets(const std::string& example_id,
                                   const std::vector<std::uint8_t>& online_bits,
                                   const std::vector<discovery::Predicate>& online_preds,
                                   const estimator::ImportanceRanking& ranking, int k = 3);

/// Prompts the rewriter model; returns the fenced rewritten question, or
/// nullopt for a literal INVALID response (empty extractions are warned and
/// treated as INVALID).
std::optional<std::string> rewrite_question(llm::Gateway& gw, const std::string& rewriter_model,
                                            const std::string& question,
                                            const std::string& linearized_schema,
                                            const std::string& feature, const std::string& mode);

/// Seams for the scoring protocol, so tests can drive it without any LLM:
/// estimator verdict, one rewrite, and one NL2SQL-attempt adjudication.
struct RewriteHooks {
  std::function<int(const corpus::Example&)> predict_success;
  std::function<std::optional<std::string>(const corpus::Example&, const PlanEntry&,
                                           const std::string& question)>
      rewrite;
  std::function<int(const corpus::Example&, const std::string& question)> attempt;
};

struct RewriteRecord {
  std::string example_id;
  std::string feature;
  std::string mode;
  std::string rewritten;  // "INVALID" marker when the rewrite was refused
  int correct = 0;
};

struct AccAtKResult {
  double baseline = 0.0;  // EX of the original predictions over the same examples
  double acc_at_1 = 0.0;
  double acc_at_k = 0.0;
  int k = 0;
  size_t n = 0;
  // 2x2 counts: [estimator predicted correctness correctly?][final attempt correct?]
  size_t est_right_success = 0;
  size_t est_right_failure = 0;
  size_t est_wrong_success = 0;
  size_t est_wrong_failure = 0;
  std::vector<RewriteRecord> records;
};

struct AccAtKOptions {
  int k = 3;
  bool cumulative = false;  // chain rewrites instead of rewriting the original each time
};

/// Feature-modulated scoring protocol: predicted successes keep their
/// original score; predicted failures get up to k feature-modulated rewrites.
/// acc@1 scores only the first attempt, acc@k any attempt; INVALID rewrites
/// and empty plans fall back to the original prediction, which keeps the
/// credit sets nested.
AccAtKResult acc_at_k(const corpus::Dataset& dataset,
                      const std::vector<int>& original_correct,
                      const std::vector<RewritePlan>& plans, const RewriteHooks& hooks,
                      const AccAtKOptions& opts);

}  // namespace sqlspace::rewriter

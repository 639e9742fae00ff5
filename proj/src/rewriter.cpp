#include "sqlspace/rewriter.hpp"

#include <algorithm>
#include <map>

#include "sqlspace/common.hpp"
#include "sqlspace/prompts.hpp"

namespace sqlspace::rewriter {

RewritePlan select_rewrite_targets(const std::string& example_id,
                                   const std::vector<std::uint8_t>& online_bits,
                                   const std::vector<discovery::Predicate>& online_preds,
                                   const estimator::ImportanceRanking& ranking, int k) {
  if (online_bits.size() != online_preds.size()) {
    fail("rewrite plan: vector width ", online_bits.size(), " != predicate count ",
         online_preds.size());
  }
  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < online_preds.size(); ++i) index_of[online_preds[i].id] = i;

  RewritePlan plan;
  plan.example_id = example_id;
  for (const auto& entry : ranking) {
    if (static_cast<int>(plan.entries.size()) >= k) break;
    auto it = index_of.find(entry.predicate_id);
    if (it == index_of.end()) {
      fail("rewrite plan: ranking names unknown predicate '", entry.predicate_id, "'");
    }
    const discovery::Predicate& pred = online_preds[it->second];
    const bool bit = online_bits[it->second] != 0;
    if (pred.polarity == "harmful" && bit) {
      plan.entries.push_back({pred.id, pred.text, "remove"});
    } else if (pred.polarity == "helpful" && !bit) {
      plan.entries.push_back({pred.id, pred.text, "add"});
    }
  }
  return plan;
}

std::optional<std::string> rewrite_question(llm::Gateway& gw, const std::string& rewriter_model,
                                            const std::string& question,
                                            const std::string& linearized_schema,
                                            const std::string& feature, const std::string& mode) {
  llm::ChatRequest req;
  req.model = rewriter_model;
  req.user = prompts::render_template(prompts::TemplateId::rewrite,
                                      {{"feature", feature},
                                       {"mode", mode},
                                       {"question", question},
                                       {"schema", linearized_schema}});
  req.temperature = 0.0;
  const std::string raw = gw.complete(req).text;

  const std::string whole = trim(raw);
  if (whole == "INVALID") return std::nullopt;

  std::string body = whole;
  const size_t open = raw.find("```");
  if (open != std::string::npos) {
    size_t start = open + 3;
    const size_t eol = raw.find('\n', start);
    const size_t close = raw.find("```", start);
    // A language-style tag line before the payload is dropped.
    if (eol != std::string::npos && (close == std::string::npos || eol < close)) start = eol + 1;
    const size_t end = raw.find("```", start);
    body = trim(end == std::string::npos ? raw.substr(start) : raw.substr(start, end - start));
  }
  if (body == "INVALID") return std::nullopt;
  if (body.empty()) {
    log_warn("rewrite produced an empty question; treating as INVALID");
    return std::nullopt;
  }
  return body;
}

AccAtKResult acc_at_k(const corpus::Dataset& dataset, const std::vector<int>& original_correct,
                      const std::vector<RewritePlan>& plans, const RewriteHooks& hooks,
                      const AccAtKOptions& opts) {
  const size_t n = dataset.examples.size();
  if (n == 0) fail("acc@k: empty dataset");
  if (original_correct.size() != n) fail("acc@k: baseline correctness size mismatch");
  if (plans.size() != n) fail("acc@k: plan count mismatch");
  if (opts.k <= 0) fail("acc@k: k must be positive");

  AccAtKResult result;
  result.k = opts.k;
  result.n = n;

  double baseline_sum = 0.0, acc1_sum = 0.0, acck_sum = 0.0;
  for (size_t e = 0; e < n; ++e) {
    const corpus::Example& ex = dataset.examples[e];
    const int orig = original_correct[e];
    baseline_sum += orig;

    const int predicted_success = hooks.predict_success(ex);
    int score1 = orig;
    int scorek = orig;

    if (predicted_success == 0 && !plans[e].entries.empty()) {
      // Each plan entry yields one attempt score; INVALID entries fall back
      // to the original prediction. acc@1 takes the first attempt, acc@k the
      // best one — nested by construction.
      std::string current_question = ex.question;
      int carried = orig;  // what an INVALID attempt falls back to
      int best = 0;
      bool first = true;
      for (const PlanEntry& entry : plans[e].entries) {
        const std::optional<std::string> rewritten =
            hooks.rewrite(ex, entry, opts.cumulative ? current_question : ex.question);
        RewriteRecord record;
        record.example_id = ex.id;
        record.feature = entry.predicate_id;
        record.mode = entry.mode;
        int attempt_score;
        if (!rewritten.has_value()) {
          record.rewritten = "INVALID";
          attempt_score = carried;
        } else {
          record.rewritten = *rewritten;
          attempt_score = hooks.attempt(ex, *rewritten);
          if (opts.cumulative) {
            current_question = *rewritten;
            carried = attempt_score;
          }
        }
        record.correct = attempt_score;
        result.records.push_back(std::move(record));
        if (first) {
          score1 = attempt_score;
          first = false;
        }
        best = std::max(best, attempt_score);
      }
      scorek = best;
    }

    acc1_sum += score1;
    acck_sum += scorek;

    const bool estimator_right = predicted_success == orig;
    const bool success = scorek == 1;
    if (estimator_right && success) ++result.est_right_success;
    if (estimator_right && !success) ++result.est_right_failure;
    if (!estimator_right && success) ++result.est_wrong_success;
    if (!estimator_right && !success) ++result.est_wrong_failure;
  }

  result.baseline = baseline_sum / static_cast<double>(n);
  result.acc_at_1 = acc1_sum / static_cast<double>(n);
  result.acc_at_k = acck_sum / static_cast<double>(n);
  return result;
}

}  // namespace sqlspace::rewriter

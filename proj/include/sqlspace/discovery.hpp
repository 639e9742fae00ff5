#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqlspace/aspects.hpp"
#include "sqlspace/corpus.hpp"
#include "sqlspace/gateway.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::discovery {

/// A binary natural-language feature of an NL2SQL example.
struct Predicate {
  std::string id;
  std::string text;
  Aspect aspect = Aspect::general;
  std::vector<std::string> required_inputs;
  std::string polarity = "harmful";  // harmful | helpful
  std::string origin = "proposed";   // shipped | proposed

  bool operator==(const Predicate&) const = default;
};

std::vector<Predicate> load_predicates(const std::string& path);
void save_predicates(const std::string& path, const std::vector<Predicate>& preds);
const char* aspect_prefix(Aspect a);

/// Aspect-conditioned description of one example (temperature 0.7 by default,
/// matching the description-generation setting).
std::string describe(llm::Gateway& gw, const corpus::Example& ex, const std::string& lin_schema,
                     Aspect aspect, const std::string& model, double temperature = 0.7);

struct ProposeOptions {
  int n = 40;           // predicates requested per iteration
  int j = 5;            // iterations
  int sample_size = 30; // documents shown per iteration
  std::uint64_t seed = 0;
  double temperature = 0.0;
};

/// Parses "1. item" / "2) item" / "- item" lines; strips wrapping quotes and
/// one trailing period; unparseable lines are skipped.
std::vector<std::string> parse_numbered_list(const std::string& text);

/// In-context clustering: j rounds of (sample subset, prompt Proposer for n
/// explanations). Every proposer model sees the same sampled subsets.
/// Returns the concatenated raw candidate pool.
std::vector<std::string> propose_predicates(llm::Gateway& gw,
                                            const std::vector<std::string>& docs,
                                            const std::string& goal,
                                            const std::vector<std::string>& model_ids,
                                            const ProposeOptions& opts);

/// Token-set similarity in [0, 100]: tokenizes on non-alphanumerics,
/// lowercased; compares the sorted intersection string against each side's
/// intersection+remainder string by indel ratio; returns the max. Equal token
/// sets score exactly 100.
int token_set_similarity(const std::string& a, const std::string& b);

/// Full pairwise similarity matrix (OpenMP across pairs when threads != 1;
/// threads == 1 is the serial reference).
Matrix pairwise_similarity(const std::vector<std::string>& texts, int threads = 1);

struct RemovedRecord {
  std::string loser;
  std::string winner;
  int score = 0;
};

struct DedupeResult {
  std::vector<Predicate> kept;
  std::vector<RemovedRecord> removed;
};

/// Greedy first-wins dedupe in input order, comparing only predicates of the
/// same aspect; a candidate scoring >= threshold against any kept predicate
/// is dropped and recorded (against its best-scoring winner).
DedupeResult dedupe(const std::vector<Predicate>& pool, int threshold, int threads = 1);

/// Human-readable review file: parameters, removed pairs with scores, and the
/// kept list, ready for a manual pass.
std::string render_review(const DedupeResult& result, int threshold);

/// Drops the given predicate ids; unknown ids error.
std::vector<Predicate> apply_manual_removals(const std::vector<Predicate>& preds,
                                             const std::vector<std::string>& removal_ids);

}  // namespace sqlspace::discovery

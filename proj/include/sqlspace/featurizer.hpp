#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqlspace/corpus.hpp"
#include "sqlspace/discovery.hpp"
#include "sqlspace/gateway.hpp"
#include "sqlspace/matrix.hpp"

namespace sqlspace::featurizer {

/// 16-hex-char content id binding a matrix to the exact ordered predicate
/// list it was computed against.
std::string predicate_set_hash(const std::vector<discovery::Predicate>& predicates);

/// Leading-token Yes parse: trims whitespace/punctuation/markdown, then a
/// case-insensitive leading "yes" means 1 and anything else 0.
int parse_yes_no(const std::string& response);

/// One binary judgment: renders the aspect's evaluation prompt with only the
/// components that aspect requires and asks the evaluator model. Gateway
/// failures carry (example_id, predicate_id).
int evaluate_predicate(llm::Gateway& gw, const corpus::Example& ex,
                       const std::string& linearized_schema, const discovery::Predicate& pred,
                       const std::string& evaluator_model);

struct FeatureVector {
  std::string example_id;
  std::string predicate_set_id;
  std::vector<std::uint8_t> bits;  // one per predicate, in predicate order
};

/// All predicates for one example; judgments fan out in parallel but land in
/// predicate order. Any evaluation error aborts the vector.
FeatureVector vectorize(llm::Gateway& gw, const corpus::Example& ex,
                        const std::string& linearized_schema,
                        const std::vector<discovery::Predicate>& predicates,
                        const std::string& evaluator_model, int threads = 1);

struct FeatureMatrix {
  std::string predicate_set_id;
  std::vector<std::string> predicate_ids;
  std::vector<FeatureVector> vectors;

  Matrix to_matrix() const;
  std::vector<std::string> example_ids() const;
};

/// The whole corpus; the (example, predicate) grid is the parallel axis.
FeatureMatrix featurize_corpus(llm::Gateway& gw, const corpus::Dataset& dataset,
                               const std::vector<std::string>& linearized_schemas,
                               const std::vector<discovery::Predicate>& predicates,
                               const std::string& evaluator_model, int threads = 1);

/// Restriction to online predicates (required inputs ⊆ {question, schema}),
/// preserving relative order.
std::vector<discovery::Predicate> online_predicates(
    const std::vector<discovery::Predicate>& predicates);
FeatureVector online_projection(const FeatureVector& vec,
                                const std::vector<discovery::Predicate>& predicates);

/// features.jsonl rows are {bits: "0101…", example_id}; the sidecar header
/// binds predicate_set_id and the ordered predicate ids.
void save_features(const std::string& features_path, const std::string& header_path,
                   const FeatureMatrix& matrix);
FeatureMatrix load_features(const std::string& features_path, const std::string& header_path);

}  // namespace sqlspace::featurizer

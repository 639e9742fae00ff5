#include "sqlspace/featurizer.hpp"

#include <cctype>

#include "sqlspace/common.hpp"
#include "sqlspace/jsonl.hpp"
#include "sqlspace/parallel.hpp"
#include "sqlspace/prompts.hpp"
#include "sqlspace/sha256.hpp"

namespace sqlspace::featurizer {

std::string predicate_set_hash(const std::vector<discovery::Predicate>& predicates) {
  std::string blob;
  for (const auto& p : predicates) {
    blob += p.text;
    blob += '\x1f';
    blob += aspect_name(p.aspect);
    blob += '\x1e';
  }
  return sha256_hex(blob).substr(0, 16);
}

int parse_yes_no(const std::string& response) {
  size_t i = 0;
  while (i < response.size() && !std::isalpha(static_cast<unsigned char>(response[i]))) ++i;
  std::string token;
  while (i < response.size() && std::isalpha(static_cast<unsigned char>(response[i]))) {
    token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(response[i]))));
    ++i;
  }
  return token == "yes" ? 1 : 0;
}

int evaluate_predicate(llm::Gateway& gw, const corpus::Example& ex,
                       const std::string& linearized_schema, const discovery::Predicate& pred,
                       const std::string& evaluator_model) {
  std::map<std::string, std::string> vars;
  vars["property"] = pred.text;
  switch (pred.aspect) {
    case Aspect::syntax:
      vars["question"] = ex.question;
      break;
    case Aspect::sql_syntax:
      vars["query"] = ex.gold_sql;
      break;
    case Aspect::semantics:
    case Aspect::pragmatics:
    case Aspect::general:
      vars["question"] = ex.question;
      vars["query"] = ex.gold_sql;
      break;
    case Aspect::db_reasoning:
      vars["schema"] = linearized_schema;
      vars["question"] = ex.question;
      break;
  }

  llm::ChatRequest req;
  req.model = evaluator_model;
  req.user = prompts::render_template(prompts::eval_template_for(pred.aspect), vars);
  req.temperature = 0.0;
  try {
    return parse_yes_no(gw.complete(req).text);
  } catch (const Error& e) {
    fail("predicate evaluation failed (example '", ex.id, "', predicate '", pred.id,
         "'): ", e.what());
  }
}

FeatureVector vectorize(llm::Gateway& gw, const corpus::Example& ex,
                        const std::string& linearized_schema,
                        const std::vector<discovery::Predicate>& predicates,
                        const std::string& evaluator_model, int threads) {
  if (predicates.empty()) fail("vectorize: empty predicate list");
  FeatureVector vec;
  vec.example_id = ex.id;
  vec.predicate_set_id = predicate_set_hash(predicates);
  vec.bits.assign(predicates.size(), 0);
  parallel_for_indexed(predicates.size(), threads, [&](size_t p) {
    vec.bits[p] = static_cast<std::uint8_t>(
        evaluate_predicate(gw, ex, linearized_schema, predicates[p], evaluator_model));
  });
  return vec;
}

Matrix FeatureMatrix::to_matrix() const {
  Matrix m(vectors.size(), predicate_ids.size());
  for (size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].bits.size() != predicate_ids.size()) {
      fail("feature matrix: vector for '", vectors[r].example_id, "' has ",
           vectors[r].bits.size(), " bits, expected ", predicate_ids.size());
    }
    for (size_t c = 0; c < predicate_ids.size(); ++c) {
      m.at(r, c) = vectors[r].bits[c];
    }
  }
  return m;
}

std::vector<std::string> FeatureMatrix::example_ids() const {
  std::vector<std::string> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(v.example_id);
  return out;
}

FeatureMatrix featurize_corpus(llm::Gateway& gw, const corpus::Dataset& dataset,
                               const std::vector<std::string>& linearized_schemas,
                               const std::vector<discovery::Predicate>& predicates,
                               const std::string& evaluator_model, int threads) {
  if (predicates.empty()) fail("featurize: empty predicate list");
  if (linearized_schemas.size() != dataset.examples.size()) {
    fail("featurize: schema count ", linearized_schemas.size(), " != example count ",
         dataset.examples.size());
  }
  FeatureMatrix matrix;
  matrix.predicate_set_id = predicate_set_hash(predicates);
  for (const auto& p : predicates) matrix.predicate_ids.push_back(p.id);
  matrix.vectors.resize(dataset.examples.size());
  for (size_t e = 0; e < dataset.examples.size(); ++e) {
    matrix.vectors[e].example_id = dataset.examples[e].id;
    matrix.vectors[e].predicate_set_id = matrix.predicate_set_id;
    matrix.vectors[e].bits.assign(predicates.size(), 0);
  }

  // The full (example, predicate) grid is one flat parallel loop; every slot
  // is an independent judgment.
  const size_t n_preds = predicates.size();
  parallel_for_indexed(dataset.examples.size() * n_preds, threads, [&](size_t idx) {
    const size_t e = idx / n_preds;
    const size_t p = idx % n_preds;
    matrix.vectors[e].bits[p] = static_cast<std::uint8_t>(evaluate_predicate(
        gw, dataset.examples[e], linearized_schemas[e], predicates[p], evaluator_model));
  });
  return matrix;
}

std::vector<discovery::Predicate> online_predicates(
    const std::vector<discovery::Predicate>& predicates) {
  std::vector<discovery::Predicate> out;
  for (const auto& p : predicates) {
    if (is_online(p.required_inputs)) out.push_back(p);
  }
  return out;
}

FeatureVector online_projection(const FeatureVector& vec,
                                const std::vector<discovery::Predicate>& predicates) {
  if (vec.bits.size() != predicates.size()) {
    fail("online_projection: vector width ", vec.bits.size(), " != predicate count ",
         predicates.size());
  }
  FeatureVector out;
  out.example_id = vec.example_id;
  out.predicate_set_id = predicate_set_hash(online_predicates(predicates));
  for (size_t i = 0; i < predicates.size(); ++i) {
    if (is_online(predicates[i].required_inputs)) out.bits.push_back(vec.bits[i]);
  }
  return out;
}

void save_features(const std::string& features_path, const std::string& header_path,
                   const FeatureMatrix& matrix) {
  std::vector<json> rows;
  rows.reserve(matrix.vectors.size());
  for (const auto& v : matrix.vectors) {
    std::string bits;
    bits.reserve(v.bits.size());
    for (std::uint8_t b : v.bits) bits.push_back(b ? '1' : '0');
    rows.push_back(json{{"bits", bits}, {"example_id", v.example_id}});
  }
  write_jsonl_atomic(features_path, rows);

  json header;
  header["predicate_set_id"] = matrix.predicate_set_id;
  header["predicate_ids"] = matrix.predicate_ids;
  header["n_predicates"] = matrix.predicate_ids.size();
  write_file_atomic(header_path, header.dump(2) + "\n");
}

FeatureMatrix load_features(const std::string& features_path, const std::string& header_path) {
  FeatureMatrix matrix;
  const json header = json::parse(read_file(header_path));
  matrix.predicate_set_id = header.at("predicate_set_id").get<std::string>();
  matrix.predicate_ids = header.at("predicate_ids").get<std::vector<std::string>>();

  for (const json& row : read_jsonl(features_path)) {
    FeatureVector vec;
    vec.example_id = row.at("example_id").get<std::string>();
    vec.predicate_set_id = matrix.predicate_set_id;
    const std::string bits = row.at("bits").get<std::string>();
    if (bits.size() != matrix.predicate_ids.size()) {
      fail("features: row for '", vec.example_id, "' has ", bits.size(), " bits, header says ",
           matrix.predicate_ids.size());
    }
    for (char c : bits) {
      if (c != '0' && c != '1') fail("features: non-binary bit in row for '", vec.example_id, "'");
      vec.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    matrix.vectors.push_back(std::move(vec));
  }
  return matrix;
}

}  // namespace sqlspace::featurizer

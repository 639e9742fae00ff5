#pragma once

#include <map>
#include <string>

#include "sqlspace/aspects.hpp"

namespace sqlspace::prompts {

enum class TemplateId {
  describe_syntax,
  describe_sql_syntax,
  describe_semantics,
  describe_pragmatics,
  describe_db_reasoning,
  describe_control,  // aspect-agnostic ablation
  propose,
  eval_syntax,
  eval_sql_syntax,
  eval_semantics,
  eval_pragmatics,
  eval_db_reasoning,
  nl2sql,
  rewrite,
};

const char* template_name(TemplateId id);

/// Raw template text with its {slot} markers still in place.
const std::string& template_text(TemplateId id);

/// Substitutes every occurrence of each declared {slot}. A declared slot
/// without a binding errors by name. Brace tokens that are not declared
/// slots of the template render literally.
std::string render_template(TemplateId id, const std::map<std::string, std::string>& vars);

TemplateId describe_template_for(Aspect a);
TemplateId eval_template_for(Aspect a);

/// Clustering goal line used by the proposer for the given aspect.
const std::string& goal_for(Aspect a);
/// Control goal over raw examples (direct-proposal ablation).
const std::string& goal_control_examples();
/// Control goal over aspect-agnostic descriptions.
const std::string& goal_control_descriptions();

}  // namespace sqlspace::prompts

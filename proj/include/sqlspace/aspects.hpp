#pragma once

#include <string>
#include <vector>

namespace sqlspace {

/// The five description/predicate aspects, plus `general` for the
/// aspect-agnostic ablation.
enum class Aspect { syntax, sql_syntax, semantics, pragmatics, db_reasoning, general };

const char* aspect_name(Aspect a);
Aspect parse_aspect(const std::string& name);
std::vector<Aspect> all_aspects();  // the five standard aspects

/// Inputs a predicate of this aspect needs at evaluation time. Predicates
/// whose inputs are a subset of {question, schema} are usable online
/// (before any gold SQL exists).
std::vector<std::string> required_inputs_for(Aspect a);

bool is_online(const std::vector<std::string>& required_inputs);

}  // namespace sqlspace

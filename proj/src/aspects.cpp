#include "sqlspace/aspects.hpp"

#include "sqlspace/common.hpp"

namespace sqlspace {

const char* aspect_name(Aspect a) {
  switch (a) {
    case Aspect::syntax: return "syntax";
    case Aspect::sql_syntax: return "sql_syntax";
    case Aspect::semantics: return "semantics";
    case Aspect::pragmatics: return "pragmatics";
    case Aspect::db_reasoning: return "db_reasoning";
    case Aspect::general: return "general";
  }
  return "?";
}

Aspect parse_aspect(const std::string& name) {
  for (Aspect a : {Aspect::syntax, Aspect::sql_syntax, Aspect::semantics, Aspect::pragmatics,
                   Aspect::db_reasoning, Aspect::general}) {
    if (name == aspect_name(a)) return a;
  }
  fail("unknown aspect '", name, "'");
}

std::vector<Aspect> all_aspects() {
  return {Aspect::syntax, Aspect::sql_syntax, Aspect::semantics, Aspect::pragmatics,
          Aspect::db_reasoning};
}

std::vector<std::string> required_inputs_for(Aspect a) {
  switch (a) {
    case Aspect::syntax: return {"question"};
    case Aspect::sql_syntax: return {"gold_sql"};
    case Aspect::semantics: return {"question", "gold_sql"};
    case Aspect::pragmatics: return {"question", "gold_sql"};
    case Aspect::db_reasoning: return {"question", "schema"};
    // Ablation-only predicates are evaluated with the generic question+SQL
    // prompt, so they carry the same inputs as semantics.
    case Aspect::general: return {"question", "gold_sql"};
  }
  fail("unreachable aspect");
}

bool is_online(const std::vector<std::string>& required_inputs) {
  for (const std::string& r : required_inputs) {
    if (r != "question" && r != "schema") return false;
  }
  return true;
}

}  // namespace sqlspace

#include "sqlspace/prompts.hpp"

#include <array>
#include <vector>

#include "sqlspace/common.hpp"

namespace sqlspace::prompts {

namespace {

struct Template {
  std::string text;
  std::vector<std::string> slots;
};

// All describe prompts share this preamble; the schema form is spelled the
// way the instructions spell it.
const std::string kDescribePrefix =
    "You are an expert SQL programmer and linguist. I will give you a natural language question "
    "and the corresponding SQL query. I will also provide the underlying database schema in the "
    "form [database_name] | [table] : [column], [column] ...| [table] : ... | .... ";

const std::string kDescribeInputs = "\n\nSchema: {schema}\nQuestion: {question}\nSQL: {gold_sql}";

const std::vector<std::string> kDescribeSlots = {"schema", "question", "gold_sql"};

Template make_describe(const std::string& body) {
  return Template{kDescribePrefix + body + kDescribeInputs, kDescribeSlots};
}

const Template& get_template(TemplateId id) {
  static const std::map<TemplateId, Template> registry = [] {
    std::map<TemplateId, Template> m;

    m[TemplateId::describe_syntax] = make_describe(
        "I am a linguist trying to learn about examples in my dataset from a linguistic syntax "
        "perspective. This includes anything about word order, grammatical relations, "
        "hierarchical sentence structure (constituency), agreement, the nature of cross "
        "linguistic variation, and the relationship between form and meaning. Output a highly "
        "detailed paragraph describing ONLY fine-grained linguistic syntactic observations about "
        "the natural language question.");

    m[TemplateId::describe_sql_syntax] = make_describe(
        "I am a database engineer trying to learn about examples in my dataset from a SQL syntax "
        "perspective. Specifically, I would like to learn about the structure of the SQL query, "
        "the complexity of the query, the relationship between the query and the provided "
        "underlying database schema, and the nature of cross-database variation. Output a highly "
        "detailed paragraph describing ONLY fine-grained observations about the SQL query.");

    m[TemplateId::describe_semantics] = make_describe(
        "I am a database engineer trying to learn about examples in my dataset of SQL queries. "
        "Specifically, I would like to learn about the relationship between the provided natural "
        "language question and the SQL query. For example, how does the natural language "
        "question relate to the SQL query? Do they exhibit parallel characteristics, or is there "
        "some reasoning required to map between the two? What kind of reasoning is required? "
        "What are the similarities and differences between the two? Output a highly detailed "
        "paragraph describing ONLY fine-grained comparison-based observations about the natural "
        "language question versus the SQL query.");

    m[TemplateId::describe_pragmatics] = make_describe(
        "I am a linguist trying to learn about examples in my dataset from a linguistic "
        "pragmatics perspective. Specifically, I would like to learn about the pragmatics of the "
        "natural language question. For example, what speech acts are used in the question? "
        "Include commentary on Gricean theory, implicature, relevance, and any other information "
        "about how word choice and context contribute to the meaning. Does the question exhibit "
        "vagueness, underspecification, or ambiguity that make it difficult to understand the "
        "author's intent? Output a highly detailed paragraph describing ONLY fine-grained "
        "linguistic pragmatic observations about the natural language question.");

    m[TemplateId::describe_db_reasoning] = make_describe(
        "The provided natural language question is attempting to access information from the "
        "provided database schema. I am a database engineer and I want to learn about the "
        "relationship between the natural language question and the provided database schema. "
        "To what degree is the question grounded in the schema? Does the question use exact "
        "column names from the schema? Do the concepts and need expressed in the question have "
        "clear counterparts in the database schema? If not, what types of reasoning are required "
        "to map between the two? Explain what kind of reasoning is required. For example, is "
        "linguistic reasoning required (e.g. analogical reasoning, syntactic reasoning or "
        "paraphrastic reasoning)? Is commonsense reasoning required? Is logical reasoning "
        "required (e.g. deductive reasoning or causal reasoning). How does the structure of the "
        "question (syntactic or semantic) relate to the structure of the database schema? Output "
        "a highly detailed paragraph describing ONLY these sorts of fine-grained observations "
        "about the relationship between the natural language question and the provided database "
        "schema.");

    m[TemplateId::describe_control] = make_describe(
        "I am a database engineer trying to learn about examples in my dataset. Output a "
        "paragraph describing the example.");

    m[TemplateId::propose] = Template{
        "{goal}\n\n{samples}\n\nGenerate a list of {n} explanations for candidate clusters "
        "based on the sample set. Each explanation must be a short binary predicate that is "
        "true for some samples and false for others. Output a numbered list with one "
        "explanation per line and output nothing else.",
        {"goal", "samples", "n"}};

    m[TemplateId::eval_syntax] = Template{
        "You will be given some text. Determine whether the TEXT satisfies a PROPERTY. Respond "
        "with Yes or No. When uncertain, output No.\n\nNow complete the following "
        "example:\n\nPROPERTY: {property}\nTEXT: {question}\n\nDoes the {text} exhibit the "
        "PROPERTY?:",
        {"property", "question"}};

    m[TemplateId::eval_sql_syntax] = Template{
        "You will be given a SQL query and a PROPERTY. Determine whether the SQL query satisfies "
        "the PROPERTY. Respond with Yes or No. When uncertain, output No.\n\nNow complete the "
        "following example:\n\nPROPERTY: {property}\nSQL Query: {query}\n\nDoes the {query} "
        "exhibit the PROPERTY?:",
        {"property", "query"}};

    const std::string eval_pair_text =
        "You will be given a natural language question and its SQL translation. You will also "
        "be given a PROPERTY. Determine whether the natural language question and its SQL "
        "translation satisfy the PROPERTY. Respond with Yes or No. When uncertain, output "
        "No.\n\nNow complete the following example:\n\nPROPERTY: {property}\nNATURAL LANGUAGE "
        "QUESTION: {question}\nSQL Query: {query}\n\nDoes the question and its SQL translation "
        "exhibit the PROPERTY?:";
    m[TemplateId::eval_semantics] = Template{eval_pair_text, {"property", "question", "query"}};
    m[TemplateId::eval_pragmatics] = Template{eval_pair_text, {"property", "question", "query"}};

    m[TemplateId::eval_db_reasoning] = Template{
        "You will be given a natural language question that is trying to query a database as "
        "well as the database schema. You will also be given a PROPERTY. Determine whether the "
        "natural language question satisfies the PROPERTY. Respond with Yes or No. When "
        "uncertain, output No.\n\nNow complete the following example:\n\nPROPERTY: "
        "{property}\nDATABASE SCHEMA: {schema}\nQUESTION: {question}\n\nDoes the natural "
        "language question exhibit the PROPERTY with respect to the database schema?",
        {"property", "schema", "question"}};

    m[TemplateId::nl2sql] = Template{
        "Write an SQLite query to answer the following question given the database schema and "
        "example rows. Please wrap your code answer using ```:\nSchema: {schema}\nQuestion: "
        "{question}\nWrite a SQLite query wrapped in ``` to answer the question and output "
        "nothing else:",
        {"schema", "question"}};

    m[TemplateId::rewrite] = Template{
        "Given the definition of {feature}, I want to rewrite the following natural language "
        "question to {mode} {feature}. I want the meaning and intent of the question to be "
        "preserved. The question I want to rewrite is {question}\n\nIt is trying to query a "
        "database with this schema: {schema}. Only output your rewritten question and wrap it "
        "in ```. Your question must be as detailed as possible. DO NOT drop information from "
        "the original question. If the question cannot be rewritten with the property, output "
        "\"INVALID\".\n\nRewritten semantically equivalent natural language question that "
        "expresses {feature}:",
        {"feature", "mode", "question", "schema"}};

    return m;
  }();
  auto it = registry.find(id);
  if (it == registry.end()) fail("unknown template id");
  return it->second;
}

std::string replace_all_occurrences(std::string text, const std::string& token,
                                    const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string::npos) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

const char* template_name(TemplateId id) {
  switch (id) {
    case TemplateId::describe_syntax: return "describe_syntax";
    case TemplateId::describe_sql_syntax: return "describe_sql_syntax";
    case TemplateId::describe_semantics: return "describe_semantics";
    case TemplateId::describe_pragmatics: return "describe_pragmatics";
    case TemplateId::describe_db_reasoning: return "describe_db_reasoning";
    case TemplateId::describe_control: return "describe_control";
    case TemplateId::propose: return "propose";
    case TemplateId::eval_syntax: return "eval_syntax";
    case TemplateId::eval_sql_syntax: return "eval_sql_syntax";
    case TemplateId::eval_semantics: return "eval_semantics";
    case TemplateId::eval_pragmatics: return "eval_pragmatics";
    case TemplateId::eval_db_reasoning: return "eval_db_reasoning";
    case TemplateId::nl2sql: return "nl2sql";
    case TemplateId::rewrite: return "rewrite";
  }
  return "?";
}

const std::string& template_text(TemplateId id) { return get_template(id).text; }

std::string render_template(TemplateId id, const std::map<std::string, std::string>& vars) {
  const Template& t = get_template(id);
  std::string out = t.text;
  for (const std::string& slot : t.slots) {
    auto it = vars.find(slot);
    if (it == vars.end()) {
      fail("missing placeholder binding '", slot, "' for template ", template_name(id));
    }
    out = replace_all_occurrences(out, "{" + slot + "}", it->second);
  }
  return out;
}

TemplateId describe_template_for(Aspect a) {
  switch (a) {
    case Aspect::syntax: return TemplateId::describe_syntax;
    case Aspect::sql_syntax: return TemplateId::describe_sql_syntax;
    case Aspect::semantics: return TemplateId::describe_semantics;
    case Aspect::pragmatics: return TemplateId::describe_pragmatics;
    case Aspect::db_reasoning: return TemplateId::describe_db_reasoning;
    case Aspect::general: return TemplateId::describe_control;
  }
  fail("unreachable aspect");
}

TemplateId eval_template_for(Aspect a) {
  switch (a) {
    case Aspect::syntax: return TemplateId::eval_syntax;
    case Aspect::sql_syntax: return TemplateId::eval_sql_syntax;
    case Aspect::semantics: return TemplateId::eval_semantics;
    case Aspect::pragmatics: return TemplateId::eval_pragmatics;
    case Aspect::db_reasoning: return TemplateId::eval_db_reasoning;
    // Ablation-discovered predicates carry no aspect-specific evaluator;
    // the generic question+SQL form covers them.
    case Aspect::general: return TemplateId::eval_semantics;
  }
  fail("unreachable aspect");
}

const std::string& goal_for(Aspect a) {
  static const std::string syntax =
      "Here are some detailed descriptions of natural language questions and their "
      "corresponding SQL queries. I want to cluster these descriptions based on observations "
      "about linguistic syntax.";
  static const std::string sql_syntax =
      "Here are some detailed descriptions of natural language questions and their "
      "corresponding SQL queries. I want to cluster these descriptions based on observations "
      "about the syntax of the SQL query.";
  static const std::string semantics =
      "Here are some detailed descriptions of natural language questions and their "
      "corresponding SQL queries. I want to cluster these descriptions based on comparisons "
      "between the provided natural language question and the SQL query.";
  static const std::string pragmatics =
      "Here are some detailed descriptions of natural language questions and their "
      "corresponding SQL queries. I want to cluster these descriptions based on observations "
      "about linguistic pragmatics.";
  // "underyling" is spelled this way in the source prompt.
  static const std::string db_reasoning =
      "Here are some detailed descriptions of natural language questions written to query an "
      "underyling database schema. I want to cluster these descriptions based on the "
      "relationship and reasoning between the provided natural language question and the "
      "underyling database schema.";
  switch (a) {
    case Aspect::syntax: return syntax;
    case Aspect::sql_syntax: return sql_syntax;
    case Aspect::semantics: return semantics;
    case Aspect::pragmatics: return pragmatics;
    case Aspect::db_reasoning: return db_reasoning;
    case Aspect::general: return goal_control_descriptions();
  }
  fail("unreachable aspect");
}

const std::string& goal_control_examples() {
  static const std::string g =
      "Here are some examples of natural language questions and their corresponding SQL "
      "queries. I want to cluster these examples based on similarities.";
  return g;
}

const std::string& goal_control_descriptions() {
  static const std::string g =
      "Here are some descriptions of natural language questions and their corresponding SQL "
      "queries. I want to cluster these examples based on similarities.";
  return g;
}

}  // namespace sqlspace::prompts

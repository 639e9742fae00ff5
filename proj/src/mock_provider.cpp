#include "sqlspace/common.hpp"
#include "sqlspace/gateway.hpp"

namespace sqlspace::llm {

namespace {

/// Text between `begin` (exclusive) and `end`; end=="" means to end of text.
std::string slice_between(const std::string& text, const std::string& begin,
                          const std::string& end) {
  size_t b = text.find(begin);
  if (b == std::string::npos) return "";
  b += begin.size();
  if (end.empty()) return text.substr(b);
  size_t e = text.find(end, b);
  if (e == std::string::npos) return text.substr(b);
  return text.substr(b, e - b);
}

std::uint64_t byte_sum(const std::string& s) {
  std::uint64_t sum = 0;
  for (unsigned char c : s) sum += c;
  return sum;
}

const std::vector<std::string>& bank_for(const std::string& user) {
  static const std::vector<std::string> syntax = {
      "contains subordinate clauses",
      "uses subordinate clauses",
      "has a compound sentence structure",
      "contains relative clauses",
      "employs passive voice constructions",
      "uses coordinating conjunctions",
      "contains nested prepositional phrases",
      "employs technical lexicon",
      "has a clear logical flow",
      "uses shorthand notation",
      "contains multiple coordinate phrases",
      "employs parenthetical expressions",
  };
  static const std::vector<std::string> sql = {
      "contains a JOIN",
      "uses a JOIN",
      "has a nested subquery",
      "contains subqueries",
      "employs a GROUP BY clause",
      "includes aggregate functions",
      "contains a WHERE clause",
      "uses a LIMIT clause",
      "includes an ORDER BY clause",
      "uses a distinct keyword",
      "retrieves data from multiple tables",
      "follows a basic SELECT-FROM-WHERE structure",
  };
  static const std::vector<std::string> semantics = {
      "requires domain-specific knowledge",
      "involves semantic mapping",
      "has a direct relationship with no reasoning required",
      "involves complex logical reasoning",
      "requires identifying table and column names",
      "involves reasoning about unique identifiers",
      "involves nested logic",
      "requires additional contextual understanding",
      "involves temporal constraints in the natural language question",
      "requires mapping of high-level concepts to database schema",
  };
  static const std::vector<std::string> pragmatics = {
      "has a clear and specific request",
      "contains technical jargon",
      "assumes prior knowledge",
      "relies on presuppositions",
      "underspecifies information",
      "uses rhetorical questions",
      "relies on conversational implicature",
      "demonstrates careful word choice",
      "contains vague or ambiguous language",
      "implies a causal relationship",
  };
  static const std::vector<std::string> db = {
      "uses exact column names from the schema to query for specific values",
      "requires commonsense reasoning to understand the question",
      "requires semantic mapping between natural language and schema",
      "uses syntactic variation to describe a condition",
      "closely grounded in the database schema, although it does not use exact column names",
      "requires basic deductive logic to map between the natural language question and the schema",
  };
  static const std::vector<std::string> mixed = {
      "asks about specific entities",
      "seeks details from a database",
      "requests information about counts or totals",
      "asks for maximum or minimum values",
      "filters results by a condition",
      "asks about comparisons",
      "requests specific information based on database criteria",
      "seeks to retrieve data based on specific criteria",
  };
  if (contains(user, "linguistic syntax")) return syntax;
  if (contains(user, "syntax of the SQL query")) return sql;
  if (contains(user, "comparisons between the provided natural language question")) {
    return semantics;
  }
  if (contains(user, "linguistic pragmatics")) return pragmatics;
  if (contains(user, "underyling database schema")) return db;
  return mixed;
}

std::string mock_describe(const std::string& user) {
  const std::string question = slice_between(user, "\nQuestion: ", "\nSQL: ");
  static const std::vector<std::string> observations = {
      "The question relies on a compact noun phrase as its subject.",
      "A prepositional phrase narrows the scope of the request.",
      "The phrasing is declarative but functions as a request for data.",
      "Coordinated conditions are joined with an explicit conjunction.",
      "The wording presumes familiarity with the stored entities.",
      "Quantified expressions pin down the exact records wanted.",
      "The query structure mirrors the flat shape of the question.",
      "Mapping the question onto the schema needs one synonym step.",
  };
  std::uint64_t h = fnv1a64(user);
  std::string out = "The example asks: \"" + question + "\". ";
  for (int i = 0; i < 3; ++i) {
    out += observations[(h + 37 * static_cast<std::uint64_t>(i)) % observations.size()];
    if (i < 2) out += " ";
  }
  return out;
}

std::string mock_propose(const std::string& user) {
  const std::vector<std::string>& bank = bank_for(user);
  std::string n_text = trim(slice_between(user, "Generate a list of ", " explanations"));
  int n = 8;
  try {
    n = std::stoi(n_text);
  } catch (...) {
  }
  std::uint64_t offset = fnv1a64(user);
  std::string out;
  for (int i = 0; i < n; ++i) {
    out += std::to_string(i + 1) + ". " +
           bank[(offset + static_cast<std::uint64_t>(i)) % bank.size()] + "\n";
  }
  return out;
}

std::string mock_eval(const std::string& user) {
  const std::string property = slice_between(user, "PROPERTY: ", "\n");
  size_t after = user.find("PROPERTY: ");
  std::string payload = after == std::string::npos ? user : user.substr(after);
  return fnv1a64(property + "\x1f" + payload) % 2 == 0 ? "Yes" : "No";
}

std::string mock_nl2sql(const std::string& user) {
  const std::string schema_block = slice_between(user, "Schema: ", "\nQuestion: ");
  const std::string question = slice_between(user, "\nQuestion: ", "\nWrite a SQLite query");
  // First line of the block is the linearized schema:
  //   db | table : col, col | table : ...
  std::string schema_line = schema_block.substr(0, schema_block.find('\n'));
  std::string first_table;
  size_t bar = schema_line.find('|');
  if (bar != std::string::npos) {
    std::string rest = schema_line.substr(bar + 1);
    size_t colon = rest.find(':');
    if (colon != std::string::npos) first_table = trim(rest.substr(0, colon));
  }
  if (first_table.empty()) first_table = "t";
  std::string sql = byte_sum(question) % 2 == 0
                        ? "SELECT count(*) FROM " + first_table
                        : "SELECT 'mock'";
  return "```sql\n" + sql + "\n```";
}

std::string mock_rewrite(const std::string& user) {
  const std::string feature = slice_between(user, "Given the definition of ", ", I want to rewrite");
  const std::string question =
      slice_between(user, "The question I want to rewrite is ", "\n\nIt is trying");
  std::uint64_t h = fnv1a64(feature + "\x1f" + question);
  if (h % 7 == 0) return "INVALID";
  std::string rewritten;
  switch (h % 3) {
    case 0: rewritten = "In the database records, " + question; break;
    case 1: rewritten = question + " List the matching values explicitly."; break;
    default: rewritten = "Considering all stored rows, " + question; break;
  }
  return "```\n" + rewritten + "\n```";
}

class MockProvider final : public Provider {
 public:
  std::string name() const override { return "mock"; }

  ChatResponse send(const ChatRequest& req) override {
    ChatResponse out;
    out.meta = {{"provider", "mock"}};
    const std::string& user = req.user;
    if (starts_with(user, "Write an SQLite query")) {
      out.text = mock_nl2sql(user);
    } else if (starts_with(user, "You will be given")) {
      out.text = mock_eval(user);
    } else if (starts_with(user, "You are an expert SQL programmer and linguist.")) {
      out.text = mock_describe(user);
    } else if (contains(user, "I want to cluster these")) {
      out.text = mock_propose(user);
    } else if (starts_with(user, "Given the definition of")) {
      out.text = mock_rewrite(user);
    } else {
      out.text = "OK.";
    }
    return out;
  }
};

}  // namespace

std::unique_ptr<Provider> make_mock_provider() { return std::make_unique<MockProvider>(); }

}  // namespace sqlspace::llm

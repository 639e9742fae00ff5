#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "sqlspace/discovery.hpp"
#include "sqlspace/rng.hpp"

using namespace sqlspace;
using namespace sqlspace::discovery;

namespace {

Predicate make_pred(std::string id, std::string text, Aspect aspect = Aspect::sql_syntax) {
  Predicate p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.aspect = aspect;
  p.required_inputs = required_inputs_for(aspect);
  return p;
}

/// Reference token-set similarity built independently on a classic
/// Levenshtein-distance DP (the production path computes indel distance via
/// an LCS formulation instead).
int oracle_token_set_similarity(const std::string& a, const std::string& b) {
  auto tokens = [](const std::string& s) {
    std::set<std::string> out;
    for (const std::string& t : split_non_alnum(to_lower(s))) out.insert(t);
    return out;
  };
  auto join_tokens = [](const std::set<std::string>& ts) {
    std::string out;
    for (const auto& t : ts) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  };
  const std::set<std::string> ta = tokens(a), tb = tokens(b);
  std::set<std::string> inter, da, db;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::inserter(inter, inter.end()));
  std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(), std::inserter(da, da.end()));
  std::set_difference(tb.begin(), tb.end(), ta.begin(), ta.end(), std::inserter(db, db.end()));

  const std::string s_inter = join_tokens(inter);
  std::string s_a = s_inter, s_b = s_inter;
  const std::string rest_a = join_tokens(da), rest_b = join_tokens(db);
  if (!rest_a.empty()) s_a += s_a.empty() ? rest_a : " " + rest_a;
  if (!rest_b.empty()) s_b += s_b.empty() ? rest_b : " " + rest_b;

  // Indel distance = Levenshtein with substitutions forbidden.
  auto indel = [](const std::string& x, const std::string& y) {
    std::vector<size_t> prev(y.size() + 1), cur(y.size() + 1);
    for (size_t j = 0; j <= y.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= x.size(); ++i) {
      cur[0] = i;
      for (size_t j = 1; j <= y.size(); ++j) {
        if (x[i - 1] == y[j - 1]) {
          cur[j] = prev[j - 1];
        } else {
          cur[j] = 1 + std::min(prev[j], cur[j - 1]);
        }
      }
      std::swap(prev, cur);
    }
    return prev[y.size()];
  };
  auto ratio = [&](const std::string& x, const std::string& y) {
    const size_t total = x.size() + y.size();
    if (total == 0) return 100;
    const double sim = 1.0 - static_cast<double>(indel(x, y)) / static_cast<double>(total);
    return static_cast<int>(std::lround(sim * 100.0));
  };
  return std::max({ratio(s_inter, s_a), ratio(s_inter, s_b), ratio(s_a, s_b)});
}

}  // namespace

TEST_CASE("token-set similarity matches the hand-derived value for the join pair") {
  CHECK(token_set_similarity("contains a JOIN", "uses a JOIN") == 71);
}

TEST_CASE("token-set similarity agrees with an independent DP oracle") {
  const std::vector<std::string> texts = {
      "contains a JOIN",
      "uses a JOIN",
      "has a nested subquery",
      "contains subqueries",
      "employs a GROUP BY clause",
      "includes aggregate functions",
      "the question uses technical jargon",
      "jargon technical uses the question",
      "requires domain specific knowledge",
      "needs domain-specific knowledge!",
      "",
      "a",
  };
  for (const auto& a : texts) {
    for (const auto& b : texts) {
      CAPTURE(a);
      CAPTURE(b);
      CHECK(token_set_similarity(a, b) == oracle_token_set_similarity(a, b));
    }
  }
}

TEST_CASE("equal token sets score exactly 100 regardless of order and case") {
  CHECK(token_set_similarity("uses a JOIN", "a join USES") == 100);
  CHECK(token_set_similarity("same words here", "here same words") == 100);
  CHECK(token_set_similarity("x", "x") == 100);
}

TEST_CASE("similarity is symmetric and bounded") {
  Rng rng(9);
  const std::vector<std::string> words = {"select", "join", "group", "nested", "query",
                                          "where",  "limit", "order", "by",     "count"};
  for (int trial = 0; trial < 50; ++trial) {
    auto sample = [&] {
      std::string s;
      const size_t n = 1 + rng.below(6);
      for (size_t i = 0; i < n; ++i) {
        if (i != 0) s += ' ';
        s += words[rng.below(words.size())];
      }
      return s;
    };
    const std::string a = sample(), b = sample();
    const int ab = token_set_similarity(a, b);
    CHECK(ab == token_set_similarity(b, a));
    CHECK(ab >= 0);
    CHECK(ab <= 100);
  }
}

TEST_CASE("pairwise similarity parallel path equals the serial reference") {
  std::vector<std::string> texts;
  Rng rng(4);
  const std::vector<std::string> words = {"contains", "uses", "join", "subquery", "clause",
                                          "aggregate", "group", "nested", "a", "the"};
  for (int i = 0; i < 60; ++i) {
    std::string s;
    const size_t n = 2 + rng.below(7);
    for (size_t w = 0; w < n; ++w) {
      if (w != 0) s += ' ';
      s += words[rng.below(words.size())];
    }
    texts.push_back(s);
  }
  const Matrix serial = pairwise_similarity(texts, 1);
  const Matrix parallel = pairwise_similarity(texts, 4);
  CHECK(serial.data == parallel.data);
  for (size_t i = 0; i < texts.size(); ++i) CHECK(serial.at(i, i) == 100.0);
}

TEST_CASE("dedupe drops one of the near-duplicate join predicates at threshold 70") {
  const std::vector<Predicate> pool = {
      make_pred("p1", "contains a JOIN"),
      make_pred("p2", "uses a JOIN"),
      make_pred("p3", "has a nested subquery"),
  };
  DedupeResult result = dedupe(pool, 70);
  REQUIRE(result.kept.size() == 2);
  CHECK(result.kept[0].id == "p1");  // first wins
  CHECK(result.kept[1].id == "p3");
  REQUIRE(result.removed.size() == 1);
  CHECK(result.removed[0].loser == "p2");
  CHECK(result.removed[0].winner == "p1");
  CHECK(result.removed[0].score == 71);
}

TEST_CASE("dedupe is idempotent on its kept set") {
  std::vector<Predicate> pool;
  const std::vector<std::string> texts = {
      "contains a JOIN",        "uses a JOIN",          "includes a JOIN operation",
      "has a nested subquery",  "contains subqueries",  "employs a GROUP BY clause",
      "uses GROUP BY",          "has aggregate calls",  "includes aggregate functions",
      "filters with WHERE",
  };
  for (size_t i = 0; i < texts.size(); ++i) {
    pool.push_back(make_pred("p" + std::to_string(i), texts[i]));
  }
  const DedupeResult once = dedupe(pool, 70);
  const DedupeResult twice = dedupe(once.kept, 70);
  CHECK(twice.kept == once.kept);
  CHECK(twice.removed.empty());
}

TEST_CASE("dedupe only compares predicates of the same aspect") {
  const std::vector<Predicate> pool = {
      make_pred("sql-1", "contains a JOIN", Aspect::sql_syntax),
      make_pred("syn-1", "contains a JOIN", Aspect::syntax),
  };
  DedupeResult result = dedupe(pool, 70);
  CHECK(result.kept.size() == 2);
}

TEST_CASE("a higher threshold never removes more") {
  std::vector<Predicate> pool;
  const std::vector<std::string> texts = {
      "contains a JOIN",       "uses a JOIN",         "has a JOIN",
      "has a nested subquery", "contains subqueries", "nested subqueries appear",
      "employs GROUP BY",      "uses GROUP BY often", "aggregates with count",
  };
  for (size_t i = 0; i < texts.size(); ++i) {
    pool.push_back(make_pred("p" + std::to_string(i), texts[i]));
  }
  size_t prev_removed = pool.size();
  for (int threshold : {50, 60, 70, 80, 90, 101}) {
    const DedupeResult r = dedupe(pool, threshold);
    CHECK(r.removed.size() <= prev_removed);
    CHECK(r.kept.size() + r.removed.size() == pool.size());
    prev_removed = r.removed.size();
  }
  CHECK(dedupe(pool, 101).removed.empty());  // scores cap at 100
}

TEST_CASE("dedupe parallel scoring equals the serial reference") {
  std::vector<Predicate> pool;
  Rng rng(12);
  const std::vector<std::string> words = {"contains", "uses", "join", "subquery", "clause",
                                          "aggregate", "group", "by", "a", "nested"};
  for (int i = 0; i < 80; ++i) {
    std::string s;
    const size_t n = 2 + rng.below(5);
    for (size_t w = 0; w < n; ++w) {
      if (w != 0) s += ' ';
      s += words[rng.below(words.size())];
    }
    pool.push_back(make_pred("p" + std::to_string(i), s));
  }
  const DedupeResult serial = dedupe(pool, 70, 1);
  const DedupeResult parallel = dedupe(pool, 70, 4);
  CHECK(serial.kept == parallel.kept);
  CHECK(serial.removed.size() == parallel.removed.size());
}

TEST_CASE("numbered list parsing accepts common list shapes") {
  const std::string text =
      "1. contains a JOIN\n"
      "2) uses subqueries\n"
      "- filters rows\n"
      "3. \"wraps in quotes\"\n"
      "4. trailing period.\n"
      "not a list line\n"
      "\n"
      "5.missing space still parses\n";
  const std::vector<std::string> items = parse_numbered_list(text);
  REQUIRE(items.size() == 6);
  CHECK(items[0] == "contains a JOIN");
  CHECK(items[1] == "uses subqueries");
  CHECK(items[2] == "filters rows");
  CHECK(items[3] == "wraps in quotes");
  CHECK(items[4] == "trailing period");
  CHECK(items[5] == "missing space still parses");
}

TEST_CASE("manual removals drop listed ids and reject unknown ones") {
  const std::vector<Predicate> pool = {make_pred("p1", "a"), make_pred("p2", "b"),
                                       make_pred("p3", "c")};
  const std::vector<Predicate> left = apply_manual_removals(pool, {"p2"});
  REQUIRE(left.size() == 2);
  CHECK(left[0].id == "p1");
  CHECK(left[1].id == "p3");
  CHECK_THROWS_WITH_AS(apply_manual_removals(pool, {"p9"}), doctest::Contains("p9"), Error);
}

TEST_CASE("predicate files round-trip through save and load") {
  std::vector<Predicate> pool = {make_pred("sql-001", "contains a JOIN"),
                                 make_pred("syn-001", "uses passive voice", Aspect::syntax)};
  pool[1].polarity = "helpful";
  pool[1].origin = "shipped";
  const std::string path =
      (std::filesystem::temp_directory_path() / "preds_rt.jsonl").string();
  save_predicates(path, pool);
  CHECK(load_predicates(path) == pool);
}

TEST_CASE("review rendering lists removed pairs and kept predicates") {
  const std::vector<Predicate> pool = {make_pred("p1", "contains a JOIN"),
                                       make_pred("p2", "uses a JOIN")};
  const DedupeResult result = dedupe(pool, 70);
  const std::string review = render_review(result, 70);
  CHECK(review.find("p1") != std::string::npos);
  CHECK(review.find("p2") != std::string::npos);
  CHECK(review.find("71") != std::string::npos);
}

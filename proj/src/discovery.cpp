#include "sqlspace/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sqlspace/prompts.hpp"
#include "sqlspace/rng.hpp"

namespace sqlspace::discovery {

const char* aspect_prefix(Aspect a) {
  switch (a) {
    case Aspect::syntax: return "syn";
    case Aspect::sql_syntax: return "sql";
    case Aspect::semantics: return "sem";
    case Aspect::pragmatics: return "prag";
    case Aspect::db_reasoning: return "db";
    case Aspect::general: return "gen";
  }
  return "?";
}

std::vector<Predicate> load_predicates(const std::string& path) {
  std::vector<Predicate> preds;
  std::set<std::string> ids;
  size_t lineno = 0;
  for (const json& row : read_jsonl(path)) {
    ++lineno;
    Predicate p;
    p.id = row.at("id").get<std::string>();
    p.text = row.at("text").get<std::string>();
    p.aspect = parse_aspect(row.at("aspect").get<std::string>());
    p.required_inputs = row.at("required_inputs").get<std::vector<std::string>>();
    p.polarity = row.value("polarity", "harmful");
    p.origin = row.value("origin", "shipped");
    if (p.text.empty()) fail("empty predicate text at ", path, " entry ", lineno);
    if (p.polarity != "harmful" && p.polarity != "helpful") {
      fail("predicate ", p.id, " has invalid polarity '", p.polarity, "'");
    }
    if (!ids.insert(p.id).second) fail("duplicate predicate id '", p.id, "' in ", path);
    preds.push_back(std::move(p));
  }
  if (preds.empty()) fail("predicate file ", path, " is empty");
  return preds;
}

void save_predicates(const std::string& path, const std::vector<Predicate>& preds) {
  std::vector<json> rows;
  rows.reserve(preds.size());
  for (const Predicate& p : preds) {
    rows.push_back({{"id", p.id},
                    {"text", p.text},
                    {"aspect", aspect_name(p.aspect)},
                    {"required_inputs", p.required_inputs},
                    {"polarity", p.polarity},
                    {"origin", p.origin}});
  }
  write_jsonl_atomic(path, rows);
}

std::string describe(llm::Gateway& gw, const corpus::Example& ex, const std::string& lin_schema,
                     Aspect aspect, const std::string& model, double temperature) {
  llm::ChatRequest req;
  req.model = model;
  req.temperature = temperature;
  req.user = prompts::render_template(
      prompts::describe_template_for(aspect),
      {{"schema", lin_schema}, {"question", ex.question}, {"gold_sql", ex.gold_sql}});
  return gw.complete(req).text;
}

std::vector<std::string> parse_numbered_list(const std::string& text) {
  std::vector<std::string> items;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = trim(text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                      : eol - pos));
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    if (line.empty()) continue;

    size_t i = 0;
    bool marked = false;
    if (line[0] == '-' || line[0] == '*') {
      i = 1;
      marked = true;
    } else {
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
        ++i;
        marked = true;
      }
    }
    if (!marked) continue;
    std::string item = trim(line.substr(i));
    if (item.size() >= 2 && ((item.front() == '"' && item.back() == '"') ||
                             (item.front() == '\'' && item.back() == '\''))) {
      item = item.substr(1, item.size() - 2);
    }
    if (!item.empty() && item.back() == '.') item.pop_back();
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<std::string> propose_predicates(llm::Gateway& gw,
                                            const std::vector<std::string>& docs,
                                            const std::string& goal,
                                            const std::vector<std::string>& model_ids,
                                            const ProposeOptions& opts) {
  if (docs.empty()) fail("propose_predicates: empty document collection");
  if (model_ids.empty()) fail("propose_predicates: no proposer models");

  std::vector<std::string> pool;
  for (int iter = 0; iter < opts.j; ++iter) {
    // One sampled subset per iteration, shared across proposer models.
    std::vector<size_t> idx;
    if (docs.size() <= static_cast<size_t>(opts.sample_size)) {
      idx.resize(docs.size());
      for (size_t i = 0; i < docs.size(); ++i) idx[i] = i;
    } else {
      Rng rng(derive_seed(opts.seed, 0x5e7, static_cast<std::uint64_t>(iter)));
      idx = rng.sample_indices(docs.size(), static_cast<size_t>(opts.sample_size));
    }
    std::vector<std::string> blocks;
    blocks.reserve(idx.size());
    for (size_t i : idx) blocks.push_back(docs[i]);

    std::string samples = join(blocks, "\n\n");
    std::string prompt = prompts::render_template(
        prompts::TemplateId::propose,
        {{"goal", goal}, {"samples", samples}, {"n", std::to_string(opts.n)}});

    for (const std::string& model : model_ids) {
      llm::ChatRequest req;
      req.model = model;
      req.temperature = opts.temperature;
      req.user = prompt;
      std::vector<std::string> items = parse_numbered_list(gw.complete(req).text);
      if (items.empty()) {
        log_warn(concat("proposer ", model, " returned no parseable predicates (iteration ",
                        iter + 1, ")"));
      }
      pool.insert(pool.end(), items.begin(), items.end());
    }
  }
  if (pool.empty()) fail("predicate proposal produced an empty pool");
  return pool;
}

// ── token-set similarity ────────────────────────────────────────────────────

namespace {

/// Indel distance (insertions+deletions only) via LCS.
int indel_distance(const std::string& x, const std::string& y) {
  const size_t n = x.size(), m = y.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = 0;
    for (size_t j = 1; j <= m; ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  int lcs = prev[m];
  return static_cast<int>(n + m) - 2 * lcs;
}

/// round(100 * (|x|+|y|-D) / (|x|+|y|)); 100 when both strings are empty.
int indel_ratio(const std::string& x, const std::string& y) {
  double lensum = static_cast<double>(x.size() + y.size());
  if (lensum == 0.0) return 100;
  double d = indel_distance(x, y);
  return static_cast<int>(std::lround(100.0 * (lensum - d) / lensum));
}

}  // namespace

int token_set_similarity(const std::string& a, const std::string& b) {
  std::vector<std::string> ta = split_non_alnum(to_lower(a));
  std::vector<std::string> tb = split_non_alnum(to_lower(b));
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());

  std::vector<std::string> sect, only_a, only_b;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(sect));
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(only_a));
  std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(only_b));

  std::string t0 = join(sect, " ");
  std::string t1 = trim(t0 + " " + join(only_a, " "));
  std::string t2 = trim(t0 + " " + join(only_b, " "));

  if (sa == sb) return 100;
  return std::max({indel_ratio(t0, t1), indel_ratio(t0, t2), indel_ratio(t1, t2)});
}

Matrix pairwise_similarity(const std::vector<std::string>& texts, int threads) {
  const size_t n = texts.size();
  Matrix out(n, n, 0.0);
  // Flatten the upper triangle so OpenMP gets one flat, balanced loop.
  std::vector<std::pair<size_t, size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (size_t i = 0; i < n; ++i) {
    out.at(i, i) = 100.0;
    for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  const std::int64_t npairs = static_cast<std::int64_t>(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) num_threads(std::max(threads, 1)) if (threads != 1)
#endif
  for (std::int64_t p = 0; p < npairs; ++p) {
    auto [i, j] = pairs[static_cast<size_t>(p)];
    double s = token_set_similarity(texts[i], texts[j]);
    out.at(i, j) = s;
    out.at(j, i) = s;
  }
  return out;
}

DedupeResult dedupe(const std::vector<Predicate>& pool, int threshold, int threads) {
  // Partition by aspect, preserving input order within each group.
  std::map<Aspect, std::vector<size_t>> groups;
  for (size_t i = 0; i < pool.size(); ++i) groups[pool[i].aspect].push_back(i);

  std::vector<bool> keep(pool.size(), false);
  DedupeResult result;

  for (const auto& [aspect, members] : groups) {
    std::vector<std::string> texts;
    texts.reserve(members.size());
    for (size_t idx : members) texts.push_back(pool[idx].text);
    Matrix sim = pairwise_similarity(texts, threads);

    std::vector<size_t> kept_local;  // positions within `members`
    for (size_t c = 0; c < members.size(); ++c) {
      int best_score = -1;
      size_t best_winner = 0;
      for (size_t k : kept_local) {
        int s = static_cast<int>(sim.at(c, k));
        if (s > best_score) {
          best_score = s;
          best_winner = k;
        }
      }
      if (best_score >= threshold) {
        result.removed.push_back(
            {pool[members[c]].text, pool[members[best_winner]].text, best_score});
      } else {
        kept_local.push_back(c);
        keep[members[c]] = true;
      }
    }
  }

  for (size_t i = 0; i < pool.size(); ++i) {
    if (keep[i]) result.kept.push_back(pool[i]);
  }
  return result;
}

std::string render_review(const DedupeResult& result, int threshold) {
  std::ostringstream oss;
  oss << "# Predicate dedupe review\n";
  oss << "# threshold: " << threshold << "\n";
  oss << "# kept: " << result.kept.size() << "  removed: " << result.removed.size() << "\n";
  oss << "\n## Removed (loser | winner | score)\n";
  for (const RemovedRecord& r : result.removed) {
    oss << r.loser << " | " << r.winner << " | " << r.score << "\n";
  }
  oss << "\n## Kept (id | aspect | text)\n";
  oss << "# Delete lines here and pass their ids as manual removals to drop predicates.\n";
  for (const Predicate& p : result.kept) {
    oss << p.id << " | " << aspect_name(p.aspect) << " | " << p.text << "\n";
  }
  return oss.str();
}

std::vector<Predicate> apply_manual_removals(const std::vector<Predicate>& preds,
                                             const std::vector<std::string>& removal_ids) {
  std::set<std::string> ids(removal_ids.begin(), removal_ids.end());
  std::set<std::string> known;
  for (const Predicate& p : preds) known.insert(p.id);
  for (const std::string& id : ids) {
    if (!known.count(id)) fail("manual removal refers to unknown predicate id '", id, "'");
  }
  std::vector<Predicate> out;
  for (const Predicate& p : preds) {
    if (!ids.count(p.id)) out.push_back(p);
  }
  return out;
}

}  // namespace sqlspace::discovery

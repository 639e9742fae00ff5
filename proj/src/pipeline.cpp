#include "sqlspace/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>

#include "sqlspace/aspects.hpp"
#include "sqlspace/cluster_importance.hpp"
#include "sqlspace/common.hpp"
#include "sqlspace/corpus.hpp"
#include "sqlspace/discovery.hpp"
#include "sqlspace/estimator.hpp"
#include "sqlspace/featurizer.hpp"
#include "sqlspace/forest.hpp"
#include "sqlspace/gateway.hpp"
#include "sqlspace/kmeans.hpp"
#include "sqlspace/parallel.hpp"
#include "sqlspace/pca.hpp"
#include "sqlspace/prompts.hpp"
#include "sqlspace/rewriter.hpp"
#include "sqlspace/rng.hpp"
#include "sqlspace/sha256.hpp"
#include "sqlspace/sql_eval.hpp"
#include "sqlspace/stats.hpp"

namespace sqlspace::pipeline {

namespace {

// Which stage produces which artifact, for dependency error messages.
const std::map<std::string, std::string> kProducers = {
    {"corpus.jsonl", "ingest"},
    {"descriptions.jsonl", "describe"},
    {"proposals.jsonl", "propose"},
    {"predicates.discovered.jsonl", "propose"},
    {"predicates.deduped.jsonl", "dedupe"},
    {"dedupe.removed.jsonl", "dedupe"},
    {"review.txt", "dedupe"},
    {"features.jsonl", "featurize"},
    {"features.header.json", "featurize"},
    {"clusters.json", "cluster"},
    {"projection.csv", "cluster"},
    {"proportions.csv", "compare"},
    {"chisq.csv", "compare"},
    {"predictions.jsonl", "infer"},
    {"ex.json", "evaluate"},
    {"estimator.json", "train-estimator"},
    {"estimator.metrics.json", "train-estimator"},
    {"calibration.csv", "train-estimator"},
    {"importance.estimator.json", "importance"},
    {"importance.cluster.json", "importance"},
    {"rewrites.jsonl", "rewrite"},
    {"accatk.json", "rewrite"},
    {"breakdown.csv", "rewrite"},
    {"report.md", "report"},
};

struct DbInfo {
  corpus::Schema schema;
  std::string linearized;
  std::string path;
};

struct RunContext {
  const RunConfig& cfg;
  std::unique_ptr<llm::Gateway> gateway;
  std::map<std::string, DbInfo> dbs;

  explicit RunContext(const RunConfig& c) : cfg(c) { ensure_dir(c.run_dir); }

  std::string path(const std::string& artifact) const { return cfg.run_dir + "/" + artifact; }

  void require(const std::string& artifact) const {
    if (file_exists(path(artifact))) return;
    auto it = kProducers.find(artifact);
    const std::string producer = it == kProducers.end() ? "?" : it->second;
    fail("missing artifact '", artifact, "' (produced by stage '", producer,
         "'); run that stage first");
  }

  llm::Gateway& gw() {
    if (!gateway) {
      std::unique_ptr<llm::Provider> provider;
      if (cfg.provider.endpoint == "mock") {
        provider = llm::make_mock_provider();
      } else {
        const char* key = std::getenv(cfg.provider.api_key_env.c_str());
        provider = llm::make_http_provider(cfg.provider.endpoint, key == nullptr ? "" : key,
                                           cfg.provider.timeout_sec);
      }
      llm::GatewayOptions opts;
      opts.mode = llm::parse_mode(cfg.mode);
      opts.cache_dir = cfg.resolved_cache_dir();
      opts.max_retries = cfg.provider.max_retries;
      opts.retry_base_ms = cfg.provider.retry_base_ms;
      opts.max_in_flight = cfg.provider.max_in_flight;
      gateway = std::make_unique<llm::Gateway>(std::move(provider), std::move(opts));
    }
    return *gateway;
  }

  const DbInfo& db(const std::string& db_id) {
    auto it = dbs.find(db_id);
    if (it != dbs.end()) return it->second;
    DbInfo info;
    info.path = corpus::db_path_for(cfg.corpus.db_root, db_id);
    info.schema = corpus::schema_from_sqlite(info.path);
    info.linearized = corpus::linearize_schema(info.schema);
    return dbs.emplace(db_id, std::move(info)).first->second;
  }
};

void update_manifest(RunContext& ctx, const std::string& stage,
                     const std::vector<std::string>& artifacts) {
  json manifest;
  const std::string manifest_path = ctx.path("manifest.json");
  if (file_exists(manifest_path)) {
    manifest = json::parse(read_file(manifest_path));
  }
  manifest["config_hash"] = config_hash(ctx.cfg);
  manifest["seed"] = ctx.cfg.seed_or_zero();
  json entry;
  for (const std::string& a : artifacts) {
    entry[a] = sha256_hex(read_file(ctx.path(a)));
  }
  manifest["stages"][stage]["artifacts"] = std::move(entry);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

corpus::Dataset load_run_corpus(RunContext& ctx) {
  ctx.require("corpus.jsonl");
  return corpus::load_dataset(ctx.path("corpus.jsonl"), corpus::SourceFormat::jsonl,
                              ctx.cfg.corpus.dataset_name);
}

// Schema block for NL2SQL: the linearized schema followed by example rows
// from every table.
std::string schema_with_rows(RunContext& ctx, const corpus::Example& ex) {
  const DbInfo& info = ctx.db(ex.db_id);
  std::string out = info.linearized;
  const int k = ctx.cfg.eval.rows_per_table;
  for (const corpus::Table& table : info.schema.tables) {
    out += concat("\n", table.name, " (", join(table.columns, ", "), "):\n",
                  corpus::render_rows_tsv(corpus::sample_rows(info.path, table.name, k)));
  }
  return out;
}

// Resolves which predicate file featurize-family stages use.
std::vector<discovery::Predicate> resolve_predicates(RunContext& ctx) {
  std::vector<discovery::Predicate> preds;
  if (ctx.cfg.featurize.predicates == "discovered") {
    ctx.require("predicates.deduped.jsonl");
    preds = discovery::load_predicates(ctx.path("predicates.deduped.jsonl"));
  } else {
    preds = discovery::load_predicates(ctx.cfg.predicates_path);
  }
  if (!ctx.cfg.featurize.aspects.empty()) {
    std::set<Aspect> wanted;
    for (const std::string& a : ctx.cfg.featurize.aspects) wanted.insert(parse_aspect(a));
    std::vector<discovery::Predicate> filtered;
    for (auto& p : preds) {
      if (wanted.count(p.aspect) != 0) filtered.push_back(std::move(p));
    }
    preds = std::move(filtered);
  }
  if (ctx.cfg.featurize.online_only) preds = featurizer::online_predicates(preds);
  if (preds.empty()) fail("predicate selection left no predicates to evaluate");
  return preds;
}

featurizer::FeatureMatrix load_features_checked(RunContext& ctx,
                                                const std::vector<discovery::Predicate>& preds) {
  ctx.require("features.jsonl");
  ctx.require("features.header.json");
  featurizer::FeatureMatrix fm =
      featurizer::load_features(ctx.path("features.jsonl"), ctx.path("features.header.json"));
  const std::string expected = featurizer::predicate_set_hash(preds);
  if (fm.predicate_set_id != expected) {
    fail("features.header.json predicate_set_id ", fm.predicate_set_id,
         " does not match the configured predicate file (", expected,
         "); re-run the featurize stage");
  }
  return fm;
}

std::map<std::string, sqleval::Prediction> load_predictions(RunContext& ctx,
                                                            bool need_correct) {
  ctx.require("predictions.jsonl");
  std::map<std::string, sqleval::Prediction> out;
  for (const json& row : read_jsonl(ctx.path("predictions.jsonl"))) {
    sqleval::Prediction p;
    p.example_id = row.at("example_id").get<std::string>();
    p.model_id = row.at("model_id").get<std::string>();
    p.raw_response = row.at("raw_response").get<std::string>();
    p.extracted_sql = row.at("extracted_sql").get<std::string>();
    if (row.contains("exec_status")) {
      p.exec_status = sqleval::parse_exec_status(row.at("exec_status").get<std::string>());
    }
    if (row.contains("correct")) p.correct = row.at("correct").get<int>();
    if (need_correct && !p.correct.has_value()) {
      fail("prediction for '", p.example_id,
           "' has no correctness verdict; run the 'evaluate' stage first");
    }
    out[p.example_id] = std::move(p);
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

// ── stages ──────────────────────────────────────────────────────────────────

void stage_ingest(RunContext& ctx) {
  const corpus::SourceFormat fmt = corpus::parse_format(ctx.cfg.corpus.format);
  corpus::Dataset ds =
      corpus::load_dataset(ctx.cfg.corpus.path, fmt, ctx.cfg.corpus.dataset_name);
  corpus::check_unique_ids(ds);

  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& ex : ds.examples) {
    if (!seen.insert(ex.db_id).second) continue;
    const std::string db_path = corpus::db_path_for(ctx.cfg.corpus.db_root, ex.db_id);
    if (!file_exists(db_path)) missing.push_back(concat(ex.db_id, " (", db_path, ")"));
  }
  if (!missing.empty()) fail("missing database files: ", join(missing, ", "));

  corpus::save_dataset_jsonl(ds, ctx.path("corpus.jsonl"));
  log_info("ingest: ", ds.examples.size(), " examples across ", seen.size(), " databases");
  update_manifest(ctx, "ingest", {"corpus.jsonl"});
}

void stage_describe(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  std::vector<json> rows;

  if (ctx.cfg.ablation == "direct-proposal") {
    // No description pass: the proposer later consumes the raw examples.
    log_info("describe: direct-proposal ablation — emitting raw examples as documents");
    for (const auto& ex : ds.examples) {
      rows.push_back(json{{"aspect", "general"},
                          {"example_id", ex.id},
                          {"text", concat("Question: ", ex.question, "\nSQL: ", ex.gold_sql)}});
    }
  } else {
    std::vector<Aspect> aspects = all_aspects();
    if (ctx.cfg.ablation == "aspect-agnostic") aspects = {Aspect::general};

    rows.resize(aspects.size() * ds.examples.size());
    llm::Gateway& gw = ctx.gw();
    // Warm the schema cache serially; ctx.db() is not synchronized.
    for (const auto& ex : ds.examples) ctx.db(ex.db_id);
    parallel_for_indexed(rows.size(), ctx.cfg.threads, [&](size_t idx) {
      const size_t a = idx / ds.examples.size();
      const size_t e = idx % ds.examples.size();
      const corpus::Example& ex = ds.examples[e];
      const std::string text =
          discovery::describe(gw, ex, ctx.db(ex.db_id).linearized, aspects[a],
                              ctx.cfg.models.describer);
      rows[idx] = json{{"aspect", aspect_name(aspects[a])}, {"example_id", ex.id}, {"text", text}};
    });
  }

  write_jsonl_atomic(ctx.path("descriptions.jsonl"), rows);
  log_info("describe: wrote ", rows.size(), " descriptions");
  update_manifest(ctx, "describe", {"descriptions.jsonl"});
}

void stage_propose(RunContext& ctx) {
  ctx.require("descriptions.jsonl");
  std::map<Aspect, std::vector<std::string>> docs_by_aspect;
  std::vector<Aspect> aspect_order;  // first-seen order of aspects in the file
  for (const json& row : read_jsonl(ctx.path("descriptions.jsonl"))) {
    const Aspect a = parse_aspect(row.at("aspect").get<std::string>());
    if (docs_by_aspect.find(a) == docs_by_aspect.end()) aspect_order.push_back(a);
    docs_by_aspect[a].push_back(row.at("text").get<std::string>());
  }
  if (docs_by_aspect.empty()) fail("descriptions.jsonl is empty; nothing to propose from");

  std::vector<json> proposal_rows;
  std::vector<discovery::Predicate> discovered;
  llm::Gateway& gw = ctx.gw();
  for (size_t ai = 0; ai < aspect_order.size(); ++ai) {
    const Aspect aspect = aspect_order[ai];
    const std::string& goal =
        aspect == Aspect::general
            ? (ctx.cfg.ablation == "direct-proposal" ? prompts::goal_control_examples()
                                                     : prompts::goal_control_descriptions())
            : prompts::goal_for(aspect);

    discovery::ProposeOptions opts;
    opts.n = ctx.cfg.discovery.n;
    opts.j = ctx.cfg.discovery.j;
    opts.sample_size = ctx.cfg.discovery.sample_size;
    opts.seed = derive_seed(ctx.cfg.seed_or_zero(), 0x9c0, static_cast<std::uint64_t>(ai));

    const std::vector<std::string> pool = discovery::propose_predicates(
        gw, docs_by_aspect[aspect], goal, ctx.cfg.models.proposers, opts);

    int counter = 0;
    for (const std::string& text : pool) {
      proposal_rows.push_back(json{{"aspect", aspect_name(aspect)}, {"text", text}});
      discovery::Predicate p;
      p.id = concat(discovery::aspect_prefix(aspect), "-p",
                    counter < 100 ? (counter < 10 ? "00" : "0") : "", counter);
      ++counter;
      p.text = text;
      p.aspect = aspect;
      p.required_inputs = required_inputs_for(aspect);
      p.polarity = "harmful";
      p.origin = "proposed";
      discovered.push_back(std::move(p));
    }
  }

  write_jsonl_atomic(ctx.path("proposals.jsonl"), proposal_rows);
  discovery::save_predicates(ctx.path("predicates.discovered.jsonl"), discovered);
  log_info("propose: ", discovered.size(), " candidate predicates across ", aspect_order.size(),
           " aspects");
  update_manifest(ctx, "propose", {"proposals.jsonl", "predicates.discovered.jsonl"});
}

void stage_dedupe(RunContext& ctx) {
  ctx.require("predicates.discovered.jsonl");
  const std::vector<discovery::Predicate> pool =
      discovery::load_predicates(ctx.path("predicates.discovered.jsonl"));

  discovery::DedupeResult result;
  if (ctx.cfg.ablation == "no-dedupe") {
    log_info("dedupe: no-dedupe ablation — keeping all ", pool.size(), " predicates");
    result.kept = pool;
  } else {
    result = discovery::dedupe(pool, ctx.cfg.discovery.threshold, ctx.cfg.threads);
  }

  if (!ctx.cfg.discovery.manual_removals.empty()) {
    std::vector<std::string> ids;
    for (const std::string& raw : split_lines(read_file(ctx.cfg.discovery.manual_removals))) {
      const std::string id = trim(raw);
      if (!id.empty() && id[0] != '#') ids.push_back(id);
    }
    result.kept = discovery::apply_manual_removals(result.kept, ids);
    log_info("dedupe: applied ", ids.size(), " manual removals");
  }

  discovery::save_predicates(ctx.path("predicates.deduped.jsonl"), result.kept);
  std::vector<json> removed_rows;
  for (const auto& r : result.removed) {
    removed_rows.push_back(json{{"loser", r.loser}, {"winner", r.winner}, {"score", r.score}});
  }
  write_jsonl_atomic(ctx.path("dedupe.removed.jsonl"), removed_rows);
  write_file_atomic(ctx.path("review.txt"),
                    discovery::render_review(result, ctx.cfg.discovery.threshold));
  log_info("dedupe: kept ", result.kept.size(), ", removed ", result.removed.size());
  update_manifest(ctx, "dedupe",
                  {"predicates.deduped.jsonl", "dedupe.removed.jsonl", "review.txt"});
}

void stage_featurize(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);

  std::vector<std::string> schemas;
  for (const auto& ex : ds.examples) schemas.push_back(ctx.db(ex.db_id).linearized);

  const featurizer::FeatureMatrix fm = featurizer::featurize_corpus(
      ctx.gw(), ds, schemas, preds, ctx.cfg.models.evaluator, ctx.cfg.threads);
  featurizer::save_features(ctx.path("features.jsonl"), ctx.path("features.header.json"), fm);
  log_info("featurize: ", fm.vectors.size(), " examples x ", preds.size(), " predicates");
  update_manifest(ctx, "featurize", {"features.jsonl", "features.header.json"});
}

void stage_cluster(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  const Matrix X = fm.to_matrix();

  // Fit on the source datasets; the target dataset is assigned by inference.
  std::vector<size_t> fit_rows;
  for (size_t i = 0; i < fm.vectors.size(); ++i) {
    if (ctx.cfg.corpus.target_dataset.empty() ||
        ds.examples[i].dataset != ctx.cfg.corpus.target_dataset) {
      fit_rows.push_back(i);
    }
  }
  if (fit_rows.empty()) fail("cluster: no rows left to fit after excluding the target dataset");
  const Matrix Xfit = X.select_rows(fit_rows);

  analytics::KMeansOptions opts;
  opts.seed = derive_seed(ctx.cfg.seed_or_zero(), 0xc105);
  opts.threads = ctx.cfg.threads;

  json elbow_json;
  int k = ctx.cfg.cluster.k;
  if (k == 0) {
    const int k_max = std::min<int>(ctx.cfg.cluster.k_max, static_cast<int>(Xfit.rows));
    const analytics::ElbowResult elbow =
        analytics::elbow_select_k(Xfit, ctx.cfg.cluster.k_min, k_max, opts);
    k = elbow.k;
    elbow_json = json{{"ks", elbow.ks}, {"inertias", elbow.inertias}};
    log_info("cluster: elbow selected k=", k);
  }
  opts.k = k;

  const analytics::KMeansModel model = analytics::kmeans_fit(Xfit, opts);
  const std::vector<int> labels = analytics::kmeans_assign(model.centroids, X, ctx.cfg.threads);

  json cj = analytics::kmeans_to_json(model);
  cj["predicate_set_id"] = fm.predicate_set_id;
  cj.erase("labels");  // fit-row labels are superseded by the full assignment below
  json assignments = json::array();
  for (size_t i = 0; i < fm.vectors.size(); ++i) {
    assignments.push_back(json{{"cluster", labels[i]},
                               {"dataset", ds.examples[i].dataset},
                               {"example_id", fm.vectors[i].example_id}});
  }
  cj["assignments"] = std::move(assignments);
  if (!elbow_json.is_null()) cj["elbow"] = std::move(elbow_json);
  write_file_atomic(ctx.path("clusters.json"), cj.dump(2) + "\n");

  // 2D projection for external plotting.
  const analytics::PcaModel pca = analytics::pca_fit(X, 2);
  const Matrix coords = analytics::pca_transform(pca, X);
  std::string csv = "example_id,dataset,cluster,x,y\n";
  for (size_t i = 0; i < X.rows; ++i) {
    csv += concat(csv_escape(fm.vectors[i].example_id), ",",
                  csv_escape(ds.examples[i].dataset), ",", labels[i], ",",
                  format_double(coords.at(i, 0)), ",", format_double(coords.at(i, 1)), "\n");
  }
  write_file_atomic(ctx.path("projection.csv"), csv);
  log_info("cluster: k=", k, ", inertia=", format_double(model.inertia));
  update_manifest(ctx, "cluster", {"clusters.json", "projection.csv"});
}

void stage_compare(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  const Matrix X = fm.to_matrix();

  std::vector<std::string> dataset_of;
  for (const auto& ex : ds.examples) dataset_of.push_back(ex.dataset);
  const analytics::ProportionTable table = analytics::feature_proportions(X, dataset_of);
  if (table.datasets.size() < 2) {
    fail("compare: needs at least two datasets, corpus has ", table.datasets.size());
  }

  std::string props = "predicate_id";
  for (const auto& d : table.datasets) props += "," + csv_escape(d);
  props += "\n";
  for (size_t f = 0; f < preds.size(); ++f) {
    props += csv_escape(preds[f].id);
    for (const auto& d : table.datasets) props += "," + format_double(table.props.at(d)[f]);
    props += "\n";
  }
  write_file_atomic(ctx.path("proportions.csv"), props);

  // Exact contingency counts straight from the bit matrix.
  std::map<std::string, std::vector<std::int64_t>> present_counts;
  for (const auto& d : table.datasets) present_counts[d].assign(X.cols, 0);
  for (size_t r = 0; r < X.rows; ++r) {
    std::vector<std::int64_t>& row_counts = present_counts[dataset_of[r]];
    for (size_t f = 0; f < X.cols; ++f) row_counts[f] += X.at(r, f) != 0.0 ? 1 : 0;
  }

  std::string chisq = "predicate_id,statistic,df,p,significant\n";
  size_t skipped = 0;
  for (size_t f = 0; f < preds.size(); ++f) {
    std::vector<std::array<std::int64_t, 2>> counts;
    std::int64_t col_present = 0, col_absent = 0;
    for (const auto& d : table.datasets) {
      const auto n = static_cast<std::int64_t>(table.counts.at(d));
      const std::int64_t present = present_counts[d][f];
      counts.push_back({present, n - present});
      col_present += present;
      col_absent += n - present;
    }
    if (col_present == 0 || col_absent == 0) {
      ++skipped;
      chisq += concat(csv_escape(preds[f].id), ",NA,NA,NA,skipped\n");
      continue;
    }
    const analytics::ChiSquareResult r = analytics::chi_square_table(counts, ctx.cfg.alpha);
    chisq += concat(csv_escape(preds[f].id), ",", format_double(r.statistic), ",", r.df, ",",
                    format_double(r.p_value), ",", r.significant ? "yes" : "no", "\n");
  }
  if (skipped > 0) {
    log_warn("compare: ", skipped,
             " predicate(s) had a zero column marginal and were skipped");
  }
  write_file_atomic(ctx.path("chisq.csv"), chisq);
  log_info("compare: ", table.datasets.size(), " datasets, ", preds.size(), " predicates");
  update_manifest(ctx, "compare", {"proportions.csv", "chisq.csv"});
}

void stage_infer(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  llm::Gateway& gw = ctx.gw();
  for (const auto& ex : ds.examples) ctx.db(ex.db_id);  // warm the cache serially

  std::vector<json> rows(ds.examples.size());
  std::atomic<int> unfenced{0};
  parallel_for_indexed(ds.examples.size(), ctx.cfg.threads, [&](size_t i) {
    const corpus::Example& ex = ds.examples[i];
    llm::ChatRequest req;
    req.model = ctx.cfg.models.subject;
    req.user = prompts::render_template(
        prompts::TemplateId::nl2sql,
        {{"schema", schema_with_rows(ctx, ex)}, {"question", ex.question}});
    req.temperature = 0.1;
    const std::string raw = gw.complete(req).text;
    const sqleval::ExtractedSql extracted = sqleval::extract_sql(raw);
    if (!extracted.fenced) ++unfenced;
    rows[i] = json{{"example_id", ex.id},
                   {"extracted_sql", extracted.sql},
                   {"model_id", ctx.cfg.models.subject},
                   {"raw_response", raw}};
  });
  if (unfenced.load() > 0) {
    log_warn("infer: ", unfenced.load(), " response(s) had no code fence; used whole response");
  }
  write_jsonl_atomic(ctx.path("predictions.jsonl"), rows);
  log_info("infer: ", rows.size(), " predictions from ", ctx.cfg.models.subject);
  update_manifest(ctx, "infer", {"predictions.jsonl"});
}

void stage_evaluate(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  std::map<std::string, sqleval::Prediction> preds = load_predictions(ctx, false);
  for (const auto& ex : ds.examples) ctx.db(ex.db_id);

  std::vector<sqleval::Prediction> ordered(ds.examples.size());
  parallel_for_indexed(ds.examples.size(), ctx.cfg.threads, [&](size_t i) {
    const corpus::Example& ex = ds.examples[i];
    auto it = preds.find(ex.id);
    if (it == preds.end()) {
      fail("no prediction for example '", ex.id, "'; run the 'infer' stage first");
    }
    sqleval::Prediction p = it->second;
    const sqleval::Adjudication adj =
        sqleval::adjudicate(ctx.db(ex.db_id).path, p.extracted_sql, ex.gold_sql,
                            ctx.cfg.eval.timeout_ms);
    p.exec_status = adj.pred_status;
    p.correct = adj.correct;
    ordered[i] = std::move(p);
  });

  std::vector<json> rows;
  for (const auto& p : ordered) rows.push_back(sqleval::prediction_to_json(p));
  write_jsonl_atomic(ctx.path("predictions.jsonl"), rows);

  const double overall = sqleval::ex_accuracy(ordered, ds);
  json per_dataset;
  std::map<std::string, corpus::Dataset> by_ds;
  std::map<std::string, std::vector<sqleval::Prediction>> preds_by_ds;
  for (size_t i = 0; i < ds.examples.size(); ++i) {
    by_ds[ds.examples[i].dataset].examples.push_back(ds.examples[i]);
    preds_by_ds[ds.examples[i].dataset].push_back(ordered[i]);
  }
  for (const auto& [name, sub] : by_ds) {
    per_dataset[name] = json{{"n", sub.examples.size()},
                             {"ex", sqleval::ex_accuracy(preds_by_ds[name], sub)}};
  }
  json exj;
  exj["model_id"] = ctx.cfg.models.subject;
  exj["n"] = ds.examples.size();
  exj["ex"] = overall;
  exj["per_dataset"] = std::move(per_dataset);
  write_file_atomic(ctx.path("ex.json"), exj.dump(2) + "\n");
  log_info("evaluate: EX=", format_double(overall), " over ", ds.examples.size(), " examples");
  update_manifest(ctx, "evaluate", {"predictions.jsonl", "ex.json"});
}

// Rows (in corpus order) used for estimator training, honoring the optional
// dataset restriction.
std::vector<size_t> estimator_rows(const RunConfig& cfg, const corpus::Dataset& ds) {
  std::vector<size_t> rows;
  for (size_t i = 0; i < ds.examples.size(); ++i) {
    if (cfg.estimator.dataset.empty() || ds.examples[i].dataset == cfg.estimator.dataset) {
      rows.push_back(i);
    }
  }
  if (rows.empty()) {
    fail("estimator: dataset restriction '", cfg.estimator.dataset, "' matches no examples");
  }
  return rows;
}

void stage_train_estimator(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  const std::map<std::string, sqleval::Prediction> predictions = load_predictions(ctx, true);

  const std::vector<size_t> rows = estimator_rows(ctx.cfg, ds);
  const Matrix X = fm.to_matrix().select_rows(rows);
  std::vector<int> y;
  std::vector<std::string> ids;
  for (size_t r : rows) {
    const std::string& id = ds.examples[r].id;
    auto it = predictions.find(id);
    if (it == predictions.end()) fail("no prediction for '", id, "'; run 'infer' + 'evaluate'");
    y.push_back(*it->second.correct);
    ids.push_back(id);
  }

  estimator::TrainOptions opts;
  opts.n_trees = ctx.cfg.estimator.n_trees;
  opts.train_split = ctx.cfg.estimator.train_split;
  opts.seed = derive_seed(ctx.cfg.seed_or_zero(), 0xe57);
  opts.online_only = ctx.cfg.estimator.online_only;
  opts.threads = ctx.cfg.threads;

  const estimator::TrainResult result = estimator::train_correctness(X, y, preds, ids, opts);
  write_file_atomic(ctx.path("estimator.json"),
                    estimator::estimator_to_json(result.model).dump(2) + "\n");
  write_file_atomic(ctx.path("estimator.metrics.json"),
                    estimator::metrics_to_json(result.metrics).dump(2) + "\n");

  // Calibration over all rows the estimator concerns itself with.
  std::vector<size_t> cols;
  for (size_t c = 0; c < preds.size(); ++c) {
    if (!opts.online_only || is_online(preds[c].required_inputs)) cols.push_back(c);
  }
  const Matrix Xc = cols.size() == X.cols ? X : X.select_cols(cols);
  const std::vector<estimator::CalibrationBin> curve =
      estimator::calibration_curve(result.model, Xc, y, 10, ctx.cfg.threads);
  std::string csv = "mean_predicted,empirical_accuracy,count\n";
  for (const auto& bin : curve) {
    csv += concat(format_double(bin.mean_predicted), ",",
                  format_double(bin.empirical_accuracy), ",", bin.count, "\n");
  }
  write_file_atomic(ctx.path("calibration.csv"), csv);

  log_info("train-estimator: holdout accuracy ", format_double(result.metrics.accuracy), " (n=",
           result.metrics.n_holdout, ")");
  update_manifest(ctx, "train-estimator",
                  {"estimator.json", "estimator.metrics.json", "calibration.csv"});
}

void stage_importance(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  ctx.require("estimator.json");
  const estimator::CorrectnessModel model =
      estimator::estimator_from_json(json::parse(read_file(ctx.path("estimator.json"))));
  const std::map<std::string, sqleval::Prediction> predictions = load_predictions(ctx, true);

  // Rebuild the estimator's training matrix (same rows, same columns).
  const std::vector<size_t> rows = estimator_rows(ctx.cfg, ds);
  std::map<std::string, size_t> col_of;
  for (size_t c = 0; c < fm.predicate_ids.size(); ++c) col_of[fm.predicate_ids[c]] = c;
  std::vector<size_t> cols;
  for (const std::string& id : model.predicate_ids) {
    auto it = col_of.find(id);
    if (it == col_of.end()) {
      fail("estimator was trained on predicate '", id, "' missing from features.header.json");
    }
    cols.push_back(it->second);
  }
  const Matrix X = fm.to_matrix().select_rows(rows).select_cols(cols);
  std::vector<int> y;
  for (size_t r : rows) y.push_back(*predictions.at(ds.examples[r].id).correct);

  // Permutation importance over the holdout negatives; all negatives when
  // the holdout has none.
  std::vector<size_t> eval_rows = model.holdout_rows;
  bool any_negative = false;
  for (size_t r : eval_rows) any_negative = any_negative || y[r] == 0;
  if (!any_negative) {
    log_warn("importance: holdout has no negative rows; scoring over all negatives");
    eval_rows.resize(X.rows);
    std::iota(eval_rows.begin(), eval_rows.end(), size_t{0});
  }
  std::vector<int> y_eval;
  for (size_t r : eval_rows) y_eval.push_back(y[r]);
  const estimator::ImportanceRanking ranking = estimator::negative_permutation_importance(
      model, X.select_rows(eval_rows), y_eval, ctx.cfg.importance.repeats,
      derive_seed(ctx.cfg.seed_or_zero(), 0x1294), ctx.cfg.threads);
  write_file_atomic(ctx.path("importance.estimator.json"),
                    estimator::ranking_to_json(ranking).dump(2) + "\n");

  // Per-cluster one-vs-rest importances over the full corpus.
  ctx.require("clusters.json");
  const json clusters = json::parse(read_file(ctx.path("clusters.json")));
  std::map<std::string, int> cluster_of;
  for (const json& a : clusters.at("assignments")) {
    cluster_of[a.at("example_id").get<std::string>()] = a.at("cluster").get<int>();
  }
  std::vector<int> labels;
  for (const auto& v : fm.vectors) labels.push_back(cluster_of.at(v.example_id));

  json cluster_imp = json::array();
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    log_warn("importance: fewer than two clusters; cluster importance is empty");
  } else {
    cluster_imp = analytics::cluster_importance_to_json(analytics::cluster_feature_importance(
        fm.to_matrix(), labels, fm.predicate_ids,
        analytics::parse_importance_method(ctx.cfg.importance.method),
        ctx.cfg.importance.cluster_trees, derive_seed(ctx.cfg.seed_or_zero(), 0xc1f5),
        ctx.cfg.threads));
  }
  write_file_atomic(ctx.path("importance.cluster.json"), cluster_imp.dump(2) + "\n");

  log_info("importance: ranked ", ranking.size(), " estimator features, ", distinct.size(),
           " clusters");
  update_manifest(ctx, "importance", {"importance.estimator.json", "importance.cluster.json"});
}

void stage_rewrite(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  ctx.require("estimator.json");
  const estimator::CorrectnessModel model =
      estimator::estimator_from_json(json::parse(read_file(ctx.path("estimator.json"))));
  if (!model.online_only) {
    fail("rewrite: the estimator must be trained online-only "
         "(set estimator.online_only = true and re-run train-estimator)");
  }
  ctx.require("importance.estimator.json");
  const estimator::ImportanceRanking ranking = estimator::ranking_from_json(
      json::parse(read_file(ctx.path("importance.estimator.json"))));
  const std::map<std::string, sqleval::Prediction> predictions = load_predictions(ctx, true);

  const std::vector<discovery::Predicate> online = featurizer::online_predicates(preds);
  {
    std::vector<std::string> online_ids;
    for (const auto& p : online) online_ids.push_back(p.id);
    if (online_ids != model.predicate_ids) {
      fail("rewrite: estimator feature binding does not match the online predicate set; "
           "re-run train-estimator with the current predicate file");
    }
  }

  // The protocol runs over the target dataset (all examples when unset).
  corpus::Dataset target;
  target.name = ctx.cfg.corpus.target_dataset.empty() ? ds.name : ctx.cfg.corpus.target_dataset;
  std::vector<const featurizer::FeatureVector*> target_vecs;
  for (size_t i = 0; i < ds.examples.size(); ++i) {
    if (ctx.cfg.corpus.target_dataset.empty() ||
        ds.examples[i].dataset == ctx.cfg.corpus.target_dataset) {
      target.examples.push_back(ds.examples[i]);
      target_vecs.push_back(&fm.vectors[i]);
    }
  }
  if (target.examples.empty()) {
    fail("rewrite: target dataset '", ctx.cfg.corpus.target_dataset, "' matches no examples");
  }

  std::vector<int> original_correct;
  for (const auto& ex : target.examples) original_correct.push_back(*predictions.at(ex.id).correct);

  std::vector<rewriter::RewritePlan> plans;
  std::map<std::string, std::vector<std::uint8_t>> online_bits;
  for (size_t i = 0; i < target.examples.size(); ++i) {
    const featurizer::FeatureVector proj = featurizer::online_projection(*target_vecs[i], preds);
    plans.push_back(rewriter::select_rewrite_targets(target.examples[i].id, proj.bits, online,
                                                     ranking, ctx.cfg.rewrite.k));
    online_bits[target.examples[i].id] = proj.bits;
  }

  llm::Gateway& gw = ctx.gw();
  for (const auto& ex : ds.examples) ctx.db(ex.db_id);
  rewriter::RewriteHooks hooks;
  hooks.predict_success = [&](const corpus::Example& ex) {
    const std::vector<std::uint8_t>& bits = online_bits.at(ex.id);
    std::vector<double> v(bits.begin(), bits.end());
    return estimator::predict_correct(model, v).label;
  };
  hooks.rewrite = [&](const corpus::Example& ex, const rewriter::PlanEntry& entry,
                      const std::string& question) {
    return rewriter::rewrite_question(gw, ctx.cfg.models.rewriter, question,
                                      ctx.db(ex.db_id).linearized, entry.predicate_text,
                                      entry.mode);
  };
  hooks.attempt = [&](const corpus::Example& ex, const std::string& question) {
    llm::ChatRequest req;
    req.model = ctx.cfg.models.subject;
    req.user = prompts::render_template(
        prompts::TemplateId::nl2sql,
        {{"schema", schema_with_rows(ctx, ex)}, {"question", question}});
    req.temperature = 0.1;
    const std::string raw = gw.complete(req).text;
    std::string sql;
    try {
      sql = sqleval::extract_sql(raw).sql;
    } catch (const Error&) {
      log_warn("rewrite attempt for '", ex.id, "' produced no SQL; scored 0");
      return 0;
    }
    return sqleval::adjudicate(ctx.db(ex.db_id).path, sql, ex.gold_sql, ctx.cfg.eval.timeout_ms)
        .correct;
  };

  rewriter::AccAtKOptions opts;
  opts.k = ctx.cfg.rewrite.k;
  opts.cumulative = ctx.cfg.rewrite.cumulative;
  const rewriter::AccAtKResult result =
      rewriter::acc_at_k(target, original_correct, plans, hooks, opts);

  std::vector<json> rows;
  for (const auto& r : result.records) {
    rows.push_back(json{{"correct", r.correct},
                        {"example_id", r.example_id},
                        {"feature", r.feature},
                        {"mode", r.mode},
                        {"rewritten", r.rewritten}});
  }
  write_jsonl_atomic(ctx.path("rewrites.jsonl"), rows);

  json aj;
  aj["baseline_ex"] = result.baseline;
  aj["acc_at_1"] = result.acc_at_1;
  aj["acc_at_k"] = result.acc_at_k;
  aj["k"] = result.k;
  aj["n"] = result.n;
  aj["dataset"] = target.name;
  aj["breakdown"] = json{{"est_right_success", result.est_right_success},
                         {"est_right_failure", result.est_right_failure},
                         {"est_wrong_success", result.est_wrong_success},
                         {"est_wrong_failure", result.est_wrong_failure}};
  write_file_atomic(ctx.path("accatk.json"), aj.dump(2) + "\n");

  std::string csv = ",success,failure\n";
  csv += concat("estimator_right,", result.est_right_success, ",", result.est_right_failure, "\n");
  csv += concat("estimator_wrong,", result.est_wrong_success, ",", result.est_wrong_failure, "\n");
  write_file_atomic(ctx.path("breakdown.csv"), csv);

  log_info("rewrite: baseline=", format_double(result.baseline),
           " acc@1=", format_double(result.acc_at_1), " acc@", result.k, "=",
           format_double(result.acc_at_k));
  update_manifest(ctx, "rewrite", {"rewrites.jsonl", "accatk.json", "breakdown.csv"});
}

void stage_report(RunContext& ctx) {
  const corpus::Dataset ds = load_run_corpus(ctx);
  for (const char* artifact :
       {"ex.json", "clusters.json", "chisq.csv", "proportions.csv", "estimator.metrics.json",
        "importance.estimator.json", "importance.cluster.json", "accatk.json"}) {
    ctx.require(artifact);
  }
  const std::vector<discovery::Predicate> preds = resolve_predicates(ctx);
  const featurizer::FeatureMatrix fm = load_features_checked(ctx, preds);
  const std::map<std::string, sqleval::Prediction> predictions = load_predictions(ctx, true);
  const json exj = json::parse(read_file(ctx.path("ex.json")));
  const json clusters = json::parse(read_file(ctx.path("clusters.json")));
  const json est_metrics = json::parse(read_file(ctx.path("estimator.metrics.json")));
  const json est_imp = json::parse(read_file(ctx.path("importance.estimator.json")));
  const json cluster_imp = json::parse(read_file(ctx.path("importance.cluster.json")));
  const json accatk = json::parse(read_file(ctx.path("accatk.json")));

  std::map<std::string, const discovery::Predicate*> pred_by_id;
  for (const auto& p : preds) pred_by_id[p.id] = &p;

  std::string md = "# SQLSpace run report\n\n";

  // Corpus + EX.
  md += "## Corpus\n\n| dataset | examples | EX |\n|---|---|---|\n";
  for (const auto& [name, sub] : exj.at("per_dataset").items()) {
    md += concat("| ", name, " | ", sub.at("n").get<size_t>(), " | ",
                 format_double(sub.at("ex").get<double>()), " |\n");
  }
  md += concat("\nSubject model `", exj.at("model_id").get<std::string>(), "`: overall EX ",
               format_double(exj.at("ex").get<double>()), " over ",
               exj.at("n").get<size_t>(), " examples.\n\n");

  // Cluster table.
  const int k = clusters.at("k").get<int>();
  std::map<std::string, int> cluster_of;
  std::vector<int> labels;
  std::vector<int> correct_bits;
  for (const json& a : clusters.at("assignments")) {
    cluster_of[a.at("example_id").get<std::string>()] = a.at("cluster").get<int>();
  }
  for (const auto& ex : ds.examples) {
    labels.push_back(cluster_of.at(ex.id));
    correct_bits.push_back(*predictions.at(ex.id).correct);
  }
  const std::vector<analytics::ClusterAccuracy> acc =
      analytics::cluster_accuracy(labels, correct_bits, k);

  std::map<int, std::map<std::string, size_t>> ds_counts;
  std::map<std::string, size_t> ds_totals;
  for (size_t i = 0; i < ds.examples.size(); ++i) {
    ++ds_counts[labels[i]][ds.examples[i].dataset];
    ++ds_totals[ds.examples[i].dataset];
  }
  const std::string target = ctx.cfg.corpus.target_dataset;

  md += concat("## Clusters (k = ", k, ")\n\n");
  md += "| cluster | n |";
  for (const auto& [name, _] : ds_totals) md += concat(" ", name, " |");
  md += " mean EX | variance |";
  if (!target.empty()) md += concat(" share of ", target, " |");
  md += " top features |\n|---|---|";
  for (size_t i = 0; i < ds_totals.size(); ++i) md += "---|";
  md += "---|---|";
  if (!target.empty()) md += "---|";
  md += "---|\n";

  std::map<int, std::vector<std::string>> top_by_cluster;
  for (const json& ci : cluster_imp) {
    std::vector<std::string> tops;
    const auto& feats = ci.at("top_features");
    for (size_t i = 0; i < feats.size() && i < 3; ++i) {
      tops.push_back(feats[i].at("id").get<std::string>());
    }
    top_by_cluster[ci.at("cluster").get<int>()] = std::move(tops);
  }

  double recomposed = 0.0;
  for (const auto& ca : acc) {
    md += concat("| ", ca.cluster, " | ", ca.n, " |");
    for (const auto& [name, _] : ds_totals) {
      md += concat(" ", ds_counts[ca.cluster].count(name) ? ds_counts[ca.cluster][name] : 0, " |");
    }
    md += concat(" ", format_double(ca.mean), " | ", format_double(ca.variance), " |");
    if (!target.empty()) {
      const size_t in_target =
          ds_counts[ca.cluster].count(target) ? ds_counts[ca.cluster][target] : 0;
      const double share = ds_totals.count(target) && ds_totals[target] > 0
                               ? static_cast<double>(in_target) /
                                     static_cast<double>(ds_totals[target])
                               : 0.0;
      md += concat(" ", format_double(share), " |");
    }
    const auto& tops = top_by_cluster[ca.cluster];
    md += concat(" ", tops.empty() ? std::string("-") : join(tops, ", "), " |\n");
    recomposed += ca.mean * static_cast<double>(ca.n);
  }
  recomposed /= static_cast<double>(ds.examples.size());
  md += concat("\nWeighted cluster accuracies recompose overall EX: ",
               format_double(recomposed), " (|Δ| = ",
               format_double(std::abs(recomposed - exj.at("ex").get<double>())), ").\n\n");

  // Most divergent features by chi-square.
  struct ChiRow {
    std::string id;
    double stat;
    double p;
    std::string significant;
  };
  std::vector<ChiRow> chirows;
  {
    const std::string csv = read_file(ctx.path("chisq.csv"));
    bool header = true;
    for (const std::string& line : split_lines(csv)) {
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      std::vector<std::string> cells;
      size_t start = 0;
      for (size_t pos = 0; pos <= line.size(); ++pos) {
        if (pos == line.size() || line[pos] == ',') {
          cells.push_back(line.substr(start, pos - start));
          start = pos + 1;
        }
      }
      if (cells.size() != 5 || cells[1] == "NA") continue;
      chirows.push_back({cells[0], std::stod(cells[1]), std::stod(cells[3]), cells[4]});
    }
  }
  std::stable_sort(chirows.begin(), chirows.end(),
                   [](const ChiRow& a, const ChiRow& b) { return a.p < b.p; });
  md += "## Most dataset-divergent features\n\n| predicate | statistic | p | significant | text |\n"
        "|---|---|---|---|---|\n";
  for (size_t i = 0; i < chirows.size() && i < 10; ++i) {
    const auto it = pred_by_id.find(chirows[i].id);
    md += concat("| ", chirows[i].id, " | ", format_double(chirows[i].stat), " | ",
                 format_double(chirows[i].p), " | ", chirows[i].significant, " | ",
                 it == pred_by_id.end() ? std::string("?") : it->second->text, " |\n");
  }

  // Estimator.
  md += concat("\n## Correctness estimator\n\nPrecision ",
               format_double(est_metrics.at("precision").get<double>()), ", recall ",
               format_double(est_metrics.at("recall").get<double>()), ", F1 ",
               format_double(est_metrics.at("f1").get<double>()), ", accuracy ",
               format_double(est_metrics.at("accuracy").get<double>()), " (holdout n = ",
               est_metrics.at("n_holdout").get<size_t>(), ").\n\n");
  md += "Top damaging features (permutation importance on negatives):\n\n"
        "| predicate | score | text |\n|---|---|---|\n";
  for (size_t i = 0; i < est_imp.size() && i < 10; ++i) {
    const std::string id = est_imp[i].at("predicate_id").get<std::string>();
    const auto it = pred_by_id.find(id);
    md += concat("| ", id, " | ", format_double(est_imp[i].at("score").get<double>()), " | ",
                 it == pred_by_id.end() ? std::string("?") : it->second->text, " |\n");
  }

  // Rewrites.
  md += concat("\n## Feature-modulated rewriting\n\nDataset `",
               accatk.at("dataset").get<std::string>(), "` (n = ",
               accatk.at("n").get<size_t>(), "): baseline EX ",
               format_double(accatk.at("baseline_ex").get<double>()), " → Acc@1 ",
               format_double(accatk.at("acc_at_1").get<double>()), " → Acc@",
               accatk.at("k").get<int>(), " ",
               format_double(accatk.at("acc_at_k").get<double>()), ".\n\n");
  const json& bd = accatk.at("breakdown");
  md += "| | final success | final failure |\n|---|---|---|\n";
  md += concat("| estimator right | ", bd.at("est_right_success").get<size_t>(), " | ",
               bd.at("est_right_failure").get<size_t>(), " |\n");
  md += concat("| estimator wrong | ", bd.at("est_wrong_success").get<size_t>(), " | ",
               bd.at("est_wrong_failure").get<size_t>(), " |\n");

  md += concat("\n---\npredicate_set_id: `", fm.predicate_set_id, "` · config: `",
               config_hash(ctx.cfg), "` · seed: ", ctx.cfg.seed_or_zero(), "\n");

  write_file_atomic(ctx.path("report.md"), md);
  log_info("report: wrote ", md.size(), " bytes");
  update_manifest(ctx, "report", {"report.md"});
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "ingest",  "describe", "propose",  "dedupe",          "featurize",
      "cluster", "compare",  "infer",    "evaluate",        "train-estimator",
      "importance", "rewrite", "report"};
  return names;
}

bool is_stage(const std::string& name) {
  const auto& names = stage_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

void run_stage(const std::string& stage, const RunConfig& cfg) {
  if (stage == "all") {
    for (const std::string& s : stage_names()) run_stage(s, cfg);
    return;
  }
  if (!is_stage(stage)) fail("unknown stage '", stage, "'");
  require_valid(cfg);

  RunContext ctx(cfg);
  if (stage == "ingest") stage_ingest(ctx);
  else if (stage == "describe") stage_describe(ctx);
  else if (stage == "propose") stage_propose(ctx);
  else if (stage == "dedupe") stage_dedupe(ctx);
  else if (stage == "featurize") stage_featurize(ctx);
  else if (stage == "cluster") stage_cluster(ctx);
  else if (stage == "compare") stage_compare(ctx);
  else if (stage == "infer") stage_infer(ctx);
  else if (stage == "evaluate") stage_evaluate(ctx);
  else if (stage == "train-estimator") stage_train_estimator(ctx);
  else if (stage == "importance") stage_importance(ctx);
  else if (stage == "rewrite") stage_rewrite(ctx);
  else if (stage == "report") stage_report(ctx);
}

}  // namespace sqlspace::pipeline

#include "sqlspace/config.hpp"

#include <cstdlib>

#include "sqlspace/aspects.hpp"
#include "sqlspace/common.hpp"
#include "sqlspace/corpus.hpp"
#include "sqlspace/gateway.hpp"
#include "sqlspace/sha256.hpp"

namespace sqlspace::pipeline {

namespace {

std::string interpolate_env(const std::string& s) {
  std::string out;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
      const size_t end = s.find('}', i + 2);
      if (end != std::string::npos) {
        const std::string name = s.substr(i + 2, end - i - 2);
        const char* value = std::getenv(name.c_str());
        if (value != nullptr) out += value;
        i = end + 1;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

void interpolate_tree(json& j) {
  if (j.is_string()) {
    j = interpolate_env(j.get<std::string>());
  } else if (j.is_object() || j.is_array()) {
    for (auto& child : j) interpolate_tree(child);
  }
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string RunConfig::resolved_cache_dir() const {
  if (!cache_dir.empty()) return cache_dir;
  return run_dir + "/cache";
}

RunConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail("config '", path, "': ", e.what());
  }
  interpolate_tree(j);

  RunConfig cfg;
  read_field(j, "run_dir", cfg.run_dir);
  read_field(j, "cache_dir", cfg.cache_dir);
  read_field(j, "mode", cfg.mode);
  read_field(j, "predicates_path", cfg.predicates_path);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  read_field(j, "threads", cfg.threads);
  read_field(j, "alpha", cfg.alpha);
  read_field(j, "ablation", cfg.ablation);

  if (j.contains("provider")) {
    const json& p = j.at("provider");
    read_field(p, "endpoint", cfg.provider.endpoint);
    read_field(p, "api_key_env", cfg.provider.api_key_env);
    read_field(p, "max_in_flight", cfg.provider.max_in_flight);
    read_field(p, "max_retries", cfg.provider.max_retries);
    read_field(p, "retry_base_ms", cfg.provider.retry_base_ms);
    read_field(p, "timeout_sec", cfg.provider.timeout_sec);
  }
  if (j.contains("models")) {
    const json& m = j.at("models");
    read_field(m, "describer", cfg.models.describer);
    read_field(m, "proposers", cfg.models.proposers);
    read_field(m, "evaluator", cfg.models.evaluator);
    read_field(m, "rewriter", cfg.models.rewriter);
    read_field(m, "subject", cfg.models.subject);
  }
  if (j.contains("corpus")) {
    const json& c = j.at("corpus");
    read_field(c, "path", cfg.corpus.path);
    read_field(c, "format", cfg.corpus.format);
    read_field(c, "dataset_name", cfg.corpus.dataset_name);
    read_field(c, "db_root", cfg.corpus.db_root);
    read_field(c, "target_dataset", cfg.corpus.target_dataset);
  }
  if (j.contains("discovery")) {
    const json& d = j.at("discovery");
    read_field(d, "n", cfg.discovery.n);
    read_field(d, "j", cfg.discovery.j);
    read_field(d, "sample_size", cfg.discovery.sample_size);
    read_field(d, "threshold", cfg.discovery.threshold);
    read_field(d, "manual_removals", cfg.discovery.manual_removals);
  }
  if (j.contains("featurize")) {
    const json& f = j.at("featurize");
    read_field(f, "predicates", cfg.featurize.predicates);
    read_field(f, "online_only", cfg.featurize.online_only);
    read_field(f, "aspects", cfg.featurize.aspects);
  }
  if (j.contains("cluster")) {
    const json& c = j.at("cluster");
    read_field(c, "k", cfg.cluster.k);
    read_field(c, "k_min", cfg.cluster.k_min);
    read_field(c, "k_max", cfg.cluster.k_max);
  }
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    read_field(e, "n_trees", cfg.estimator.n_trees);
    read_field(e, "train_split", cfg.estimator.train_split);
    read_field(e, "online_only", cfg.estimator.online_only);
    read_field(e, "dataset", cfg.estimator.dataset);
  }
  if (j.contains("importance")) {
    const json& i = j.at("importance");
    read_field(i, "method", cfg.importance.method);
    read_field(i, "repeats", cfg.importance.repeats);
    read_field(i, "cluster_trees", cfg.importance.cluster_trees);
  }
  if (j.contains("rewrite")) {
    const json& r = j.at("rewrite");
    read_field(r, "k", cfg.rewrite.k);
    read_field(r, "cumulative", cfg.rewrite.cumulative);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    read_field(e, "timeout_ms", cfg.eval.timeout_ms);
    read_field(e, "rows_per_table", cfg.eval.rows_per_table);
  }
  return cfg;
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  auto problem = [&](auto&&... parts) {
    problems.push_back(concat(std::forward<decltype(parts)>(parts)...));
  };

  if (cfg.run_dir.empty()) problem("run_dir must be set");

  if (cfg.mode != "live" && cfg.mode != "record" && cfg.mode != "replay") {
    problem("mode '", cfg.mode, "' is not one of live/record/replay");
  }
  if (cfg.mode == "replay" && !cfg.seed.has_value()) {
    problem("seed is mandatory in replay mode");
  }

  if (cfg.ablation != "" && cfg.ablation != "direct-proposal" &&
      cfg.ablation != "aspect-agnostic" && cfg.ablation != "no-dedupe") {
    problem("ablation '", cfg.ablation,
            "' is not one of direct-proposal/aspect-agnostic/no-dedupe");
  }

  if (cfg.corpus.path.empty()) {
    problem("corpus.path must be set");
  } else if (!file_exists(cfg.corpus.path)) {
    problem("corpus.path '", cfg.corpus.path, "' does not exist");
  }
  if (cfg.corpus.format != "spider_json" && cfg.corpus.format != "bird_json" &&
      cfg.corpus.format != "jsonl") {
    problem("corpus.format '", cfg.corpus.format, "' is not one of spider_json/bird_json/jsonl");
  }
  if (cfg.corpus.db_root.empty()) {
    problem("corpus.db_root must be set");
  } else if (!file_exists(cfg.corpus.db_root)) {
    problem("corpus.db_root '", cfg.corpus.db_root, "' does not exist");
  }

  if (cfg.featurize.predicates != "shipped" && cfg.featurize.predicates != "discovered") {
    problem("featurize.predicates '", cfg.featurize.predicates,
            "' is not one of shipped/discovered");
  }
  if (cfg.featurize.predicates == "shipped" && !file_exists(cfg.predicates_path)) {
    problem("predicates_path '", cfg.predicates_path, "' does not exist");
  }
  if (!cfg.discovery.manual_removals.empty() && !file_exists(cfg.discovery.manual_removals)) {
    problem("discovery.manual_removals '", cfg.discovery.manual_removals, "' does not exist");
  }

  if (cfg.provider.endpoint.empty()) problem("provider.endpoint must be set");
  if (cfg.mode != "replay" && cfg.provider.endpoint != "mock") {
    const char* key = std::getenv(cfg.provider.api_key_env.c_str());
    if (key == nullptr || key[0] == '\0') {
      problem("mode '", cfg.mode, "' with an HTTP endpoint requires the API key env var ",
              cfg.provider.api_key_env, " to be set");
    }
  }
  if (cfg.provider.max_in_flight < 1) problem("provider.max_in_flight must be >= 1");
  if (cfg.provider.max_retries < 0) problem("provider.max_retries must be >= 0");

  if (cfg.models.proposers.empty()) problem("models.proposers must not be empty");

  if (cfg.discovery.n < 1) problem("discovery.n must be >= 1");
  if (cfg.discovery.j < 1) problem("discovery.j must be >= 1");
  if (cfg.discovery.sample_size < 1) problem("discovery.sample_size must be >= 1");
  if (cfg.discovery.threshold < 0 || cfg.discovery.threshold > 100) {
    problem("discovery.threshold must be in [0, 100]");
  }

  for (const std::string& a : cfg.featurize.aspects) {
    try {
      parse_aspect(a);
    } catch (const Error&) {
      problem("featurize.aspects contains unknown aspect '", a, "'");
    }
  }

  if (cfg.cluster.k < 0) problem("cluster.k must be >= 0 (0 selects k by elbow)");
  if (cfg.cluster.k_min < 1 || cfg.cluster.k_max < cfg.cluster.k_min) {
    problem("cluster k range [", cfg.cluster.k_min, ", ", cfg.cluster.k_max, "] is invalid");
  }

  if (cfg.estimator.n_trees < 1) problem("estimator.n_trees must be >= 1");
  if (cfg.estimator.train_split <= 0.0 || cfg.estimator.train_split > 1.0) {
    problem("estimator.train_split must be in (0, 1]");
  }

  if (cfg.importance.method != "mdi" && cfg.importance.method != "permutation") {
    problem("importance.method '", cfg.importance.method, "' is not one of mdi/permutation");
  }
  if (cfg.importance.repeats < 1) problem("importance.repeats must be >= 1");
  if (cfg.importance.cluster_trees < 1) problem("importance.cluster_trees must be >= 1");

  if (cfg.rewrite.k < 1) problem("rewrite.k must be >= 1");
  if (cfg.eval.timeout_ms < 1) problem("eval.timeout_ms must be >= 1");
  if (cfg.eval.rows_per_table < 0) problem("eval.rows_per_table must be >= 0");
  if (cfg.threads < 1) problem("threads must be >= 1");
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) problem("alpha must be in (0, 1)");

  return problems;
}

void require_valid(const RunConfig& cfg) {
  const std::vector<std::string> problems = validate_config(cfg);
  if (problems.empty()) return;
  std::string msg = concat("config has ", problems.size(), " problem(s):");
  for (const auto& p : problems) msg += concat("\n  - ", p);
  throw Error(msg);
}

json effective_json(const RunConfig& cfg) {
  // run_dir / cache_dir are deliberately not part of the effective config:
  // the same run recorded into a different location must hash (and therefore
  // report) identically.
  json j;
  j["mode"] = cfg.mode;
  j["predicates_path"] = cfg.predicates_path;
  if (cfg.seed.has_value()) j["seed"] = *cfg.seed;
  j["threads"] = cfg.threads;
  j["alpha"] = cfg.alpha;
  j["ablation"] = cfg.ablation;
  j["provider"] = {{"endpoint", cfg.provider.endpoint},
                   {"api_key_env", cfg.provider.api_key_env},
                   {"max_in_flight", cfg.provider.max_in_flight},
                   {"max_retries", cfg.provider.max_retries},
                   {"retry_base_ms", cfg.provider.retry_base_ms},
                   {"timeout_sec", cfg.provider.timeout_sec}};
  j["models"] = {{"describer", cfg.models.describer},
                 {"proposers", cfg.models.proposers},
                 {"evaluator", cfg.models.evaluator},
                 {"rewriter", cfg.models.rewriter},
                 {"subject", cfg.models.subject}};
  j["corpus"] = {{"path", cfg.corpus.path},
                 {"format", cfg.corpus.format},
                 {"dataset_name", cfg.corpus.dataset_name},
                 {"db_root", cfg.corpus.db_root},
                 {"target_dataset", cfg.corpus.target_dataset}};
  j["discovery"] = {{"n", cfg.discovery.n},
                    {"j", cfg.discovery.j},
                    {"sample_size", cfg.discovery.sample_size},
                    {"threshold", cfg.discovery.threshold},
                    {"manual_removals", cfg.discovery.manual_removals}};
  j["featurize"] = {{"predicates", cfg.featurize.predicates},
                    {"online_only", cfg.featurize.online_only},
                    {"aspects", cfg.featurize.aspects}};
  j["cluster"] = {{"k", cfg.cluster.k}, {"k_min", cfg.cluster.k_min}, {"k_max", cfg.cluster.k_max}};
  j["estimator"] = {{"n_trees", cfg.estimator.n_trees},
                    {"train_split", cfg.estimator.train_split},
                    {"online_only", cfg.estimator.online_only},
                    {"dataset", cfg.estimator.dataset}};
  j["importance"] = {{"method", cfg.importance.method},
                     {"repeats", cfg.importance.repeats},
                     {"cluster_trees", cfg.importance.cluster_trees}};
  j["rewrite"] = {{"k", cfg.rewrite.k}, {"cumulative", cfg.rewrite.cumulative}};
  j["eval"] = {{"timeout_ms", cfg.eval.timeout_ms},
               {"rows_per_table", cfg.eval.rows_per_table}};
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  return sha256_hex(canonical_dump(effective_json(cfg))).substr(0, 16);
}

}  // namespace sqlspace::pipeline

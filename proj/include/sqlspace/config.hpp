#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqlspace/jsonl.hpp"

namespace sqlspace::pipeline {

struct ProviderConfig {
  std::string endpoint = "mock";  // "mock" or an OpenAI-compatible base URL
  std::string api_key_env = "SQLSPACE_API_KEY";
  int max_in_flight = 4;
  int max_retries = 3;
  int retry_base_ms = 250;
  int timeout_sec = 120;
};

struct ModelsConfig {
  std::string describer = "mock-describer";
  std::vector<std::string> proposers = {"mock-proposer"};
  std::string evaluator = "mock-evaluator";
  std::string rewriter = "mock-rewriter";
  std::string subject = "mock-subject";
};

struct CorpusConfig {
  std::string path;
  std::string format = "jsonl";  // spider_json | bird_json | jsonl
  std::string dataset_name = "corpus";  // label when rows carry no dataset field
  std::string db_root;
  std::string target_dataset;  // clustered-by-inference / rewrite-protocol split
};

struct DiscoveryConfig {
  int n = 40;
  int j = 5;
  int sample_size = 30;
  int threshold = 70;
  std::string manual_removals;  // optional file: predicate ids to drop, one per line
};

struct FeaturizeConfig {
  std::string predicates = "shipped";  // shipped | discovered
  bool online_only = false;
  std::vector<std::string> aspects;  // empty = all
};

struct ClusterConfig {
  int k = 0;  // 0 → elbow selection
  int k_min = 2;
  int k_max = 20;
};

struct EstimatorConfig {
  int n_trees = 200;
  double train_split = 0.9;
  bool online_only = true;
  std::string dataset;  // restrict training rows; empty = all datasets
};

struct ImportanceConfig {
  std::string method = "permutation";  // mdi | permutation (cluster importance)
  int repeats = 10;
  int cluster_trees = 100;
};

struct RewriteConfig {
  int k = 3;
  bool cumulative = false;
};

struct EvalConfig {
  int timeout_ms = 30000;
  int rows_per_table = 3;
};

struct RunConfig {
  std::string run_dir;
  std::string cache_dir;  // empty → <run_dir>/cache
  std::string mode = "replay";
  std::string predicates_path = "data/predicates.jsonl";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  double alpha = 0.05;
  std::string ablation;  // "" | direct-proposal | aspect-agnostic | no-dedupe

  ProviderConfig provider;
  ModelsConfig models;
  CorpusConfig corpus;
  DiscoveryConfig discovery;
  FeaturizeConfig featurize;
  ClusterConfig cluster;
  EstimatorConfig estimator;
  ImportanceConfig importance;
  RewriteConfig rewrite;
  EvalConfig eval;

  std::uint64_t seed_or_zero() const { return seed.value_or(0); }
  std::string resolved_cache_dir() const;
};

/// Parses the JSON config; strings may interpolate environment variables with
/// `${NAME}` (unset variables resolve empty and are caught by validation
/// where they matter).
RunConfig load_config(const std::string& path);

/// Every problem, not just the first; empty means valid.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// Validates and throws a single error listing all problems.
void require_valid(const RunConfig& cfg);

/// The effective configuration as canonical JSON (used for the config hash
/// stamped into reports and the manifest).
json effective_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

}  // namespace sqlspace::pipeline

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "sqlspace/common.hpp"
#include "sqlspace/config.hpp"
#include "sqlspace/pipeline.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string run_dir;
  std::string mode;
  std::string ablation;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;
  bool online_only = false;
  bool online_only_set = false;
};

sqlspace::pipeline::RunConfig resolve_config(const CliOverrides& o) {
  sqlspace::pipeline::RunConfig cfg = sqlspace::pipeline::load_config(o.config_path);
  if (!o.run_dir.empty()) cfg.run_dir = o.run_dir;
  if (!o.mode.empty()) cfg.mode = o.mode;
  if (!o.ablation.empty()) cfg.ablation = o.ablation == "none" ? "" : o.ablation;
  if (o.seed_set) cfg.seed = o.seed;
  if (o.threads_set) cfg.threads = o.threads;
  if (o.online_only_set) {
    cfg.featurize.online_only = o.online_only;
    cfg.estimator.online_only = o.online_only;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SQLSpace: interpretable feature spaces for text-to-SQL corpora"};
  app.require_subcommand(1);

  CliOverrides o;
  std::vector<std::string> stages;
  stages.push_back("all");
  for (const std::string& s : sqlspace::pipeline::stage_names()) stages.push_back(s);

  for (const std::string& stage : stages) {
    CLI::App* sub = app.add_subcommand(
        stage, stage == "all" ? "run every stage in order" : "run the " + stage + " stage");
    sub->add_option("--config", o.config_path, "run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--run-dir", o.run_dir, "artifact directory (overrides config)");
    sub->add_option("--mode", o.mode, "live | record | replay (overrides config)");
    sub->add_option("--ablation", o.ablation,
                    "none | direct-proposal | aspect-agnostic | no-dedupe (overrides config)");
    sub->add_option("--seed", o.seed, "base seed (overrides config)")
        ->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--threads", o.threads, "worker count; 1 = serial (overrides config)")
        ->each([&](const std::string&) { o.threads_set = true; });
    sub->add_flag("--online-only,!--no-online-only", o.online_only,
                  "restrict featurize/estimator to online predicates (overrides config)")
        ->each([&](const std::string&) { o.online_only_set = true; });
  }

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    sqlspace::pipeline::run_stage(stage, resolve_config(o));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

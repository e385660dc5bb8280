#include "sqlprobe/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
  std::string config;
  std::string dataset, provider, joins, subtree, questions, direction, output_dir;
  std::optional<int> m, replicas, parallelism;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold, filter_threshold;
  std::optional<std::size_t> sample_n;
  std::vector<int> ks;
  bool mock = false;
};

void add_common(CLI::App& cmd, Options& o)
{
  cmd.add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--dataset", o.dataset, "Dataset name from the config's \"datasets\" table");
  cmd.add_option("--provider", o.provider, "Provider name from the config's \"providers\" table");
  cmd.add_flag("--mock", o.mock, "Replace non-mock providers with the offline mock");
  cmd.add_option("--m", o.m, "Paraphrases per example");
  cmd.add_option("--seed", o.seed, "Sampling seed");
  cmd.add_option("--sample", o.sample_n, "Number of examples to sample (0 = all)");
  cmd.add_option("--threshold", o.threshold, "Semantic similarity threshold for valid paraphrases");
  cmd.add_option("--filter-threshold", o.filter_threshold, "Similarity gate for sql2nl pass@k questions");
  cmd.add_option("--joins", o.joins, "Join counting")->check(CLI::IsMember({"explicit", "all"}));
  cmd.add_option("--subtree", o.subtree, "Subtree count definition")->check(CLI::IsMember({"internal", "all-tokens"}));
  cmd.add_option("--questions", o.questions, "Questions to predict and evaluate")
      ->check(CLI::IsMember({"originals", "paraphrases", "both"}));
  cmd.add_option("--direction", o.direction, "Pass@k direction")->check(CLI::IsMember({"nl2sql", "sql2nl"}));
  cmd.add_option("--replicas", o.replicas, "Pass@k replicas per example");
  cmd.add_option("--ks", o.ks, "Pass@k k values")->delimiter(',');
  cmd.add_option("--parallelism", o.parallelism, "Worker threads");
  cmd.add_option("--output-dir", o.output_dir, "Output directory (overrides the config)");
}

sqlprobe::RunOverrides to_overrides(const Options& o)
{
  sqlprobe::RunOverrides r;
  const auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  r.dataset = opt(o.dataset);
  r.provider = opt(o.provider);
  r.joins = opt(o.joins);
  r.subtree = opt(o.subtree);
  r.questions = opt(o.questions);
  r.direction = opt(o.direction);
  if (!o.output_dir.empty()) r.output_dir = o.output_dir;
  r.m = o.m;
  r.seed = o.seed;
  r.threshold = o.threshold;
  r.filter_threshold = o.filter_threshold;
  r.replicas = o.replicas;
  r.sample_n = o.sample_n;
  r.parallelism = o.parallelism;
  if (!o.ks.empty()) r.ks = o.ks;
  r.mock = o.mock;
  return r;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"sqlprobe: robustness evaluation for NL2SQL models"};
  app.require_subcommand(1);
  Options options;

  using Stage = int (*)(const sqlprobe::RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Stage>> stages = {
      {"stats", "Dataset schema and query complexity statistics", sqlprobe::run_stats},
      {"paraphrase", "Generate and score paraphrases of each gold query", sqlprobe::run_paraphrase},
      {"predict", "Translate original and paraphrased questions to SQL", sqlprobe::run_predict},
      {"evaluate", "Execute predictions and compute robustness metrics", sqlprobe::run_evaluate},
      {"passk", "Pass@k over repeated samples", sqlprobe::run_passk},
      {"linguistics", "Grammar similarity and linguistic feature distributions", sqlprobe::run_linguistics},
      {"report", "Consolidated JSON report with CSV tables and plot data", sqlprobe::run_report},
  };
  Stage selected = nullptr;
  for (const auto& [name, help, fn] : stages) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(*cmd, options);
    cmd->callback([&selected, fn = fn] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sqlprobe::exit_code::fatal;
  }

  try {
    const auto config = sqlprobe::load_run_config(options.config, to_overrides(options));
    return selected(config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "sqlprobe: " << e.what() << "\n";
    return sqlprobe::exit_code::fatal;
  }
}

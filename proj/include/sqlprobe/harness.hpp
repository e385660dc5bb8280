#pragma once

#include "sqlprobe/dataset.hpp"
#include "sqlprobe/linguistics.hpp"
#include "sqlprobe/llm.hpp"
#include "sqlprobe/metrics.hpp"
#include "sqlprobe/paraphrase.hpp"
#include "sqlprobe/sql/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sqlprobe {

enum class QuestionMode { originals, paraphrases, both };
QuestionMode parse_question_mode(std::string_view name);
std::string_view to_string(QuestionMode mode);

enum class PassKDirection { nl2sql, sql2nl };
PassKDirection parse_passk_direction(std::string_view name);
std::string_view to_string(PassKDirection direction);

struct DatasetConfig {
  std::string name;
  DatasetFormat format = DatasetFormat::spider;
  std::filesystem::path examples;
  std::filesystem::path tables;
  std::filesystem::path db_root;
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file; relative paths resolve here

  DatasetConfig dataset;
  std::string provider_name = "mock";
  std::string embedding_provider_name = "mock";
  ProviderConfig provider;
  ProviderConfig embedding_provider;

  int m = 10;
  std::size_t sample_n = 0;  // 0 keeps every example in file order
  std::uint64_t seed = 20250101;
  double threshold = default_similarity_threshold;
  std::optional<double> filter_threshold;
  double paraphrase_temperature = 0.5;
  double predict_temperature = 0.0;
  double passk_temperature = 0.5;
  int max_tokens = 1024;
  int n_replicas = 10;
  std::vector<int> ks{1, 2, 5, 10};
  PassKDirection passk_direction = PassKDirection::nl2sql;
  QuestionMode questions = QuestionMode::both;
  double execution_timeout = 30.0;
  int parallelism = 4;
  std::filesystem::path output_dir;
  JoinCounting joins = JoinCounting::all;
  SubtreeMode subtree = SubtreeMode::internal;
  sql::Dialect dialect = sql::Dialect::sqlite;
  std::filesystem::path annotations;      // optional annotation JSONL
  std::filesystem::path nl2sql_template;  // optional prompt template file
  BootstrapOptions bootstrap;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;

  /// Effective settings with paths relative to base_dir, for report headers.
  nlohmann::ordered_json echo() const;
};

/// Command-line values that replace config-file settings.
struct RunOverrides {
  std::optional<std::string> dataset;
  std::optional<std::string> provider;
  std::optional<int> m;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<double> filter_threshold;
  bool mock = false;
  std::optional<std::string> joins;
  std::optional<std::string> subtree;
  std::optional<std::string> questions;
  std::optional<std::string> direction;
  std::optional<int> replicas;
  std::optional<std::vector<int>> ks;
  std::optional<std::size_t> sample_n;
  std::optional<int> parallelism;
  std::optional<std::filesystem::path> output_dir;
};

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                               const RunOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const RunOverrides& overrides = {});

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int fatal = 1;
inline constexpr int partial = 2;
}  // namespace exit_code

/// Output file names inside RunConfig::output_dir.
namespace stage_files {
inline constexpr const char* stats_json = "stats.json";
inline constexpr const char* stats_text = "stats.txt";
inline constexpr const char* paraphrases = "paraphrases.jsonl";
inline constexpr const char* predictions = "predictions.jsonl";
inline constexpr const char* evaluation = "evaluation.jsonl";
inline constexpr const char* evaluation_report = "evaluation_report.json";
inline constexpr const char* linguistics_pairs = "linguistics_pairs.csv";
inline constexpr const char* linguistics_summary = "linguistics_summary.json";
inline constexpr const char* kde_dir = "kde";
inline constexpr const char* report_dir = "report";
std::string passk_records(PassKDirection direction);
std::string passk_summary(PassKDirection direction);
}  // namespace stage_files

/// Each stage reads its inputs from and writes its outputs to config.output_dir,
/// logs progress to `log`, and returns one of the exit_code values.
int run_stats(const RunConfig& config, std::ostream& log);
int run_paraphrase(const RunConfig& config, std::ostream& log);
int run_predict(const RunConfig& config, std::ostream& log);
int run_evaluate(const RunConfig& config, std::ostream& log);
int run_passk(const RunConfig& config, std::ostream& log);
int run_linguistics(const RunConfig& config, std::ostream& log);
int run_report(const RunConfig& config, std::ostream& log);

// ---------------------------------------------------------------------------
// Building blocks shared by the stages

struct UnitResult {
  std::string line;   // JSONL payload without newline; empty means nothing to write
  std::string error;  // non-empty marks the unit as failed
};

/// Runs work(i) for i in [0, n) on up to `parallelism` threads and calls
/// commit(i, result) on the calling thread in index order. Exceptions thrown
/// by work become UnitResult errors.
void run_ordered(std::size_t n, int parallelism, const std::function<UnitResult(std::size_t)>& work,
                 const std::function<void(std::size_t, UnitResult&)>& commit);

/// Append-only JSONL file keyed per line. Opening repairs a torn final line
/// left by an interrupted run and indexes the keys already present.
class JsonlAppender {
 public:
  using KeyFn = std::function<std::string(const nlohmann::json&)>;

  JsonlAppender(std::filesystem::path path, KeyFn key);
  bool contains(const std::string& key) const { return keys_.count(key) > 0; }
  std::size_t size() const { return keys_.size(); }
  void append(const std::string& line);

 private:
  std::filesystem::path path_;
  KeyFn key_;
  std::set<std::string> keys_;
};

std::string unit_key(std::string_view example_id, int variant_index);

/// Quotes a CSV field when it holds a comma, quote or line break.
std::string csv_field(std::string_view value);

}  // namespace sqlprobe

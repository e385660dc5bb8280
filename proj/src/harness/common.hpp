#pragma once

#include "sqlprobe/harness.hpp"
#include "sqlprobe/paraphrase.hpp"

#include <map>
#include <memory>
#include <ostream>

namespace sqlprobe::detail {

struct Workspace {
  std::vector<DatasetExample> examples;
  SchemaMap schemas;

  const DatabaseSchema& schema_for(const DatasetExample& example) const;
};

/// Loads examples and schemas; applies sample_n and seed when `sample` is set.
Workspace load_workspace(const RunConfig& config, bool sample = true);

struct Providers {
  std::shared_ptr<Provider> generation;
  std::shared_ptr<Provider> embedding;
};

Providers make_providers(const RunConfig& config);

std::filesystem::path output_path(const RunConfig& config, const std::filesystem::path& name);

/// Pretty-printed JSON plus trailing newline, written atomically.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

/// Every non-blank line parsed as JSON. Throws naming the file when a line is unreadable.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Paraphrase sets by example id, re-thresholded with config.threshold.
std::map<std::string, ParaphraseSet> load_paraphrases(const RunConfig& config);

nlohmann::ordered_json interval_json(const Interval& interval);
nlohmann::ordered_json accuracy_json(const AccuracyReport& report);

/// True when the outermost query block ends in ORDER BY. Falls back to a
/// keyword scan when the text does not parse.
bool top_level_order_by(std::string_view sql, sql::Dialect dialect);

std::optional<std::string> custom_nl2sql_template(const RunConfig& config);

/// Renders the NL2SQL prompt, asks for n samples and extracts SQL from each.
struct Nl2SqlAnswer {
  std::string raw_output;
  std::string sql;
};
std::vector<Nl2SqlAnswer> ask_nl2sql(Provider& provider, const RunConfig& config, const DatabaseSchema& schema,
                                     std::string_view question, double temperature, int n_samples,
                                     const std::optional<std::string>& custom_template);

/// Runs gold and predicted SQL and compares them.
MatchOutcome match_against_gold(const RunConfig& config, const DatabaseSchema& schema, std::string_view gold_sql,
                                std::string_view predicted_sql);

/// Summary line of failures, one per failed unit, capped for readability.
void log_failures(std::ostream& log, const std::vector<std::string>& failures);

}  // namespace sqlprobe::detail

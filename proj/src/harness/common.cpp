#include "common.hpp"

#include "sqlprobe/sql/parser.hpp"
#include "sqlprobe/util.hpp"

#include <regex>

namespace sqlprobe::detail {

using nlohmann::json;
using nlohmann::ordered_json;

const DatabaseSchema& Workspace::schema_for(const DatasetExample& example) const
{
  auto it = schemas.find(example.db_id);
  if (it == schemas.end()) throw DatasetError("no schema for db_id '" + example.db_id + "'");
  return it->second;
}

Workspace load_workspace(const RunConfig& config, bool sample)
{
  const auto& d = config.dataset;
  if (!std::filesystem::is_regular_file(d.examples))
    throw DatasetError("examples file not found: " + d.examples.string());
  if (d.tables.empty() || !std::filesystem::is_regular_file(d.tables))
    throw DatasetError("tables file not found: " + d.tables.string());

  Workspace ws;
  ws.examples = load_examples(d.examples, d.format);
  std::optional<std::filesystem::path> db_root;
  if (!d.db_root.empty()) db_root = d.db_root;
  ws.schemas = load_schemas(d.tables, db_root);
  if (sample && config.sample_n > 0 && config.sample_n < ws.examples.size())
    ws.examples = sample_examples(ws.examples, config.sample_n, config.seed);
  return ws;
}

Providers make_providers(const RunConfig& config)
{
  Providers p;
  p.generation = make_provider(config.provider);
  p.embedding = config.embedding_provider_name == config.provider_name ? p.generation
                                                                       : make_provider(config.embedding_provider);
  return p;
}

std::filesystem::path output_path(const RunConfig& config, const std::filesystem::path& name)
{
  return config.output_dir / name;
}

void write_json(const std::filesystem::path& path, const ordered_json& j)
{
  write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<json> read_jsonl(const std::filesystem::path& path)
{
  std::vector<json> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, ParaphraseSet> load_paraphrases(const RunConfig& config)
{
  const auto path = output_path(config, stage_files::paraphrases);
  if (!std::filesystem::is_regular_file(path))
    throw std::runtime_error("paraphrase output missing: run `sqlprobe paraphrase` first (" +
                             std::string(stage_files::paraphrases) + ")");
  std::map<std::string, ParaphraseSet> out;
  for (const auto& j : read_jsonl(path)) {
    auto set = apply_threshold(paraphrase_set_from_json(j), config.threshold);
    out.insert_or_assign(set.example_id, std::move(set));
  }
  return out;
}

ordered_json interval_json(const Interval& interval)
{
  return ordered_json::array({interval.lo, interval.hi});
}

ordered_json accuracy_json(const AccuracyReport& report)
{
  ordered_json j;
  j["n"] = report.n;
  j["accuracy"] = report.accuracy;
  j["ci95"] = interval_json(report.ci95);
  return j;
}

bool top_level_order_by(std::string_view sql_text, sql::Dialect dialect)
{
  try {
    return !sql::parse_sql(sql_text, dialect).order_by.empty();
  } catch (const std::exception&) {
    static const std::regex order_re(R"(\border\s+by\b)", std::regex::icase);
    const std::string text(sql_text);
    return std::regex_search(text, order_re);
  }
}

std::optional<std::string> custom_nl2sql_template(const RunConfig& config)
{
  if (config.nl2sql_template.empty()) return std::nullopt;
  auto text = read_file(config.nl2sql_template);
  if (text.ends_with('\n')) text.pop_back();
  return text;
}

std::vector<Nl2SqlAnswer> ask_nl2sql(Provider& provider, const RunConfig& config, const DatabaseSchema& schema,
                                     std::string_view question, double temperature, int n_samples,
                                     const std::optional<std::string>& custom_template)
{
  GenerationRequest request;
  request.prompt = custom_template ? render_nl2sql_prompt(schema, question, config.dialect, *custom_template)
                                   : render_nl2sql_prompt(schema, question, config.dialect);
  request.temperature = temperature;
  request.max_tokens = config.max_tokens;
  request.n_samples = n_samples;
  std::vector<Nl2SqlAnswer> out;
  for (auto& raw : provider.generate(request)) {
    auto sql = extract_sql(raw);
    out.push_back({std::move(raw), std::move(sql)});
  }
  return out;
}

MatchOutcome match_against_gold(const RunConfig& config, const DatabaseSchema& schema, std::string_view gold_sql,
                                std::string_view predicted_sql)
{
  const std::chrono::duration<double> timeout(config.execution_timeout);
  const auto gold = execute(schema.db_file, gold_sql, timeout);
  if (gold.status != ExecutionStatus::ok) return {false, MatchReason::gold_error};
  const auto pred = execute(schema.db_file, predicted_sql, timeout);
  return execution_match(gold, pred, top_level_order_by(gold_sql, config.dialect));
}

void log_failures(std::ostream& log, const std::vector<std::string>& failures)
{
  if (failures.empty()) return;
  log << failures.size() << " unit(s) failed:\n";
  constexpr std::size_t shown = 20;
  for (std::size_t i = 0; i < failures.size() && i < shown; ++i) log << "  " << failures[i] << "\n";
  if (failures.size() > shown) log << "  ... " << failures.size() - shown << " more\n";
}

}  // namespace sqlprobe::detail

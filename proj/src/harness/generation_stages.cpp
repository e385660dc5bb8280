#include "common.hpp"

#include "sqlprobe/util.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace sqlprobe {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace detail;

namespace {

std::string fixed2(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int run_stats(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config, false);
  StructureOptions options;
  options.joins = config.joins;
  options.dialect = config.dialect;
  const auto stats = compute_dataset_stats(ws.examples, ws.schemas, options);

  ordered_json j;
  j["dataset"] = config.dataset.name;
  j["format"] = std::string(to_string(config.dataset.format));
  j["join_counting"] = config.joins == JoinCounting::all ? "all" : "explicit";
  j["n_queries"] = stats.n_queries;
  j["n_dbs"] = stats.n_dbs;
  j["tables_per_db"] = stats.tables_per_db;
  j["cols_per_table"] = stats.cols_per_table;
  j["joins_per_query"] = stats.joins_per_query;
  j["aggs_per_query"] = stats.aggs_per_query;
  j["nest_depth_per_query"] = stats.nest_depth_per_query;
  j["n_parse_failures"] = stats.n_parse_failures;
  j["failed_example_ids"] = stats.failed_example_ids;
  write_json(output_path(config, stage_files::stats_json), j);

  std::ostringstream table;
  table << "dataset  queries  dbs  tables/db  cols/table  joins/query  agg/query  nest depth\n";
  table << config.dataset.name << "  " << stats.n_queries << "  " << stats.n_dbs << "  "
        << fixed2(stats.tables_per_db) << "  " << fixed2(stats.cols_per_table) << "  "
        << fixed2(stats.joins_per_query) << "  " << fixed2(stats.aggs_per_query) << "  "
        << fixed2(stats.nest_depth_per_query) << "\n";
  if (stats.n_parse_failures > 0)
    table << "(" << stats.n_parse_failures << " queries could not be parsed and are excluded)\n";
  write_file_atomic(output_path(config, stage_files::stats_text), table.str());
  log << table.str();
  return exit_code::success;
}

int run_paraphrase(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config);
  const auto providers = make_providers(config);
  JsonlAppender out(output_path(config, stage_files::paraphrases),
                    [](const json& j) { return j.at("example_id").get<std::string>(); });

  std::vector<const DatasetExample*> todo;
  for (const auto& ex : ws.examples)
    if (!out.contains(ex.id)) todo.push_back(&ex);
  log << "paraphrase: " << ws.examples.size() - todo.size() << " done, " << todo.size() << " to go\n";

  ParaphraseOptions options;
  options.m = config.m;
  options.temperature = config.paraphrase_temperature;
  options.max_tokens = config.max_tokens;

  std::vector<std::string> failures;
  std::size_t partial = 0, retried = 0;
  std::mutex stats_mutex;
  run_ordered(
      todo.size(), config.parallelism,
      [&](std::size_t i) -> UnitResult {
        const auto& ex = *todo[i];
        auto set = generate_paraphrases(*providers.generation, ex, ws.schema_for(ex), options);
        set = validate_paraphrases(std::move(set), ex.question, *providers.embedding, config.threshold);
        {
          std::lock_guard lock(stats_mutex);
          partial += set.partial ? 1 : 0;
          retried += static_cast<std::size_t>(set.retries);
        }
        return {to_json(set).dump(), {}};
      },
      [&](std::size_t i, UnitResult& r) {
        if (!r.error.empty()) {
          failures.push_back(todo[i]->id + ": " + r.error);
          return;
        }
        out.append(r.line);
      });

  log << "paraphrase: " << todo.size() - failures.size() << " written, " << retried << " retried, " << partial
      << " partial, " << providers.generation->backend_calls() << " generation calls, "
      << providers.generation->cache_hits() << " cache hits\n";
  log_failures(log, failures);
  if (!failures.empty()) return failures.size() == todo.size() ? exit_code::fatal : exit_code::partial;
  return exit_code::success;
}

int run_predict(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config);
  const auto providers = make_providers(config);
  const auto custom_template = custom_nl2sql_template(config);

  struct Unit {
    const DatasetExample* example;
    int variant_index;
    std::string question;
  };
  std::vector<Unit> units;
  std::map<std::string, ParaphraseSet> paraphrases;
  const bool want_paraphrases = config.questions != QuestionMode::originals;
  if (want_paraphrases) paraphrases = load_paraphrases(config);
  for (const auto& ex : ws.examples) {
    if (config.questions != QuestionMode::paraphrases) units.push_back({&ex, -1, ex.question});
    if (!want_paraphrases) continue;
    auto it = paraphrases.find(ex.id);
    if (it == paraphrases.end()) {
      log << "predict: no paraphrases for " << ex.id << ", skipping its variants\n";
      continue;
    }
    for (std::size_t v = 0; v < it->second.variants.size(); ++v)
      units.push_back({&ex, static_cast<int>(v), it->second.variants[v].text});
  }

  JsonlAppender out(output_path(config, stage_files::predictions), [](const json& j) {
    return unit_key(j.at("example_id").get<std::string>(), j.at("variant_index").get<int>());
  });
  std::vector<const Unit*> todo;
  for (const auto& u : units)
    if (!out.contains(unit_key(u.example->id, u.variant_index))) todo.push_back(&u);
  log << "predict: " << units.size() - todo.size() << " done, " << todo.size() << " to go\n";

  std::vector<std::string> failures;
  std::size_t empty_predictions = 0;
  run_ordered(
      todo.size(), config.parallelism,
      [&](std::size_t i) -> UnitResult {
        const auto& u = *todo[i];
        const auto answers = ask_nl2sql(*providers.generation, config, ws.schema_for(*u.example), u.question,
                                        config.predict_temperature, 1, custom_template);
        ordered_json j;
        j["example_id"] = u.example->id;
        j["variant_index"] = u.variant_index;
        j["question"] = u.question;
        j["raw_output"] = answers.at(0).raw_output;
        j["predicted_sql"] = answers.at(0).sql;
        j["extraction_failed"] = answers.at(0).sql.empty();
        return {j.dump(), {}};
      },
      [&](std::size_t i, UnitResult& r) {
        if (!r.error.empty()) {
          failures.push_back(unit_key(todo[i]->example->id, todo[i]->variant_index) + ": " + r.error);
          return;
        }
        if (json::parse(r.line).at("extraction_failed").get<bool>()) ++empty_predictions;
        out.append(r.line);
      });

  log << "predict: " << todo.size() - failures.size() << " written, " << empty_predictions
      << " empty predictions, " << providers.generation->backend_calls() << " generation calls, "
      << providers.generation->cache_hits() << " cache hits\n";
  log_failures(log, failures);
  if (!failures.empty()) return failures.size() == todo.size() ? exit_code::fatal : exit_code::partial;
  return exit_code::success;
}

}  // namespace sqlprobe

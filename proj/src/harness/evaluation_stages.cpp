#include "common.hpp"

#include "sqlprobe/records.hpp"
#include "sqlprobe/util.hpp"

#include <algorithm>
#include <array>
#include <ostream>

namespace sqlprobe {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace detail;

namespace {

struct Prediction {
  std::size_t example_pos = 0;
  int variant_index = -1;
  std::string question;
  std::string predicted_sql;
};

EvaluationRecord build_record(const RunConfig& config, const DatasetExample& ex, const DatabaseSchema* schema,
                              const ExecutionResult* gold, const Prediction& p, bool variant_valid)
{
  EvaluationRecord r;
  r.example_id = ex.id;
  r.variant_index = p.variant_index;
  r.dataset = config.dataset.name;
  r.question_text = p.question;
  r.variant_valid = variant_valid;
  r.predicted_sql = p.predicted_sql;
  r.gold_sql = ex.gold_sql;

  StructureOptions options;
  options.joins = config.joins;
  options.dialect = config.dialect;
  try {
    r.structure = analyze_structure(ex.gold_sql, options);
  } catch (const std::exception&) {
    r.gold_parsed = false;
  }
  if (schema) {
    try {
      r.gold_elements = extract_schema_elements(ex.gold_sql, *schema, config.dialect);
    } catch (const std::exception&) {
      r.gold_parsed = false;
    }
    try {
      if (trim(p.predicted_sql).empty()) throw std::invalid_argument("empty prediction");
      r.pred_elements = extract_schema_elements(p.predicted_sql, *schema, config.dialect);
    } catch (const std::exception&) {
      r.pred_parsed = false;
    }
  } else {
    r.pred_parsed = false;
  }
  r.error_counts = diff_schema_elements(r.pred_elements, r.gold_elements);

  if (!schema || !gold || gold->status != ExecutionStatus::ok) {
    r.outcome = {false, MatchReason::gold_error};
  } else {
    const std::chrono::duration<double> timeout(config.execution_timeout);
    const auto pred = execute(schema->db_file, p.predicted_sql, timeout);
    r.outcome = execution_match(*gold, pred, top_level_order_by(ex.gold_sql, config.dialect));
  }
  return r;
}

constexpr std::array<std::pair<const char*, int SchemaErrorCounts::*>, 4> error_categories = {{
    {"missing_columns", &SchemaErrorCounts::missing_columns},
    {"extra_columns", &SchemaErrorCounts::extra_columns},
    {"missing_tables", &SchemaErrorCounts::missing_tables},
    {"extra_tables", &SchemaErrorCounts::extra_tables},
}};

ordered_json ner_json(const std::vector<EvaluationRecord>& records)
{
  const auto group_mean = [&](bool match, const auto& count) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (r.outcome.reason == MatchReason::gold_error || r.outcome.match != match) continue;
      sum += count(r);
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  };
  std::size_t n_true = 0, n_false = 0;
  for (const auto& r : records) {
    if (r.outcome.reason == MatchReason::gold_error) continue;
    (r.outcome.match ? n_true : n_false) += 1;
  }

  ordered_json j;
  j["n_true"] = n_true;
  j["n_false"] = n_false;
  ordered_json per_category;
  double ner_sum = 0.0;
  for (const auto& [name, member] : error_categories) {
    const auto count = [member](const EvaluationRecord& r) { return static_cast<double>(r.error_counts.*member); };
    const double e_true = group_mean(true, count);
    const double e_false = group_mean(false, count);
    const double ner = normalized_error_rate(e_false, e_true);
    per_category[name] = {{"e_true", e_true}, {"e_false", e_false}, {"ner", ner}};
    ner_sum += ner;
  }
  j["per_category"] = per_category;
  j["category_mean"] = ner_sum / static_cast<double>(error_categories.size());
  const auto total = [](const EvaluationRecord& r) { return static_cast<double>(r.error_counts.total()); };
  const double e_true = group_mean(true, total);
  const double e_false = group_mean(false, total);
  j["pooled"] = {{"e_true", e_true}, {"e_false", e_false}, {"ner", normalized_error_rate(e_false, e_true)}};
  return j;
}

std::optional<AccuracyReport> maybe_accuracy(const std::vector<EvaluationRecord>& records,
                                             const BootstrapOptions& bootstrap)
{
  std::vector<MatchOutcome> outcomes;
  for (const auto& r : records)
    if (r.outcome.reason != MatchReason::gold_error) outcomes.push_back(r.outcome);
  if (outcomes.empty()) return std::nullopt;
  return accuracy(outcomes, bootstrap);
}

ordered_json group_json(const std::vector<EvaluationRecord>& records, const BootstrapOptions& bootstrap)
{
  ordered_json j;
  j["n_records"] = records.size();
  const auto acc = maybe_accuracy(records, bootstrap);
  j["accuracy"] = acc ? accuracy_json(*acc) : ordered_json(nullptr);
  ordered_json reasons;
  for (auto reason : {MatchReason::exact, MatchReason::reordered_equal, MatchReason::mismatch,
                      MatchReason::pred_error, MatchReason::gold_error, MatchReason::timeout}) {
    reasons[std::string(to_string(reason))] = std::count_if(
        records.begin(), records.end(), [reason](const EvaluationRecord& r) { return r.outcome.reason == reason; });
  }
  j["reasons"] = reasons;
  ordered_json buckets;
  for (auto key : all_bucket_keys) {
    auto rows = ordered_json::array();
    for (const auto& b : bucket_by(records, key, bootstrap)) {
      ordered_json row;
      row["bucket"] = b.label;
      row["n"] = b.report.n;
      row["accuracy"] = b.report.accuracy;
      row["ci95"] = interval_json(b.report.ci95);
      rows.push_back(std::move(row));
    }
    buckets[std::string(to_string(key))] = rows;
  }
  j["buckets"] = buckets;
  j["ner"] = ner_json(records);
  return j;
}

}  // namespace

int run_evaluate(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config);
  const auto predictions_path = output_path(config, stage_files::predictions);
  if (!std::filesystem::is_regular_file(predictions_path))
    throw std::runtime_error("prediction output missing: run `sqlprobe predict` first");

  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < ws.examples.size(); ++i) position.emplace(ws.examples[i].id, i);

  std::vector<Prediction> predictions;
  for (const auto& j : read_jsonl(predictions_path)) {
    auto it = position.find(j.at("example_id").get<std::string>());
    if (it == position.end()) continue;
    const int variant = j.at("variant_index").get<int>();
    const bool wanted = variant < 0 ? config.questions != QuestionMode::paraphrases
                                    : config.questions != QuestionMode::originals;
    if (!wanted) continue;
    predictions.push_back({it->second, variant, j.at("question").get<std::string>(),
                           j.at("predicted_sql").get<std::string>()});
  }
  std::sort(predictions.begin(), predictions.end(), [](const Prediction& a, const Prediction& b) {
    return std::tie(a.example_pos, a.variant_index) < std::tie(b.example_pos, b.variant_index);
  });
  if (predictions.empty()) throw std::runtime_error("no predictions for the selected examples");

  std::map<std::string, ParaphraseSet> paraphrases;
  const bool has_variants = std::any_of(predictions.begin(), predictions.end(),
                                        [](const Prediction& p) { return p.variant_index >= 0; });
  if (has_variants) paraphrases = load_paraphrases(config);

  // Gold results once per example.
  std::vector<std::size_t> needed;
  for (const auto& p : predictions)
    if (needed.empty() || needed.back() != p.example_pos) needed.push_back(p.example_pos);
  std::map<std::size_t, ExecutionResult> gold_results;
  const std::chrono::duration<double> timeout(config.execution_timeout);
  std::vector<ExecutionResult> gold_vec(needed.size());
  run_ordered(
      needed.size(), config.parallelism,
      [&](std::size_t i) -> UnitResult {
        const auto& ex = ws.examples[needed[i]];
        auto it = ws.schemas.find(ex.db_id);
        if (it != ws.schemas.end()) gold_vec[i] = execute(it->second.db_file, ex.gold_sql, timeout);
        else gold_vec[i] = {ExecutionStatus::sql_error, {}, {}, "no schema for db_id " + ex.db_id};
        return {};
      },
      [&](std::size_t i, UnitResult&) { gold_results.emplace(needed[i], std::move(gold_vec[i])); });

  std::vector<EvaluationRecord> records(predictions.size());
  std::vector<std::string> failures;
  run_ordered(
      predictions.size(), config.parallelism,
      [&](std::size_t i) -> UnitResult {
        const auto& p = predictions[i];
        const auto& ex = ws.examples[p.example_pos];
        auto schema_it = ws.schemas.find(ex.db_id);
        const DatabaseSchema* schema = schema_it == ws.schemas.end() ? nullptr : &schema_it->second;
        bool valid = true;
        if (p.variant_index >= 0) {
          auto set_it = paraphrases.find(ex.id);
          const auto v = static_cast<std::size_t>(p.variant_index);
          valid = set_it != paraphrases.end() && v < set_it->second.variants.size() &&
                  set_it->second.variants[v].valid;
        }
        records[i] = build_record(config, ex, schema, &gold_results.at(p.example_pos), p, valid);
        return {};
      },
      [&](std::size_t i, UnitResult& r) {
        if (!r.error.empty()) failures.push_back(unit_key(ws.examples[predictions[i].example_pos].id,
                                                          predictions[i].variant_index) + ": " + r.error);
      });
  if (!failures.empty()) {
    log_failures(log, failures);
    return exit_code::fatal;
  }

  std::string lines;
  for (const auto& r : records) lines += to_json(r).dump() + "\n";
  write_file_atomic(output_path(config, stage_files::evaluation), lines);

  std::vector<EvaluationRecord> originals, paraphrased, paraphrased_all;
  for (const auto& r : records) {
    if (r.is_original()) {
      originals.push_back(r);
    } else {
      paraphrased_all.push_back(r);
      if (r.variant_valid) paraphrased.push_back(r);
    }
  }

  ordered_json report;
  report["dataset"] = config.dataset.name;
  report["n_examples"] = needed.size();
  report["n_records"] = records.size();
  report["original"] = originals.empty() ? ordered_json(nullptr) : group_json(originals, config.bootstrap);
  report["paraphrased"] = paraphrased.empty() ? ordered_json(nullptr) : group_json(paraphrased, config.bootstrap);
  const auto all_acc = maybe_accuracy(paraphrased_all, config.bootstrap);
  report["paraphrased_all_variants"] = all_acc ? accuracy_json(*all_acc) : ordered_json(nullptr);

  const auto a_orig = maybe_accuracy(originals, config.bootstrap);
  const auto a_para = maybe_accuracy(paraphrased, config.bootstrap);
  report["degradation"] =
      a_orig && a_para ? ordered_json(degradation(a_orig->accuracy, a_para->accuracy)) : ordered_json(nullptr);

  std::vector<double> confidence;
  for (std::size_t pos : needed) {
    auto it = paraphrases.find(ws.examples[pos].id);
    if (it != paraphrases.end()) confidence.push_back(it->second.confidence_score);
  }
  if (!confidence.empty() && a_para) {
    double sum = 0.0;
    for (double c : confidence) sum += c;
    const double cs = sum / static_cast<double>(confidence.size());
    report["confidence_score_mean"] = cs;
    report["a_true"] = interval_json(adjusted_accuracy(a_para->accuracy, cs));
  } else {
    report["confidence_score_mean"] = nullptr;
    report["a_true"] = nullptr;
  }
  write_json(output_path(config, stage_files::evaluation_report), report);

  log << "evaluate: " << records.size() << " records";
  if (a_orig) log << ", A_orig " << format_double(a_orig->accuracy);
  if (a_para) log << ", A_para " << format_double(a_para->accuracy);
  log << "\n";
  return exit_code::success;
}

// ---------------------------------------------------------------------------

int run_passk(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config);
  const auto providers = make_providers(config);
  const auto custom_template = custom_nl2sql_template(config);
  const auto direction = config.passk_direction;
  const int n = config.n_replicas;

  JsonlAppender out(output_path(config, stage_files::passk_records(direction)),
                    [](const json& j) { return j.at("example_id").get<std::string>(); });
  std::vector<const DatasetExample*> todo;
  for (const auto& ex : ws.examples)
    if (!out.contains(ex.id)) todo.push_back(&ex);
  log << "passk " << to_string(direction) << ": " << ws.examples.size() - todo.size() << " done, " << todo.size()
      << " to go\n";

  const std::chrono::duration<double> timeout(config.execution_timeout);
  std::vector<std::string> failures;
  run_ordered(
      todo.size(), config.parallelism,
      [&](std::size_t i) -> UnitResult {
        const auto& ex = *todo[i];
        const auto& schema = ws.schema_for(ex);
        ordered_json j;
        j["example_id"] = ex.id;
        j["n"] = n;
        const auto gold = execute(schema.db_file, ex.gold_sql, timeout);
        if (gold.status != ExecutionStatus::ok) {
          j["gold_error"] = true;
          j["c"] = nullptr;
          return {j.dump(), {}};
        }
        const bool ordered = top_level_order_by(ex.gold_sql, config.dialect);
        const auto matches = [&](const std::string& sql) {
          return execution_match(gold, execute(schema.db_file, sql, timeout), ordered).match;
        };

        int c = 0;
        auto attempts = ordered_json::array();
        if (direction == PassKDirection::nl2sql) {
          const auto answers =
              ask_nl2sql(*providers.generation, config, schema, ex.question, config.passk_temperature, n,
                         custom_template);
          for (const auto& a : answers) {
            const bool ok = matches(a.sql);
            c += ok ? 1 : 0;
            attempts.push_back({{"predicted_sql", a.sql}, {"match", ok}});
          }
        } else {
          ParaphraseOptions options;
          options.m = n;
          options.temperature = config.passk_temperature;
          options.max_tokens = config.max_tokens;
          ParaphraseSet set;
          try {
            set = generate_paraphrases(*providers.generation, ex, schema, options);
          } catch (const ParaphraseError&) {
            set.example_id = ex.id;
          }
          if (config.filter_threshold && !set.variants.empty())
            set = validate_paraphrases(std::move(set), ex.question, *providers.embedding, *config.filter_threshold);
          for (const auto& v : set.variants) {
            const bool passed = !config.filter_threshold || v.valid;
            ordered_json a;
            a["question"] = v.text;
            a["passed_filter"] = passed;
            bool ok = false;
            if (passed) {
              const auto answers = ask_nl2sql(*providers.generation, config, schema, v.text,
                                              config.passk_temperature, 1, custom_template);
              ok = matches(answers.at(0).sql);
              a["predicted_sql"] = answers.at(0).sql;
            } else {
              a["predicted_sql"] = nullptr;
            }
            a["match"] = ok;
            c += ok ? 1 : 0;
            attempts.push_back(std::move(a));
          }
        }
        j["gold_error"] = false;
        j["c"] = c;
        j["attempts"] = attempts;
        return {j.dump(), {}};
      },
      [&](std::size_t i, UnitResult& r) {
        if (!r.error.empty()) {
          failures.push_back(todo[i]->id + ": " + r.error);
          return;
        }
        out.append(r.line);
      });

  // Summary over every sampled example with a record, in sample order.
  std::map<std::string, json> by_id;
  for (auto& j : read_jsonl(output_path(config, stage_files::passk_records(direction))))
    by_id.insert_or_assign(j.at("example_id").get<std::string>(), j);
  std::vector<PassAtKInput> inputs;
  std::size_t gold_errors = 0;
  for (const auto& ex : ws.examples) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) continue;
    if (it->second.at("gold_error").get<bool>()) {
      ++gold_errors;
      continue;
    }
    inputs.push_back({it->second.at("n").get<long long>(), it->second.at("c").get<long long>(), 0});
  }

  ordered_json summary;
  summary["direction"] = std::string(to_string(direction));
  summary["n_replicas"] = n;
  summary["temperature"] = config.passk_temperature;
  summary["filter_threshold"] = config.filter_threshold ? ordered_json(*config.filter_threshold) : ordered_json(nullptr);
  summary["n_examples"] = inputs.size();
  summary["n_gold_errors"] = gold_errors;
  auto table = ordered_json::array();
  for (int k : config.ks) {
    ordered_json row;
    row["k"] = k;
    if (inputs.empty()) {
      row["pass_at_k"] = nullptr;
    } else {
      double sum = 0.0;
      for (auto in : inputs) {
        in.k = k;
        sum += pass_at_k(in);
      }
      row["pass_at_k"] = sum / static_cast<double>(inputs.size());
    }
    table.push_back(std::move(row));
  }
  summary["pass_at_k"] = table;
  write_json(output_path(config, stage_files::passk_summary(direction)), summary);

  log << "passk " << to_string(direction) << ": " << inputs.size() << " examples scored, "
      << providers.generation->backend_calls() << " generation calls\n";
  log_failures(log, failures);
  if (!failures.empty()) return failures.size() == todo.size() ? exit_code::fatal : exit_code::partial;
  return exit_code::success;
}

}  // namespace sqlprobe

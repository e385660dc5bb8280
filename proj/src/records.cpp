#include "sqlprobe/records.hpp"

#include <algorithm>
#include <charconv>

namespace sqlprobe {

using nlohmann::ordered_json;

namespace {

ordered_json elements_json(const SchemaElementSet& e)
{
  ordered_json j;
  j["tables"] = e.tables;
  j["columns"] = e.columns;
  return j;
}

SchemaElementSet elements_from_json(const nlohmann::json& j)
{
  SchemaElementSet e;
  for (const auto& t : j.at("tables")) e.tables.insert(t.get<std::string>());
  for (const auto& c : j.at("columns")) e.columns.insert(c.get<std::string>());
  return e;
}

std::optional<long long> as_integer(const std::string& s)
{
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

ordered_json to_json(const EvaluationRecord& r)
{
  ordered_json j;
  j["example_id"] = r.example_id;
  j["variant_index"] = r.variant_index;
  j["dataset"] = r.dataset;
  j["question_text"] = r.question_text;
  j["variant_valid"] = r.variant_valid;
  j["predicted_sql"] = r.predicted_sql;
  j["gold_sql"] = r.gold_sql;
  j["outcome"] = {{"match", r.outcome.match}, {"reason", std::string(to_string(r.outcome.reason))}};
  j["structure"] = {{"join_count", r.structure.join_count},     {"nest_depth", r.structure.nest_depth},
                    {"agg_count", r.structure.agg_count},       {"has_group_by", r.structure.has_group_by},
                    {"has_order_by", r.structure.has_order_by}, {"has_having", r.structure.has_having},
                    {"has_nested", r.structure.has_nested}};
  j["gold_parsed"] = r.gold_parsed;
  j["pred_parsed"] = r.pred_parsed;
  j["pred_elements"] = elements_json(r.pred_elements);
  j["gold_elements"] = elements_json(r.gold_elements);
  j["error_counts"] = {{"missing_columns", r.error_counts.missing_columns},
                       {"extra_columns", r.error_counts.extra_columns},
                       {"missing_tables", r.error_counts.missing_tables},
                       {"extra_tables", r.error_counts.extra_tables}};
  return j;
}

EvaluationRecord evaluation_record_from_json(const nlohmann::json& j)
{
  EvaluationRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.variant_index = j.at("variant_index").get<int>();
  r.dataset = j.value("dataset", "");
  r.question_text = j.at("question_text").get<std::string>();
  r.variant_valid = j.value("variant_valid", true);
  r.predicted_sql = j.at("predicted_sql").get<std::string>();
  r.gold_sql = j.at("gold_sql").get<std::string>();
  r.outcome.match = j.at("outcome").at("match").get<bool>();
  r.outcome.reason = parse_match_reason(j.at("outcome").at("reason").get<std::string>());
  const auto& s = j.at("structure");
  r.structure.join_count = s.at("join_count").get<int>();
  r.structure.nest_depth = s.at("nest_depth").get<int>();
  r.structure.agg_count = s.at("agg_count").get<int>();
  r.structure.has_group_by = s.at("has_group_by").get<bool>();
  r.structure.has_order_by = s.at("has_order_by").get<bool>();
  r.structure.has_having = s.at("has_having").get<bool>();
  r.structure.has_nested = s.at("has_nested").get<bool>();
  r.gold_parsed = j.value("gold_parsed", true);
  r.pred_parsed = j.value("pred_parsed", true);
  r.pred_elements = elements_from_json(j.at("pred_elements"));
  r.gold_elements = elements_from_json(j.at("gold_elements"));
  const auto& e = j.at("error_counts");
  r.error_counts.missing_columns = e.at("missing_columns").get<int>();
  r.error_counts.extra_columns = e.at("extra_columns").get<int>();
  r.error_counts.missing_tables = e.at("missing_tables").get<int>();
  r.error_counts.extra_tables = e.at("extra_tables").get<int>();
  return r;
}

BucketKey parse_bucket_key(std::string_view name)
{
  for (auto key : all_bucket_keys)
    if (to_string(key) == name) return key;
  throw std::invalid_argument("unknown bucket key '" + std::string(name) + "'");
}

std::string_view to_string(BucketKey key)
{
  switch (key) {
    case BucketKey::join_count: return "join_count";
    case BucketKey::has_group_by: return "has_group_by";
    case BucketKey::has_order_by: return "has_order_by";
    case BucketKey::has_having: return "has_having";
    case BucketKey::has_nested: return "has_nested";
    case BucketKey::dataset: return "dataset";
  }
  return "unknown";
}

std::string bucket_label(const EvaluationRecord& r, BucketKey key)
{
  const auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  switch (key) {
    case BucketKey::join_count: return std::to_string(r.structure.join_count);
    case BucketKey::has_group_by: return flag(r.structure.has_group_by);
    case BucketKey::has_order_by: return flag(r.structure.has_order_by);
    case BucketKey::has_having: return flag(r.structure.has_having);
    case BucketKey::has_nested: return flag(r.structure.has_nested);
    case BucketKey::dataset: return r.dataset;
  }
  return {};
}

std::vector<Bucket> bucket_by(std::span<const EvaluationRecord> records, BucketKey key,
                              const BootstrapOptions& bootstrap)
{
  std::map<std::string, std::vector<MatchOutcome>> groups;
  for (const auto& r : records) groups[bucket_label(r, key)].push_back(r.outcome);

  std::vector<Bucket> out;
  for (const auto& [label, outcomes] : groups) {
    const bool any_retained = std::any_of(outcomes.begin(), outcomes.end(),
                                          [](const MatchOutcome& o) { return o.reason != MatchReason::gold_error; });
    if (!any_retained) continue;
    out.push_back({label, accuracy(outcomes, bootstrap)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Bucket& a, const Bucket& b) {
    const auto ia = as_integer(a.label);
    const auto ib = as_integer(b.label);
    if (ia && ib) return *ia < *ib;
    if (ia.has_value() != ib.has_value()) return ia.has_value();
    return a.label < b.label;
  });
  return out;
}

}  // namespace sqlprobe

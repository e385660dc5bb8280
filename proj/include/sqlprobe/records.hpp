#pragma once

#include "sqlprobe/execution.hpp"
#include "sqlprobe/metrics.hpp"
#include "sqlprobe/sql/analysis.hpp"

#include <json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace sqlprobe {

struct EvaluationRecord {
  std::string example_id;
  int variant_index = -1;  // -1 is the original question
  std::string dataset;
  std::string question_text;
  bool variant_valid = true;
  std::string predicted_sql;
  std::string gold_sql;
  MatchOutcome outcome;
  QueryStructure structure;  // of gold_sql
  bool gold_parsed = true;
  bool pred_parsed = true;
  SchemaElementSet pred_elements;
  SchemaElementSet gold_elements;
  SchemaErrorCounts error_counts;

  bool is_original() const { return variant_index < 0; }
};

nlohmann::ordered_json to_json(const EvaluationRecord& record);
EvaluationRecord evaluation_record_from_json(const nlohmann::json& j);

enum class BucketKey { join_count, has_group_by, has_order_by, has_having, has_nested, dataset };

BucketKey parse_bucket_key(std::string_view name);
std::string_view to_string(BucketKey key);
inline constexpr BucketKey all_bucket_keys[] = {BucketKey::join_count,   BucketKey::has_group_by,
                                                BucketKey::has_order_by, BucketKey::has_having,
                                                BucketKey::has_nested,   BucketKey::dataset};

/// Bucket label of a record: the join count as a number, "true"/"false", or the dataset name.
std::string bucket_label(const EvaluationRecord& record, BucketKey key);

struct Bucket {
  std::string label;
  AccuracyReport report;
};

/// Groups records by key and reports accuracy per group. Numeric labels sort
/// numerically, others lexically; groups with no retained outcome are omitted.
std::vector<Bucket> bucket_by(std::span<const EvaluationRecord> records, BucketKey key,
                              const BootstrapOptions& bootstrap = {});

}  // namespace sqlprobe

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlprobe {

enum class DatasetFormat { spider, bird, fiben };

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

struct DatasetExample {
  std::string id;
  std::string db_id;
  std::string question;
  std::string gold_sql;
};

struct ColumnDef {
  std::string name;
  std::string type;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;

  /// Case-insensitive lookup; nullptr when absent.
  const ColumnDef* find_column(std::string_view column) const;
};

struct ColumnRef {
  std::string table;
  std::string column;

  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

struct DatabaseSchema {
  std::string db_id;
  std::vector<TableDef> tables;
  std::vector<ColumnRef> primary_keys;
  std::vector<std::pair<ColumnRef, ColumnRef>> foreign_keys;
  std::filesystem::path db_file;

  const TableDef* find_table(std::string_view table) const;

  /// Throws DatasetError when table names collide or a key names a missing column.
  void validate() const;
};

using SchemaMap = std::map<std::string, DatabaseSchema>;

struct DatasetStats {
  std::size_t n_queries = 0;
  std::size_t n_dbs = 0;
  double tables_per_db = 0.0;
  double cols_per_table = 0.0;
  double joins_per_query = 0.0;
  double aggs_per_query = 0.0;
  double nest_depth_per_query = 0.0;
  std::size_t n_parse_failures = 0;
  std::vector<std::string> failed_example_ids;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<DatasetExample> load_examples(const std::filesystem::path& path,
                                          DatasetFormat format);

/// Parses Spider-style tables.json. db_file is set to
/// <db_root>/<db_id>/<db_id>.sqlite when db_root is given.
SchemaMap load_schemas(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& db_root = std::nullopt);

struct StructureOptions;

DatasetStats compute_dataset_stats(const std::vector<DatasetExample>& examples,
                                   const SchemaMap& schemas,
                                   const StructureOptions& options);
DatasetStats compute_dataset_stats(const std::vector<DatasetExample>& examples,
                                   const SchemaMap& schemas);

/// Uniform sample without replacement (partial Fisher-Yates), deterministic per seed.
std::vector<DatasetExample> sample_examples(const std::vector<DatasetExample>& examples,
                                            std::size_t n, std::uint64_t seed);

}  // namespace sqlprobe

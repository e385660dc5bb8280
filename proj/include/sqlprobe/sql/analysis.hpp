#pragma once

#include "sqlprobe/dataset.hpp"
#include "sqlprobe/sql/parser.hpp"

#include <set>
#include <string>
#include <vector>

namespace sqlprobe {

enum class JoinCounting {
  explicit_only,  // JOIN keywords only
  all,            // JOIN keywords plus comma-separated FROM relations beyond the first
};

JoinCounting parse_join_counting(std::string_view name);

struct StructureOptions {
  JoinCounting joins = JoinCounting::all;
  sql::Dialect dialect = sql::Dialect::sqlite;
};

struct QueryStructure {
  int join_count = 0;
  int nest_depth = 1;
  int agg_count = 0;
  bool has_group_by = false;
  bool has_order_by = false;
  bool has_having = false;
  bool has_nested = false;

  friend bool operator==(const QueryStructure&, const QueryStructure&) = default;
};

struct ExtractionDiagnostics {
  /// Column references found in no in-scope table (written form, lowercased).
  std::vector<std::string> unresolved_columns;
  /// Unqualified references owned by more than one distinct in-scope table.
  std::vector<std::string> ambiguous_columns;
  /// FROM entries naming a table the schema does not have.
  std::vector<std::string> unknown_tables;

  std::size_t count() const
  {
    return unresolved_columns.size() + ambiguous_columns.size() + unknown_tables.size();
  }
};

/// Canonical (lowercase, alias-free) tables and `table.column` names a query touches.
struct SchemaElementSet {
  std::set<std::string> tables;
  std::set<std::string> columns;
  ExtractionDiagnostics diagnostics;

  bool same_elements(const SchemaElementSet& other) const
  {
    return tables == other.tables && columns == other.columns;
  }
};

struct SchemaErrorCounts {
  int missing_columns = 0;
  int extra_columns = 0;
  int missing_tables = 0;
  int extra_tables = 0;

  int total() const { return missing_columns + extra_columns + missing_tables + extra_tables; }
  friend bool operator==(const SchemaErrorCounts&, const SchemaErrorCounts&) = default;
};

QueryStructure analyze_structure(const sql::Query& query, JoinCounting joins = JoinCounting::all);
QueryStructure analyze_structure(std::string_view sql, const StructureOptions& options = {});

SchemaElementSet extract_schema_elements(const sql::Query& query, const DatabaseSchema& schema,
                                         sql::Dialect dialect = sql::Dialect::sqlite);
SchemaElementSet extract_schema_elements(std::string_view sql, const DatabaseSchema& schema,
                                         sql::Dialect dialect = sql::Dialect::sqlite);

SchemaErrorCounts diff_schema_elements(const SchemaElementSet& predicted,
                                       const SchemaElementSet& gold);

}  // namespace sqlprobe

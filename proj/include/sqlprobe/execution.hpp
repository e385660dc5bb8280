#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace sqlprobe {

struct Null {
  friend bool operator==(Null, Null) { return true; }
};
struct Blob {
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const Blob&, const Blob&) = default;
};

using Value = std::variant<Null, std::int64_t, double, std::string, Blob>;
using Row = std::vector<Value>;

enum class ExecutionStatus { ok, sql_error, timeout };

std::string_view to_string(ExecutionStatus status);

struct ExecutionResult {
  ExecutionStatus status = ExecutionStatus::ok;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::string error_message;
};

enum class MatchReason { exact, reordered_equal, mismatch, pred_error, gold_error, timeout };

std::string_view to_string(MatchReason reason);
MatchReason parse_match_reason(std::string_view text);

struct MatchOutcome {
  bool match = false;
  MatchReason reason = MatchReason::mismatch;
};

struct MatchOptions {
  double numeric_tolerance = 1e-6;
};

inline constexpr std::chrono::duration<double> default_execution_timeout{30.0};

/// Runs one read-only SELECT against a SQLite file. Errors are reported in the
/// result status and never thrown.
ExecutionResult execute(const std::filesystem::path& db_file, std::string_view sql,
                        std::chrono::duration<double> timeout = default_execution_timeout);

/// Compares two results. Column names are ignored; rows are compared in order
/// when the gold query has ORDER BY, otherwise as multisets.
MatchOutcome execution_match(const ExecutionResult& gold, const ExecutionResult& pred, bool gold_has_order_by,
                             const MatchOptions& options = {});

/// Tolerant value equality used by execution_match.
bool values_equal(const Value& a, const Value& b, double tolerance = 1e-6);

}  // namespace sqlprobe

#include "sqlprobe/execution.hpp"

#include "sqlprobe/util.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>

namespace sqlprobe {

std::string_view to_string(ExecutionStatus status)
{
  switch (status) {
    case ExecutionStatus::ok: return "ok";
    case ExecutionStatus::sql_error: return "sql_error";
    case ExecutionStatus::timeout: return "timeout";
  }
  return "unknown";
}

std::string_view to_string(MatchReason reason)
{
  switch (reason) {
    case MatchReason::exact: return "exact";
    case MatchReason::reordered_equal: return "reordered_equal";
    case MatchReason::mismatch: return "mismatch";
    case MatchReason::pred_error: return "pred_error";
    case MatchReason::gold_error: return "gold_error";
    case MatchReason::timeout: return "timeout";
  }
  return "unknown";
}

MatchReason parse_match_reason(std::string_view text)
{
  for (auto r : {MatchReason::exact, MatchReason::reordered_equal, MatchReason::mismatch, MatchReason::pred_error,
                 MatchReason::gold_error, MatchReason::timeout}) {
    if (to_string(r) == text) return r;
  }
  throw std::invalid_argument("unknown match reason: " + std::string(text));
}

namespace {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};

// Skips whitespace, comments and opening parentheses.
std::size_t skip_noise(std::string_view sql, std::size_t i, bool skip_parens)
{
  while (i < sql.size()) {
    const auto c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c) || (skip_parens && c == '(') || c == ';') {
      ++i;
    } else if (sql.compare(i, 2, "--") == 0) {
      while (i < sql.size() && sql[i] != '\n') ++i;
    } else if (sql.compare(i, 2, "/*") == 0) {
      const auto end = sql.find("*/", i + 2);
      i = end == std::string_view::npos ? sql.size() : end + 2;
    } else {
      break;
    }
  }
  return i;
}

bool is_query_statement(std::string_view sql)
{
  const auto i = skip_noise(sql, 0, true);
  const auto rest = sql.substr(i);
  return starts_with_icase(rest, "SELECT") || starts_with_icase(rest, "WITH");
}

ExecutionResult error_result(std::string message)
{
  ExecutionResult r;
  r.status = ExecutionStatus::sql_error;
  r.error_message = std::move(message);
  return r;
}

int type_rank(const Value& v)
{
  if (std::holds_alternative<Null>(v)) return 0;
  if (std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v)) return 1;
  if (std::holds_alternative<std::string>(v)) return 2;
  return 3;
}

double as_double(const Value& v)
{
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

// Total order consistent with values_equal for sorting multisets.
int compare_values(const Value& a, const Value& b)
{
  const int ra = type_rank(a);
  const int rb = type_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0:
      return 0;
    case 1: {
      if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
        const auto x = std::get<std::int64_t>(a);
        const auto y = std::get<std::int64_t>(b);
        return x < y ? -1 : (x > y ? 1 : 0);
      }
      const double x = as_double(a);
      const double y = as_double(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case 2: {
      const auto x = trim_right(std::get<std::string>(a));
      const auto y = trim_right(std::get<std::string>(b));
      return x.compare(y) < 0 ? -1 : (x == y ? 0 : 1);
    }
    default: {
      const auto& x = std::get<Blob>(a).bytes;
      const auto& y = std::get<Blob>(b).bytes;
      if (x == y) return 0;
      return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end()) ? -1 : 1;
    }
  }
}

bool rows_less(const Row& a, const Row& b)
{
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int c = compare_values(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

bool rows_equal(const std::vector<Row>& a, const std::vector<Row>& b, double tolerance)
{
  if (a.size() != b.size()) return false;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != b[r].size()) return false;
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      if (!values_equal(a[r][c], b[r][c], tolerance)) return false;
    }
  }
  return true;
}

}  // namespace

bool values_equal(const Value& a, const Value& b, double tolerance)
{
  const int ra = type_rank(a);
  if (ra != type_rank(b)) return false;
  switch (ra) {
    case 0:
      return true;
    case 1:
      if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
        return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
      return std::fabs(as_double(a) - as_double(b)) <= tolerance;
    case 2:
      return trim_right(std::get<std::string>(a)) == trim_right(std::get<std::string>(b));
    default:
      return std::get<Blob>(a) == std::get<Blob>(b);
  }
}

ExecutionResult execute(const std::filesystem::path& db_file, std::string_view sql,
                        std::chrono::duration<double> timeout)
{
  std::error_code ec;
  if (!std::filesystem::is_regular_file(db_file, ec))
    return error_result("database file not found: " + db_file.string());
  if (!is_query_statement(sql)) return error_result("only SELECT statements are allowed");

  sqlite3* raw_db = nullptr;
  const int open_rc = sqlite3_open_v2(db_file.string().c_str(), &raw_db, SQLITE_OPEN_READONLY, nullptr);
  std::unique_ptr<sqlite3, DbCloser> db(raw_db);
  if (open_rc != SQLITE_OK)
    return error_result(std::string("cannot open database: ") + (db ? sqlite3_errmsg(db.get()) : "out of memory"));

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  bool timed_out = false;
  struct ProgressState {
    std::chrono::steady_clock::time_point deadline;
    bool* timed_out;
  } state{deadline, &timed_out};
  sqlite3_progress_handler(
      db.get(), 1000,
      [](void* p) -> int {
        auto* s = static_cast<ProgressState*>(p);
        if (std::chrono::steady_clock::now() < s->deadline) return 0;
        *s->timed_out = true;
        return 1;
      },
      &state);

  auto timeout_result = [] {
    ExecutionResult r;
    r.status = ExecutionStatus::timeout;
    r.error_message = "execution exceeded the deadline";
    return r;
  };

  const char* tail = nullptr;
  sqlite3_stmt* raw_stmt = nullptr;
  const int prep_rc =
      sqlite3_prepare_v2(db.get(), sql.data(), static_cast<int>(sql.size()), &raw_stmt, &tail);
  std::unique_ptr<sqlite3_stmt, StmtFinalizer> stmt(raw_stmt);
  if (timed_out) return timeout_result();
  if (prep_rc != SQLITE_OK) return error_result(sqlite3_errmsg(db.get()));
  if (!stmt) return error_result("empty statement");
  if (tail) {
    const std::string_view rest(tail, static_cast<std::size_t>(sql.data() + sql.size() - tail));
    if (skip_noise(rest, 0, false) < rest.size()) return error_result("multiple statements are not allowed");
  }
  if (!sqlite3_stmt_readonly(stmt.get())) return error_result("statement is not read-only");

  ExecutionResult result;
  const int ncols = sqlite3_column_count(stmt.get());
  for (int c = 0; c < ncols; ++c) {
    const char* name = sqlite3_column_name(stmt.get(), c);
    result.columns.emplace_back(name ? name : "");
  }

  while (true) {
    const int rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) {
      if (timed_out || rc == SQLITE_INTERRUPT) return timeout_result();
      return error_result(sqlite3_errmsg(db.get()));
    }
    Row row;
    row.reserve(static_cast<std::size_t>(ncols));
    for (int c = 0; c < ncols; ++c) {
      switch (sqlite3_column_type(stmt.get(), c)) {
        case SQLITE_INTEGER:
          row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt.get(), c)));
          break;
        case SQLITE_FLOAT:
          row.emplace_back(sqlite3_column_double(stmt.get(), c));
          break;
        case SQLITE_TEXT: {
          const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt.get(), c));
          row.emplace_back(std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt.get(), c))));
          break;
        }
        case SQLITE_BLOB: {
          const auto* data = static_cast<const std::uint8_t*>(sqlite3_column_blob(stmt.get(), c));
          Blob blob;
          blob.bytes.assign(data, data + sqlite3_column_bytes(stmt.get(), c));
          row.emplace_back(std::move(blob));
          break;
        }
        default:
          row.emplace_back(Null{});
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

MatchOutcome execution_match(const ExecutionResult& gold, const ExecutionResult& pred, bool gold_has_order_by,
                             const MatchOptions& options)
{
  if (gold.status != ExecutionStatus::ok) return {false, MatchReason::gold_error};
  if (pred.status == ExecutionStatus::timeout) return {false, MatchReason::timeout};
  if (pred.status != ExecutionStatus::ok) return {false, MatchReason::pred_error};
  if (gold.columns.size() != pred.columns.size() || gold.rows.size() != pred.rows.size())
    return {false, MatchReason::mismatch};

  if (rows_equal(gold.rows, pred.rows, options.numeric_tolerance)) return {true, MatchReason::exact};
  if (gold_has_order_by) return {false, MatchReason::mismatch};

  auto sorted_gold = gold.rows;
  auto sorted_pred = pred.rows;
  std::sort(sorted_gold.begin(), sorted_gold.end(), rows_less);
  std::sort(sorted_pred.begin(), sorted_pred.end(), rows_less);
  if (rows_equal(sorted_gold, sorted_pred, options.numeric_tolerance)) return {true, MatchReason::reordered_equal};
  return {false, MatchReason::mismatch};
}

}  // namespace sqlprobe

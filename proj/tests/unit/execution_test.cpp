#include "support.hpp"

#include "sqlprobe/execution.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>

namespace sqlprobe {
namespace {

using namespace std::chrono_literals;

std::filesystem::path exec_db()
{
  return testing::fixture("exec/exec.sqlite");
}

ExecutionResult rows_result(std::vector<Row> rows)
{
  ExecutionResult r;
  r.columns = {"c"};
  r.rows = std::move(rows);
  return r;
}

TEST(Execute, SelectOne)
{
  const auto r = execute(exec_db(), "SELECT 1");
  ASSERT_EQ(r.status, ExecutionStatus::ok);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0], (Row{std::int64_t{1}}));
}

TEST(Execute, MissingTableIsSqlError)
{
  const auto r = execute(exec_db(), "SELECT x FROM no_such_table");
  EXPECT_EQ(r.status, ExecutionStatus::sql_error);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_FALSE(r.error_message.empty());
}

TEST(Execute, CrossJoinTimesOut)
{
  const auto start = std::chrono::steady_clock::now();
  const auto r = execute(exec_db(), "SELECT count(*) FROM big AS a, big AS b, big AS c", 0.1s);
  EXPECT_EQ(r.status, ExecutionStatus::timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST(Execute, WritesAreRejected)
{
  for (const char* sql : {"DELETE FROM item", "UPDATE item SET qty = 0", "DROP TABLE item",
                          "INSERT INTO item VALUES (9, 'x', 1, 1, NULL)", "SELECT 1; DELETE FROM item"}) {
    EXPECT_EQ(execute(exec_db(), sql).status, ExecutionStatus::sql_error) << sql;
  }
  EXPECT_EQ(execute(exec_db(), "SELECT count(*) FROM item").rows[0], (Row{std::int64_t{5}}));
}

TEST(Execute, ValueTypesAndColumns)
{
  const auto r = execute(exec_db(), "SELECT id, label, price, note, x'00ff' AS b FROM item WHERE id = 1");
  ASSERT_EQ(r.status, ExecutionStatus::ok);
  EXPECT_EQ(r.columns, (std::vector<std::string>{"id", "label", "price", "note", "b"}));
  const auto& row = r.rows.at(0);
  EXPECT_TRUE(std::holds_alternative<std::int64_t>(row[0]));
  EXPECT_TRUE(std::holds_alternative<std::string>(row[1]));
  EXPECT_TRUE(std::holds_alternative<double>(row[2]));
  EXPECT_TRUE(std::holds_alternative<Null>(row[3]));
  EXPECT_EQ(std::get<Blob>(row[4]).bytes, (std::vector<std::uint8_t>{0x00, 0xff}));
}

TEST(Execute, MissingDatabaseIsSqlError)
{
  EXPECT_EQ(execute("/nonexistent/x.sqlite", "SELECT 1").status, ExecutionStatus::sql_error);
}

TEST(Match, IdenticalSingleRowIsExact)
{
  const auto a = rows_result({{std::int64_t{1}}});
  const auto m = execution_match(a, a, false);
  EXPECT_TRUE(m.match);
  EXPECT_EQ(m.reason, MatchReason::exact);
}

TEST(Match, ReorderedRowsWithoutOrderBy)
{
  const auto m = execution_match(rows_result({{std::int64_t{1}}, {std::int64_t{2}}}),
                                 rows_result({{std::int64_t{2}}, {std::int64_t{1}}}), false);
  EXPECT_TRUE(m.match);
  EXPECT_EQ(m.reason, MatchReason::reordered_equal);
}

TEST(Match, ReorderedRowsWithOrderBy)
{
  const auto m = execution_match(rows_result({{std::int64_t{1}}, {std::int64_t{2}}}),
                                 rows_result({{std::int64_t{2}}, {std::int64_t{1}}}), true);
  EXPECT_FALSE(m.match);
  EXPECT_EQ(m.reason, MatchReason::mismatch);
}

TEST(Match, ErrorStatuses)
{
  ExecutionResult bad;
  bad.status = ExecutionStatus::sql_error;
  ExecutionResult slow;
  slow.status = ExecutionStatus::timeout;
  const auto ok = rows_result({});
  EXPECT_EQ(execution_match(bad, ok, false).reason, MatchReason::gold_error);
  EXPECT_EQ(execution_match(slow, ok, false).reason, MatchReason::gold_error);
  EXPECT_EQ(execution_match(ok, bad, false).reason, MatchReason::pred_error);
  EXPECT_EQ(execution_match(ok, slow, false).reason, MatchReason::timeout);
  EXPECT_FALSE(execution_match(bad, bad, false).match);
}

TEST(Match, ReflexiveOnRealResults)
{
  for (const char* sql : {"SELECT * FROM item", "SELECT note FROM item", "SELECT price * 3 FROM item ORDER BY 1",
                          "SELECT qty, count(*) FROM item GROUP BY qty"}) {
    const auto r = execute(exec_db(), sql);
    ASSERT_EQ(r.status, ExecutionStatus::ok) << sql;
    const auto m = execution_match(r, r, true);
    EXPECT_TRUE(m.match) << sql;
    EXPECT_EQ(m.reason, MatchReason::exact) << sql;
  }
}

TEST(Match, PermutationInvariantWithoutOrderBy)
{
  const auto gold = execute(exec_db(), "SELECT id, label, price, qty, note FROM item");
  auto pred = gold;
  std::sort(pred.rows.begin(), pred.rows.end(), [](const Row& a, const Row& b) {
    return std::get<std::int64_t>(a[0]) > std::get<std::int64_t>(b[0]);
  });
  do {
    ASSERT_TRUE(execution_match(gold, pred, false).match);
  } while (std::next_permutation(pred.rows.begin(), pred.rows.end(), [](const Row& a, const Row& b) {
    return std::get<std::int64_t>(a[0]) < std::get<std::int64_t>(b[0]);
  }));
}

TEST(Match, DuplicatesAreSignificant)
{
  const auto m = execution_match(rows_result({{std::int64_t{1}}, {std::int64_t{1}}, {std::int64_t{2}}}),
                                 rows_result({{std::int64_t{1}}, {std::int64_t{2}}, {std::int64_t{2}}}), false);
  EXPECT_FALSE(m.match);
}

TEST(Values, Normalization)
{
  EXPECT_TRUE(values_equal(std::int64_t{7}, 7.0));
  EXPECT_TRUE(values_equal(0.1 + 0.2, 0.3));
  EXPECT_FALSE(values_equal(1.0, 1.001));
  EXPECT_TRUE(values_equal(Null{}, Null{}));
  EXPECT_FALSE(values_equal(Null{}, std::int64_t{0}));
  EXPECT_FALSE(values_equal(Null{}, std::string{}));
  EXPECT_TRUE(values_equal(std::string("a  "), std::string("a")));
  EXPECT_FALSE(values_equal(std::string(" a"), std::string("a")));
  EXPECT_FALSE(values_equal(std::string("7"), std::int64_t{7}));
  EXPECT_TRUE(values_equal(std::int64_t{9007199254740993}, std::int64_t{9007199254740993}));
  EXPECT_FALSE(values_equal(std::int64_t{9007199254740993}, std::int64_t{9007199254740992}));
}

TEST(Values, ReasonNamesRoundTrip)
{
  for (auto reason : {MatchReason::exact, MatchReason::reordered_equal, MatchReason::mismatch, MatchReason::pred_error,
                      MatchReason::gold_error, MatchReason::timeout}) {
    EXPECT_EQ(parse_match_reason(to_string(reason)), reason);
  }
  EXPECT_THROW(parse_match_reason("maybe"), std::invalid_argument);
}

}  // namespace
}  // namespace sqlprobe

#include "fixture_cases.hpp"

#include <gtest/gtest.h>

namespace sqlprobe {
namespace {

TEST(SchemaExtractionFixture, MatchesHandLabels)
{
  const auto results = testing::run_schema_extraction_cases();
  EXPECT_GE(results.size(), 30u);
  for (const auto& r : results) EXPECT_TRUE(r.ok) << r.name << "\n  " << r.detail;
}

TEST(ExecutionMatchFixture, MatchesHandLabels)
{
  const auto results = testing::run_execution_match_cases();
  EXPECT_GE(results.size(), 25u);
  for (const auto& r : results) EXPECT_TRUE(r.ok) << r.name << "\n  " << r.detail;
}

TEST(GrammarPairFixture, MatchesHandComputation)
{
  const auto results = testing::run_grammar_pair_cases();
  EXPECT_GE(results.size(), 10u);
  for (const auto& r : results) EXPECT_TRUE(r.ok) << r.name << "\n  " << r.detail;
}

}  // namespace
}  // namespace sqlprobe

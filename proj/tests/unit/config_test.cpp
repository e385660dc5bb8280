#include "support.hpp"

#include "sqlprobe/harness.hpp"
#include "sqlprobe/util.hpp"

#include <gtest/gtest.h>

namespace sqlprobe {
namespace {

using nlohmann::json;
using testing::TempDir;

json minimal()
{
  return json::parse(R"({"dataset": {"examples": "dev.json", "tables": "tables.json"}})");
}

bool throws_with(const std::function<void()>& f, const std::string& needle)
{
  try {
    f();
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

TEST(RunConfig, DefaultsAndRelativePaths)
{
  const auto c = run_config_from_json(minimal(), "/data/run");
  EXPECT_EQ(c.dataset.examples, std::filesystem::path("/data/run/dev.json"));
  EXPECT_EQ(c.dataset.tables, std::filesystem::path("/data/run/tables.json"));
  EXPECT_TRUE(c.dataset.db_root.empty());
  EXPECT_EQ(c.output_dir, std::filesystem::path("/data/run/out"));
  EXPECT_EQ(c.m, 10);
  EXPECT_EQ(c.threshold, 0.6);
  EXPECT_EQ(c.ks, (std::vector<int>{1, 2, 5, 10}));
  EXPECT_EQ(c.provider.kind, "mock");
  EXPECT_EQ(c.questions, QuestionMode::both);
  EXPECT_FALSE(c.filter_threshold);
  EXPECT_EQ(c.echo()["dataset"]["examples"], "dev.json");
  EXPECT_EQ(c.echo()["filter_threshold"], nullptr);
}

TEST(RunConfig, UnknownKeysRejected)
{
  auto j = minimal();
  j["thresold"] = 0.5;
  EXPECT_TRUE(throws_with([&] { run_config_from_json(j, "/"); }, "unknown config key \"thresold\""));
}

TEST(RunConfig, NamedDatasetsAndProviders)
{
  const auto j = json::parse(R"({
    "dataset": "b",
    "datasets": {"a": {"examples": "a.json"}, "b": {"format": "bird", "examples": "b.json"}},
    "provider": "remote",
    "providers": {"remote": {"kind": "http", "endpoint": "http://localhost:1/v1", "cache_dir": "cache"}}
  })");
  const auto c = run_config_from_json(j, "/r");
  EXPECT_EQ(c.dataset.name, "b");
  EXPECT_EQ(c.dataset.format, DatasetFormat::bird);
  EXPECT_EQ(c.provider.kind, "http");
  EXPECT_EQ(c.embedding_provider_name, "remote");

  RunOverrides o;
  o.dataset = "a";
  o.mock = true;
  const auto mocked = run_config_from_json(j, "/r", o);
  EXPECT_EQ(mocked.dataset.examples, std::filesystem::path("/r/a.json"));
  EXPECT_EQ(mocked.provider.kind, "mock");
  EXPECT_EQ(mocked.provider.cache_dir, std::filesystem::path("/r/cache"));

  o.dataset = "c";
  EXPECT_TRUE(throws_with([&] { run_config_from_json(j, "/r", o); }, "dataset 'c'"));
  RunOverrides p;
  p.provider = "other";
  EXPECT_TRUE(throws_with([&] { run_config_from_json(j, "/r", p); }, "provider 'other'"));
}

TEST(RunConfig, OverridesReplaceFileValues)
{
  auto j = minimal();
  j["m"] = 4;
  j["ks"] = {1, 2};
  RunOverrides o;
  o.m = 7;
  o.seed = 99;
  o.threshold = 0.7;
  o.filter_threshold = 0.5;
  o.joins = "explicit";
  o.subtree = "all-tokens";
  o.questions = "originals";
  o.direction = "sql2nl";
  o.replicas = 3;
  o.ks = std::vector<int>{1, 3};
  o.sample_n = 5;
  o.parallelism = 2;
  o.output_dir = "/elsewhere";
  const auto c = run_config_from_json(j, "/base", o);
  EXPECT_EQ(c.m, 7);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.threshold, 0.7);
  EXPECT_EQ(c.filter_threshold.value_or(0), 0.5);
  EXPECT_EQ(c.joins, JoinCounting::explicit_only);
  EXPECT_EQ(c.subtree, SubtreeMode::all_tokens);
  EXPECT_EQ(c.questions, QuestionMode::originals);
  EXPECT_EQ(c.passk_direction, PassKDirection::sql2nl);
  EXPECT_EQ(c.n_replicas, 3);
  EXPECT_EQ(c.ks, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.sample_n, 5u);
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_EQ(c.output_dir, std::filesystem::path("/elsewhere"));
}

TEST(RunConfig, Validation)
{
  const auto with = [](const char* key, json value) {
    auto j = minimal();
    j[key] = std::move(value);
    return [j] { run_config_from_json(j, "/"); };
  };
  EXPECT_TRUE(throws_with(with("m", 0), "m must be at least 1"));
  EXPECT_TRUE(throws_with(with("threshold", 1.5), "threshold"));
  EXPECT_TRUE(throws_with(with("ks", json::array({1, 11})), "every k"));
  EXPECT_TRUE(throws_with(with("ks", json::array()), "ks must not be empty"));
  EXPECT_TRUE(throws_with(with("predict_temperature", 3.0), "temperatures"));
  EXPECT_TRUE(throws_with(with("parallelism", 0), "parallelism"));
  EXPECT_TRUE(throws_with(with("execution_timeout", 0), "execution_timeout"));
  EXPECT_TRUE(throws_with(with("questions", "all"), "question mode"));
  EXPECT_TRUE(throws_with(with("bootstrap", json{{"level", 1.0}}), "bootstrap.level"));
  EXPECT_TRUE(throws_with([] { run_config_from_json(json::parse("{}"), "/"); }, "no dataset"));
  EXPECT_TRUE(throws_with([] { run_config_from_json(json::parse(R"({"dataset": {}})"), "/"); }, "examples"));
}

TEST(RunConfig, LoadResolvesAgainstConfigDirectory)
{
  TempDir dir;
  write_file_atomic(dir / "cfg.json", minimal().dump());
  const auto c = load_run_config(dir / "cfg.json");
  EXPECT_EQ(c.dataset.examples, std::filesystem::weakly_canonical(dir.path()) / "dev.json");
  write_file_atomic(dir / "bad.json", "{");
  EXPECT_TRUE(throws_with([&] { load_run_config(dir / "bad.json"); }, "not valid JSON"));
}

TEST(RunConfig, ShippedMiniConfigLoads)
{
  const auto c = load_run_config(testing::fixture("mini/config.json"));
  EXPECT_EQ(c.dataset.name, "mini");
  EXPECT_EQ(c.provider.model_id, "scripted-mock");
  EXPECT_EQ(c.provider.embedding_mode, "bag_of_words");
  EXPECT_EQ(c.bootstrap.seed, 11u);
  EXPECT_TRUE(std::filesystem::exists(c.dataset.examples));
}

}  // namespace
}  // namespace sqlprobe

#include "sqlprobe/harness.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>

namespace sqlprobe {

using nlohmann::json;
using nlohmann::ordered_json;

QuestionMode parse_question_mode(std::string_view name)
{
  if (name == "originals") return QuestionMode::originals;
  if (name == "paraphrases") return QuestionMode::paraphrases;
  if (name == "both") return QuestionMode::both;
  throw std::invalid_argument("unknown question mode '" + std::string(name) + "' (expected originals|paraphrases|both)");
}

std::string_view to_string(QuestionMode mode)
{
  switch (mode) {
    case QuestionMode::originals: return "originals";
    case QuestionMode::paraphrases: return "paraphrases";
    case QuestionMode::both: return "both";
  }
  return "both";
}

PassKDirection parse_passk_direction(std::string_view name)
{
  if (name == "nl2sql") return PassKDirection::nl2sql;
  if (name == "sql2nl") return PassKDirection::sql2nl;
  throw std::invalid_argument("unknown pass@k direction '" + std::string(name) + "' (expected nl2sql|sql2nl)");
}

std::string_view to_string(PassKDirection direction)
{
  return direction == PassKDirection::nl2sql ? "nl2sql" : "sql2nl";
}

namespace {

const std::vector<std::string> known_keys = {
    "dataset",          "datasets",          "provider",          "embedding_provider", "providers",
    "m",                "sample_n",          "seed",              "threshold",          "filter_threshold",
    "paraphrase_temperature", "predict_temperature", "passk_temperature", "max_tokens", "n_replicas",
    "ks",               "passk_direction",   "questions",         "execution_timeout",  "parallelism",
    "output_dir",       "joins",             "subtree",           "dialect",            "annotations",
    "nl2sql_template",  "bootstrap"};

DatasetConfig dataset_from_json(const std::string& name, const json& j, const std::filesystem::path& base)
{
  if (!j.is_object()) throw std::invalid_argument("dataset '" + name + "' must be an object");
  DatasetConfig d;
  d.name = j.value("name", name);
  d.format = parse_dataset_format(j.value("format", std::string("spider")));
  if (!j.contains("examples")) throw std::invalid_argument("dataset '" + name + "' lacks \"examples\"");
  d.examples = base / j.at("examples").get<std::string>();
  if (j.contains("tables")) d.tables = base / j.at("tables").get<std::string>();
  if (j.contains("db_root")) d.db_root = base / j.at("db_root").get<std::string>();
  return d;
}

ProviderConfig named_provider(const json& j, const std::string& name, const std::filesystem::path& base)
{
  if (j.contains("providers") && j.at("providers").contains(name))
    return provider_config_from_json(j.at("providers").at(name), base);
  if (name == "mock") return ProviderConfig{};
  throw std::invalid_argument("provider '" + name + "' is not defined under \"providers\"");
}

std::string config_relative(const std::filesystem::path& p, const std::filesystem::path& base)
{
  if (p.empty()) return {};
  return p.lexically_proximate(base).generic_string();
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir, const RunOverrides& o)
{
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
      throw std::invalid_argument("unknown config key \"" + key + "\"");
  }

  RunConfig c;
  c.base_dir = base_dir;

  std::string dataset_name = o.dataset.value_or("");
  if (dataset_name.empty() && j.contains("dataset") && j.at("dataset").is_string())
    dataset_name = j.at("dataset").get<std::string>();
  if (!dataset_name.empty()) {
    if (!j.contains("datasets") || !j.at("datasets").contains(dataset_name))
      throw std::invalid_argument("dataset '" + dataset_name + "' is not defined under \"datasets\"");
    c.dataset = dataset_from_json(dataset_name, j.at("datasets").at(dataset_name), base_dir);
  } else if (j.contains("dataset") && j.at("dataset").is_object()) {
    c.dataset = dataset_from_json("dataset", j.at("dataset"), base_dir);
  } else {
    throw std::invalid_argument("config names no dataset");
  }

  c.provider_name = o.provider.value_or(j.value("provider", std::string("mock")));
  c.embedding_provider_name = j.value("embedding_provider", c.provider_name);
  c.provider = named_provider(j, c.provider_name, base_dir);
  c.embedding_provider = named_provider(j, c.embedding_provider_name, base_dir);
  if (o.mock) {
    for (auto* p : {&c.provider, &c.embedding_provider}) {
      if (p->kind != "mock") {
        ProviderConfig mock;
        mock.cache_dir = p->cache_dir;
        *p = mock;
      }
    }
  }

  c.m = o.m.value_or(j.value("m", c.m));
  c.sample_n = o.sample_n.value_or(j.value("sample_n", c.sample_n));
  c.seed = o.seed.value_or(j.value("seed", c.seed));
  c.threshold = o.threshold.value_or(j.value("threshold", c.threshold));
  if (o.filter_threshold) {
    c.filter_threshold = o.filter_threshold;
  } else if (j.contains("filter_threshold") && !j.at("filter_threshold").is_null()) {
    c.filter_threshold = j.at("filter_threshold").get<double>();
  }
  c.paraphrase_temperature = j.value("paraphrase_temperature", c.paraphrase_temperature);
  c.predict_temperature = j.value("predict_temperature", c.predict_temperature);
  c.passk_temperature = j.value("passk_temperature", c.passk_temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.n_replicas = o.replicas.value_or(j.value("n_replicas", c.n_replicas));
  c.ks = o.ks.value_or(j.value("ks", c.ks));
  c.passk_direction = parse_passk_direction(o.direction.value_or(j.value("passk_direction", std::string("nl2sql"))));
  c.questions = parse_question_mode(o.questions.value_or(j.value("questions", std::string("both"))));
  c.execution_timeout = j.value("execution_timeout", c.execution_timeout);
  c.parallelism = o.parallelism.value_or(j.value("parallelism", c.parallelism));
  if (o.output_dir) {
    c.output_dir = *o.output_dir;
  } else {
    c.output_dir = base_dir / j.value("output_dir", std::string("out"));
  }
  c.joins = parse_join_counting(o.joins.value_or(j.value("joins", std::string("all"))));
  c.subtree = parse_subtree_mode(o.subtree.value_or(j.value("subtree", std::string("internal"))));
  c.dialect = sql::parse_dialect(j.value("dialect", std::string("sqlite")));
  if (j.contains("annotations") && !j.at("annotations").is_null())
    c.annotations = base_dir / j.at("annotations").get<std::string>();
  if (j.contains("nl2sql_template") && !j.at("nl2sql_template").is_null())
    c.nl2sql_template = base_dir / j.at("nl2sql_template").get<std::string>();
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    c.bootstrap.n_resamples = b.value("n_resamples", c.bootstrap.n_resamples);
    c.bootstrap.level = b.value("level", c.bootstrap.level);
    c.bootstrap.seed = b.value("seed", c.bootstrap.seed);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunOverrides& overrides)
{
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  const auto base = std::filesystem::weakly_canonical(std::filesystem::absolute(path)).parent_path();
  auto adjusted = overrides;
  if (adjusted.output_dir && adjusted.output_dir->is_relative())
    adjusted.output_dir = std::filesystem::absolute(*adjusted.output_dir);
  return run_config_from_json(j, base, adjusted);
}

void RunConfig::validate() const
{
  const auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (m < 1) fail("m must be at least 1");
  if (!(threshold >= -1.0 && threshold <= 1.0)) fail("threshold must lie in [-1,1]");
  if (filter_threshold && !(*filter_threshold >= -1.0 && *filter_threshold <= 1.0))
    fail("filter_threshold must lie in [-1,1]");
  for (double t : {paraphrase_temperature, predict_temperature, passk_temperature})
    if (!(t >= 0.0 && t <= 2.0)) fail("temperatures must lie in [0,2]");
  if (max_tokens < 1) fail("max_tokens must be positive");
  if (n_replicas < 1) fail("n_replicas must be at least 1");
  if (ks.empty()) fail("ks must not be empty");
  for (int k : ks)
    if (k < 1 || k > n_replicas) fail("every k must lie in [1, n_replicas]");
  if (!(execution_timeout > 0.0)) fail("execution_timeout must be positive");
  if (parallelism < 1) fail("parallelism must be at least 1");
  if (bootstrap.n_resamples == 0) fail("bootstrap.n_resamples must be positive");
  if (!(bootstrap.level > 0.0 && bootstrap.level < 1.0)) fail("bootstrap.level must lie in (0,1)");
  if (dataset.examples.empty()) fail("dataset.examples is required");
}

ordered_json RunConfig::echo() const
{
  ordered_json j;
  j["dataset"] = {{"name", dataset.name},
                  {"format", std::string(to_string(dataset.format))},
                  {"examples", config_relative(dataset.examples, base_dir)},
                  {"tables", config_relative(dataset.tables, base_dir)},
                  {"db_root", config_relative(dataset.db_root, base_dir)}};
  auto provider_json = to_json(provider);
  provider_json["name"] = provider_name;
  j["provider"] = provider_json;
  auto embedding_json = to_json(embedding_provider);
  embedding_json["name"] = embedding_provider_name;
  j["embedding_provider"] = embedding_json;
  j["m"] = m;
  j["sample_n"] = sample_n;
  j["seed"] = seed;
  j["threshold"] = threshold;
  j["filter_threshold"] = filter_threshold ? ordered_json(*filter_threshold) : ordered_json(nullptr);
  j["paraphrase_temperature"] = paraphrase_temperature;
  j["predict_temperature"] = predict_temperature;
  j["passk_temperature"] = passk_temperature;
  j["max_tokens"] = max_tokens;
  j["n_replicas"] = n_replicas;
  j["ks"] = ks;
  j["passk_direction"] = std::string(to_string(passk_direction));
  j["questions"] = std::string(to_string(questions));
  j["execution_timeout"] = execution_timeout;
  j["joins"] = joins == JoinCounting::all ? "all" : "explicit";
  j["subtree"] = std::string(to_string(subtree));
  j["dialect"] = dialect == sql::Dialect::sqlite ? "sqlite" : "ansi";
  j["annotations"] = annotations.empty() ? ordered_json(nullptr) : ordered_json(config_relative(annotations, base_dir));
  j["nl2sql_template"] =
      nl2sql_template.empty() ? ordered_json(nullptr) : ordered_json(config_relative(nl2sql_template, base_dir));
  j["bootstrap"] = {{"n_resamples", bootstrap.n_resamples}, {"level", bootstrap.level}, {"seed", bootstrap.seed}};
  return j;
}

}  // namespace sqlprobe

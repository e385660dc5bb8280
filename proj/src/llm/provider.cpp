#include "sqlprobe/llm.hpp"

#include "sqlprobe/util.hpp"

#include <cmath>
#include <fstream>
#include <regex>

namespace sqlprobe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json default_chat_template()
{
  return json{{"model", "{model}"},
              {"messages", json::array({json{{"role", "user"}, {"content", "{prompt}"}}})},
              {"temperature", "{temperature}"},
              {"max_tokens", "{max_tokens}"}};
}

json default_embedding_template()
{
  return json{{"model", "{model}"}, {"input", "{text}"}};
}

}  // namespace

void ProviderConfig::validate() const
{
  if (kind != "mock" && kind != "http") throw ProviderError(ProviderErrorKind::config, "unknown provider kind: " + kind);
  if (!(timeout > 0.0)) throw ProviderError(ProviderErrorKind::config, "provider timeout must be positive");
  if (max_retries < 0) throw ProviderError(ProviderErrorKind::config, "max_retries must be non-negative");
  if (backoff < 0.0) throw ProviderError(ProviderErrorKind::config, "backoff must be non-negative");
  if (kind == "http" && endpoint.empty() && embedding_endpoint.empty())
    throw ProviderError(ProviderErrorKind::config, "http provider needs an endpoint");
  if (embedding_mode != "digest" && embedding_mode != "bag_of_words")
    throw ProviderError(ProviderErrorKind::config, "unknown embedding mode: " + embedding_mode);
  if (dimension == 0) throw ProviderError(ProviderErrorKind::config, "embedding dimension must be positive");
}

ProviderConfig provider_config_from_json(const json& j, const std::filesystem::path& base_dir)
{
  ProviderConfig c;
  c.kind = j.value("kind", c.kind);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.embedding_endpoint = j.value("embedding_endpoint", c.embedding_endpoint);
  c.model_id = j.value("model_id", c.model_id);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout = j.value("timeout", c.timeout);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff = j.value("backoff", c.backoff);
  c.request_template = j.value("request_template", default_chat_template());
  c.embedding_request_template = j.value("embedding_request_template", default_embedding_template());
  c.response_path = j.value("response_path", c.response_path);
  c.embedding_response_path = j.value("embedding_response_path", c.embedding_response_path);
  if (j.contains("cache_dir") && !j.at("cache_dir").is_null())
    c.cache_dir = base_dir / j.at("cache_dir").get<std::string>();
  if (j.contains("script") && !j.at("script").is_null()) c.script = base_dir / j.at("script").get<std::string>();
  c.dimension = j.value("dimension", c.dimension);
  c.embedding_mode = j.value("embedding_mode", c.embedding_mode);
  c.validate();
  return c;
}

ordered_json to_json(const ProviderConfig& c)
{
  ordered_json j;
  j["kind"] = c.kind;
  j["model_id"] = c.model_id;
  if (c.kind == "http") {
    j["endpoint"] = c.endpoint;
    j["embedding_endpoint"] = c.embedding_endpoint;
    j["api_key_env"] = c.api_key_env;
    j["timeout"] = c.timeout;
    j["max_retries"] = c.max_retries;
    j["backoff"] = c.backoff;
  } else {
    j["dimension"] = c.dimension;
    j["embedding_mode"] = c.embedding_mode;
    j["scripted"] = !c.script.empty();
  }
  return j;
}

// ---------------------------------------------------------------------------

MockScript MockScript::load(const std::filesystem::path& path)
{
  try {
    return from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ProviderError(ProviderErrorKind::config, "malformed mock script " + path.string() + ": " + e.what());
  }
}

namespace {

std::vector<std::string> response_list(const json& v)
{
  if (v.is_string()) return {v.get<std::string>()};
  return v.get<std::vector<std::string>>();
}

}  // namespace

MockScript MockScript::from_json(const json& j)
{
  MockScript s;
  if (j.contains("responses")) {
    for (const auto& [digest, value] : j.at("responses").items()) s.by_digest[digest] = response_list(value);
  }
  if (j.contains("rules")) {
    for (const auto& rule : j.at("rules"))
      s.rules.push_back({rule.at("contains").get<std::string>(), response_list(rule.at("response"))});
  }
  if (j.contains("embeddings")) {
    for (const auto& [text, vec] : j.at("embeddings").items()) s.embeddings[text] = vec.get<std::vector<double>>();
  }
  return s;
}

json MockScript::to_json() const
{
  json j;
  j["responses"] = json::object();
  for (const auto& [digest, list] : by_digest) j["responses"][digest] = list;
  j["rules"] = json::array();
  for (const auto& rule : rules) j["rules"].push_back({{"contains", rule.contains}, {"response", rule.responses}});
  j["embeddings"] = json::object();
  for (const auto& [text, vec] : embeddings) j["embeddings"][text] = vec;
  return j;
}

MockBackend::MockBackend(std::size_t dimension, std::string embedding_mode, MockScript script)
    : dimension_(dimension), embedding_mode_(std::move(embedding_mode)), script_(std::move(script))
{
}

std::string MockBackend::complete(const GenerationRequest& request, int sample_index)
{
  const auto pick = [&](const std::vector<std::string>& list) {
    return list.at(static_cast<std::size_t>(sample_index) % list.size());
  };
  const auto digest = sha256_hex(request.prompt);
  if (auto it = script_.by_digest.find(digest); it != script_.by_digest.end() && !it->second.empty())
    return pick(it->second);
  for (const auto& rule : script_.rules) {
    if (!rule.responses.empty() && request.prompt.find(rule.contains) != std::string::npos) return pick(rule.responses);
  }

  const auto sample_digest =
      sample_index == 0 ? digest : sha256_hex(request.prompt + "#" + std::to_string(sample_index));
  // Paraphrase prompts get a well-formed numbered list.
  static const std::regex ask_re(R"(generate (\d+) distinct natural language questions)");
  std::smatch m;
  if (std::regex_search(request.prompt, m, ask_re)) {
    const int n = std::stoi(m[1].str());
    std::string out;
    for (int i = 1; i <= n; ++i) {
      out += std::to_string(i) + ". Mock question " + std::to_string(i) + " for request " +
             sample_digest.substr(0, 12) + "?\n";
    }
    return out;
  }
  return "mock-response " + sample_digest.substr(0, 16);
}

namespace {

std::vector<double> digest_vector(std::string_view text, std::size_t dimension)
{
  const auto digest = sha256_hex(text);
  Rng rng(std::stoull(digest.substr(0, 16), nullptr, 16));
  std::vector<double> v(dimension);
  for (auto& x : v) x = standard_normal(rng);
  return v;
}

void normalize(std::vector<double>& v)
{
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (auto& x : v) x /= norm;
}

std::vector<std::string> word_tokens(std::string_view text)
{
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

std::vector<double> MockBackend::embed(std::string_view text)
{
  if (auto it = script_.embeddings.find(std::string(text)); it != script_.embeddings.end()) return it->second;

  std::vector<double> v;
  if (embedding_mode_ == "bag_of_words") {
    const auto words = word_tokens(text);
    if (!words.empty()) {
      v.assign(dimension_, 0.0);
      for (const auto& w : words) {
        const auto wv = digest_vector("word:" + w, dimension_);
        for (std::size_t i = 0; i < dimension_; ++i) v[i] += wv[i];
      }
    }
  }
  if (v.empty()) v = digest_vector(text, dimension_);
  normalize(v);
  return v;
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const
{
  return dir_ / key.substr(0, 2) / (key + ".txt");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const
{
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  return read_file(path);
}

void ResponseCache::put(const std::string& key, std::string_view value)
{
  std::lock_guard lock(write_mutex_);
  write_file_atomic(path_for(key), value);
}

std::string canonical_request(const GenerationRequest& request, int sample_index)
{
  ordered_json j;
  j["model_id"] = request.model_id;
  j["prompt"] = request.prompt;
  j["temperature"] = request.temperature;
  j["n_samples"] = request.n_samples;
  j["sample_index"] = sample_index;
  return j.dump();
}

std::string cache_key(const GenerationRequest& request, int sample_index)
{
  return sha256_hex(canonical_request(request, sample_index));
}

std::string embedding_cache_key(std::string_view model_id, std::string_view text)
{
  ordered_json j;
  j["embedding_model_id"] = model_id;
  j["text"] = text;
  return sha256_hex(j.dump());
}

Provider::Provider(std::shared_ptr<Backend> backend, std::string model_id,
                   std::optional<std::filesystem::path> cache_dir)
    : backend_(std::move(backend)), model_id_(std::move(model_id))
{
  if (cache_dir && !cache_dir->empty()) cache_.emplace(*cache_dir);
}

std::vector<std::string> Provider::generate(const GenerationRequest& in)
{
  if (in.n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
  if (!std::isfinite(in.temperature) || in.temperature < 0.0 || in.temperature > 2.0)
    throw std::invalid_argument("temperature must lie in [0,2]");
  GenerationRequest request = in;
  if (request.model_id.empty()) request.model_id = model_id_;

  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(request.n_samples));
  for (int i = 0; i < request.n_samples; ++i) {
    const int sample_index = request.first_sample + i;
    const auto key = cache_ ? cache_key(request, sample_index) : std::string{};
    if (cache_) {
      if (auto hit = cache_->get(key)) {
        ++cache_hits_;
        out.push_back(std::move(*hit));
        continue;
      }
    }
    ++backend_calls_;
    auto text = backend_->complete(request, sample_index);
    if (cache_) cache_->put(key, text);
    out.push_back(std::move(text));
  }
  return out;
}

std::vector<double> Provider::embed(std::string_view text)
{
  if (trim(text).empty()) throw std::invalid_argument("cannot embed empty text");
  const auto key = cache_ ? embedding_cache_key(model_id_, text) : std::string{};
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      try {
        ++cache_hits_;
        return json::parse(*hit).get<std::vector<double>>();
      } catch (const json::exception&) {
        --cache_hits_;
      }
    }
  }
  ++backend_calls_;
  auto v = backend_->embed(text);
  if (v.empty()) throw ProviderError(ProviderErrorKind::malformed_response, "empty embedding");
  if (cache_) cache_->put(key, json(v).dump());
  return v;
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config)
{
  config.validate();
  std::shared_ptr<Backend> backend;
  if (config.kind == "http") {
    backend = std::make_shared<HttpBackend>(config);
  } else {
    backend = std::make_shared<MockBackend>(config.dimension, config.embedding_mode,
                                            config.script.empty() ? MockScript{} : MockScript::load(config.script));
  }
  std::optional<std::filesystem::path> cache;
  if (!config.cache_dir.empty()) cache = config.cache_dir;
  return std::make_shared<Provider>(std::move(backend), config.model_id, cache);
}

}  // namespace sqlprobe

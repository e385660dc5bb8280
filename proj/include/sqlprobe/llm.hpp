#pragma once

#include "sqlprobe/dataset.hpp"
#include "sqlprobe/sql/parser.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlprobe {

// ---------------------------------------------------------------------------
// Prompt templates

/// Raised when a template names a placeholder with no value.
class TemplateError : public std::runtime_error {
 public:
  explicit TemplateError(const std::string& key)
      : std::runtime_error("template placeholder {" + key + "} has no value"), key_(key)
  {
  }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Single-pass `{name}` substitution; substituted values are not rescanned.
/// Braces that do not enclose an identifier are copied through.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

extern const std::string_view paraphrase_prompt_template;
extern const std::string_view default_nl2sql_prompt_template;

/// One CREATE TABLE block per table, blank-line separated.
std::string render_schema_definitions(const DatabaseSchema& schema);

std::string render_paraphrase_prompt(const DatabaseSchema& schema, std::string_view sql, int num_queries);

/// Uses `custom_template` when given, otherwise the built-in template.
std::string render_nl2sql_prompt(const DatabaseSchema& schema, std::string_view question, sql::Dialect dialect,
                                 std::optional<std::string_view> custom_template = std::nullopt);

// ---------------------------------------------------------------------------
// Response parsing

class NumberedListError : public std::runtime_error {
 public:
  NumberedListError(const std::string& message, std::size_t found)
      : std::runtime_error(message), found_(found)
  {
  }
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t found_;
};

/// All `<index>. <content>` lines, ordered by index. Throws on duplicate indices.
std::vector<std::string> extract_numbered_items(std::string_view text);

/// As extract_numbered_items, but fails when fewer than expected_n items exist.
std::vector<std::string> parse_numbered_list(std::string_view text, std::size_t expected_n);

/// SQL from model output: the first fenced block when present, otherwise the
/// text up to the first semicolon. Empty when nothing usable remains.
std::string extract_sql(std::string_view model_output);

// ---------------------------------------------------------------------------
// Providers

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  int n_samples = 1;
  std::string model_id;
  /// Index of the first sample; later samples follow consecutively.
  int first_sample = 0;
};

enum class ProviderErrorKind { auth, timeout, malformed_response, http, config };

class ProviderError : public std::runtime_error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  ProviderErrorKind kind() const noexcept { return kind_; }

 private:
  ProviderErrorKind kind_;
};

struct ProviderConfig {
  std::string kind = "mock";  // mock | http
  std::string endpoint;
  std::string embedding_endpoint;
  std::string model_id = "mock";
  std::string api_key_env;
  double timeout = 60.0;
  int max_retries = 3;
  double backoff = 1.0;
  /// Request body; string leaves "{prompt}", "{model}", "{text}" are substituted,
  /// and leaves equal to "{temperature}" / "{max_tokens}" become numbers.
  nlohmann::json request_template;
  nlohmann::json embedding_request_template;
  std::string response_path = "choices.0.message.content";
  std::string embedding_response_path = "data.0.embedding";
  std::filesystem::path cache_dir;  // empty disables caching
  std::filesystem::path script;     // mock scripted mode
  std::size_t dimension = 384;      // mock embedding size
  std::string embedding_mode = "digest";  // mock: digest | bag_of_words

  void validate() const;
};

ProviderConfig provider_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::ordered_json to_json(const ProviderConfig& config);

/// Uncached model access. Implementations must be safe for concurrent use.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const GenerationRequest& request, int sample_index) = 0;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

struct MockScript {
  struct Rule {
    std::string contains;
    std::vector<std::string> responses;
  };
  std::map<std::string, std::vector<std::string>> by_digest;  // sha256(prompt) -> per-sample responses
  std::vector<Rule> rules;                                     // first substring match wins
  std::map<std::string, std::vector<double>> embeddings;       // exact text -> vector

  static MockScript load(const std::filesystem::path& path);
  static MockScript from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Deterministic offline backend. Scripted responses take precedence; otherwise
/// text is derived from the prompt digest.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::size_t dimension = 384, std::string embedding_mode = "digest",
                       MockScript script = {});
  std::string complete(const GenerationRequest& request, int sample_index) override;
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dimension_;
  std::string embedding_mode_;
  MockScript script_;
};

/// JSON-over-HTTP backend with retry and exponential backoff.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(ProviderConfig config);
  std::string complete(const GenerationRequest& request, int sample_index) override;
  std::vector<double> embed(std::string_view text) override;

  /// HTTP attempts made so far, retries included.
  std::size_t attempts() const { return attempts_.load(); }

 private:
  nlohmann::json post(const std::string& url, const nlohmann::json& body);

  ProviderConfig config_;
  std::atomic<std::size_t> attempts_{0};
};

/// Content-addressed store: <dir>/<first 2 hex>/<key>.txt
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view value);
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

/// Canonical request text whose SHA-256 is the cache key.
std::string canonical_request(const GenerationRequest& request, int sample_index);
std::string cache_key(const GenerationRequest& request, int sample_index);
std::string embedding_cache_key(std::string_view model_id, std::string_view text);

/// Front door for generation and embedding: validation, caching, counters.
class Provider {
 public:
  Provider(std::shared_ptr<Backend> backend, std::string model_id, std::optional<std::filesystem::path> cache_dir);

  std::vector<std::string> generate(const GenerationRequest& request);
  std::vector<double> embed(std::string_view text);

  const std::string& model_id() const { return model_id_; }
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<Backend> backend_;
  std::string model_id_;
  std::optional<ResponseCache> cache_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace sqlprobe

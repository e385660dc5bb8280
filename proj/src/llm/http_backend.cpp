#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sqlprobe/llm.hpp"
#include "sqlprobe/util.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace sqlprobe {

using nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url)
{
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ProviderError(ProviderErrorKind::config, "endpoint must be an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

json substitute(const json& node, const std::map<std::string, std::string>& text_values,
                const std::map<std::string, json>& typed_values)
{
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (auto it = typed_values.find(s); it != typed_values.end()) return it->second;
    std::string out = s;
    for (const auto& [placeholder, value] : text_values) {
      std::string::size_type pos = 0;
      while ((pos = out.find(placeholder, pos)) != std::string::npos) {
        out.replace(pos, placeholder.size(), value);
        pos += value.size();
      }
    }
    return out;
  }
  if (node.is_array()) {
    json out = json::array();
    for (const auto& item : node) out.push_back(substitute(item, text_values, typed_values));
    return out;
  }
  if (node.is_object()) {
    json out = json::object();
    for (const auto& [key, item] : node.items()) out[key] = substitute(item, text_values, typed_values);
    return out;
  }
  return node;
}

const json& follow_path(const json& doc, const std::string& path)
{
  const json* node = &doc;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('.', start);
    if (end == std::string::npos) end = path.size();
    const auto part = path.substr(start, end - start);
    if (!part.empty()) {
      if (node->is_array()) {
        const auto index = std::stoul(part);
        if (index >= node->size())
          throw ProviderError(ProviderErrorKind::malformed_response, "response path out of range at '" + part + "'");
        node = &(*node)[index];
      } else if (node->is_object() && node->contains(part)) {
        node = &node->at(part);
      } else {
        throw ProviderError(ProviderErrorKind::malformed_response, "response lacks field '" + part + "'");
      }
    }
    start = end + 1;
  }
  return *node;
}

}  // namespace

HttpBackend::HttpBackend(ProviderConfig config) : config_(std::move(config))
{
  if (config_.request_template.is_null())
    config_.request_template = json{{"model", "{model}"},
                                    {"messages", json::array({json{{"role", "user"}, {"content", "{prompt}"}}})},
                                    {"temperature", "{temperature}"},
                                    {"max_tokens", "{max_tokens}"}};
  if (config_.embedding_request_template.is_null())
    config_.embedding_request_template = json{{"model", "{model}"}, {"input", "{text}"}};
}

json HttpBackend::post(const std::string& url, const json& body)
{
  const auto [origin, path] = split_url(url);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw ProviderError(ProviderErrorKind::auth, "environment variable " + config_.api_key_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(origin);
  const auto seconds = static_cast<time_t>(config_.timeout);
  const auto micros = static_cast<time_t>((config_.timeout - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  const std::string payload = body.dump();
  std::string last_error;
  const int attempts = 1 + config_.max_retries;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    ++attempts_;
    auto res = client.Post(path, headers, payload, "application/json");
    if (res) {
      if (res->status == 401 || res->status == 403)
        throw ProviderError(ProviderErrorKind::auth, "authentication failed (HTTP " + std::to_string(res->status) + ")");
      if (res->status >= 200 && res->status < 300) {
        try {
          return json::parse(res->body);
        } catch (const json::parse_error& e) {
          throw ProviderError(ProviderErrorKind::malformed_response, std::string("response is not JSON: ") + e.what());
        }
      }
      last_error = "HTTP " + std::to_string(res->status);
      const bool transient = res->status == 429 || res->status >= 500;
      if (!transient) throw ProviderError(ProviderErrorKind::http, last_error + ": " + res->body.substr(0, 200));
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < attempts && config_.backoff > 0.0) {
      const double delay = config_.backoff * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
  throw ProviderError(ProviderErrorKind::timeout,
                      "request failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

std::string HttpBackend::complete(const GenerationRequest& request, int /*sample_index*/)
{
  if (config_.endpoint.empty()) throw ProviderError(ProviderErrorKind::config, "no generation endpoint configured");
  const auto body = substitute(config_.request_template,
                               {{"{prompt}", request.prompt}, {"{model}", request.model_id}},
                               {{"{temperature}", request.temperature}, {"{max_tokens}", request.max_tokens}});
  const auto doc = post(config_.endpoint, body);
  const auto& value = follow_path(doc, config_.response_path);
  if (!value.is_string()) throw ProviderError(ProviderErrorKind::malformed_response, "response text is not a string");
  return value.get<std::string>();
}

std::vector<double> HttpBackend::embed(std::string_view text)
{
  const auto& url = config_.embedding_endpoint.empty() ? config_.endpoint : config_.embedding_endpoint;
  const auto body = substitute(config_.embedding_request_template,
                               {{"{text}", std::string(text)}, {"{model}", config_.model_id}}, {});
  const auto doc = post(url, body);
  const auto& value = follow_path(doc, config_.embedding_response_path);
  try {
    return value.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ProviderError(ProviderErrorKind::malformed_response, "embedding is not a numeric array");
  }
}

}  // namespace sqlprobe

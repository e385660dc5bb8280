#include "sqlprobe/paraphrase.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>
#include <cmath>

namespace sqlprobe {

namespace {

std::vector<std::string> parse_reply(std::string_view reply)
{
  try {
    return extract_numbered_items(reply);
  } catch (const NumberedListError&) {
    return {};
  }
}

}  // namespace

ParaphraseSet generate_paraphrases(Provider& provider, const DatasetExample& example, const DatabaseSchema& schema,
                                   const ParaphraseOptions& options)
{
  if (options.m < 1) throw std::invalid_argument("m must be at least 1");
  if (trim(example.gold_sql).empty()) throw std::invalid_argument("example " + example.id + " has empty gold SQL");

  GenerationRequest request;
  request.prompt = render_paraphrase_prompt(schema, example.gold_sql, options.m);
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;

  const auto m = static_cast<std::size_t>(options.m);
  ParaphraseSet set;
  set.example_id = example.id;

  auto items = parse_reply(provider.generate(request).at(0));
  if (items.size() < m) {
    request.first_sample = 1;
    set.retries = 1;
    auto second = parse_reply(provider.generate(request).at(0));
    if (second.size() > items.size()) items = std::move(second);
  }
  if (items.empty()) throw ParaphraseError("zero variants parsed for example " + example.id);
  if (items.size() > m) items.resize(m);
  set.partial = items.size() < m;
  for (auto& text : items) set.variants.push_back({std::move(text), 0.0, false});
  return set;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double semantic_similarity(Provider& embedder, std::string_view a, std::string_view b)
{
  if (trim(a).empty() || trim(b).empty()) throw std::invalid_argument("semantic_similarity: empty text");
  const auto ea = embedder.embed(a);
  const auto eb = embedder.embed(b);
  return cosine_similarity(ea, eb);
}

ParaphraseSet validate_paraphrases(ParaphraseSet set, std::string_view original_question, Provider& embedder,
                                   double threshold)
{
  for (auto& v : set.variants) v.semantic_similarity = semantic_similarity(embedder, v.text, original_question);
  return apply_threshold(std::move(set), threshold);
}

ParaphraseSet apply_threshold(ParaphraseSet set, double threshold)
{
  double sum = 0.0;
  std::size_t n_valid = 0;
  for (auto& v : set.variants) {
    v.valid = v.semantic_similarity >= threshold;
    if (v.valid) {
      sum += v.semantic_similarity;
      ++n_valid;
    }
  }
  set.confidence_score = n_valid == 0 ? 0.0 : std::clamp(sum / static_cast<double>(n_valid), 0.0, 1.0);
  return set;
}

nlohmann::ordered_json to_json(const ParaphraseSet& set)
{
  nlohmann::ordered_json j;
  j["example_id"] = set.example_id;
  j["variants"] = nlohmann::ordered_json::array();
  for (const auto& v : set.variants) {
    nlohmann::ordered_json item;
    item["text"] = v.text;
    item["semantic_similarity"] = v.semantic_similarity;
    item["valid"] = v.valid;
    j["variants"].push_back(std::move(item));
  }
  j["confidence_score"] = set.confidence_score;
  return j;
}

ParaphraseSet paraphrase_set_from_json(const nlohmann::json& j)
{
  ParaphraseSet set;
  set.example_id = j.at("example_id").get<std::string>();
  for (const auto& item : j.at("variants")) {
    set.variants.push_back({item.at("text").get<std::string>(), item.at("semantic_similarity").get<double>(),
                            item.at("valid").get<bool>()});
  }
  set.confidence_score = j.at("confidence_score").get<double>();
  return set;
}

}  // namespace sqlprobe

#pragma once

#include "sqlprobe/dataset.hpp"
#include "sqlprobe/llm.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace sqlprobe {

inline constexpr double default_similarity_threshold = 0.6;

struct ParaphraseVariant {
  std::string text;
  double semantic_similarity = 0.0;
  bool valid = false;
};

struct ParaphraseSet {
  std::string example_id;
  std::vector<ParaphraseVariant> variants;
  double confidence_score = 0.0;

  // Generation bookkeeping; not serialized.
  int retries = 0;
  bool partial = false;
};

class ParaphraseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParaphraseOptions {
  int m = 10;
  double temperature = 0.5;
  int max_tokens = 2048;
};

/// Asks the provider for m questions describing the gold SQL. When the reply
/// holds fewer than m numbered items a second sample is requested and the
/// longer list kept; a list still short of m is returned with partial set.
/// Throws ParaphraseError when neither reply yields a single item.
ParaphraseSet generate_paraphrases(Provider& provider, const DatasetExample& example, const DatabaseSchema& schema,
                                   const ParaphraseOptions& options = {});

/// Cosine of two equal-length vectors. Throws on a zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Cosine of the provider embeddings of two non-empty texts.
double semantic_similarity(Provider& embedder, std::string_view a, std::string_view b);

/// Scores every variant against the original question, then applies the threshold.
ParaphraseSet validate_paraphrases(ParaphraseSet set, std::string_view original_question, Provider& embedder,
                                   double threshold = default_similarity_threshold);

/// Recomputes valid flags and the confidence score from stored similarities.
ParaphraseSet apply_threshold(ParaphraseSet set, double threshold);

nlohmann::ordered_json to_json(const ParaphraseSet& set);
ParaphraseSet paraphrase_set_from_json(const nlohmann::json& j);

}  // namespace sqlprobe

#pragma once

#include "sqlprobe/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sqlprobe {

/// Lowercases, splits on whitespace, and emits each punctuation character as
/// its own token. Throws std::invalid_argument on blank text.
std::vector<std::string> tokenize(std::string_view text);

/// The 17 universal dependency POS tags.
bool is_universal_pos(std::string_view tag);

struct AnnotatedToken {
  std::string text;
  std::string pos;
  int head = 0;  // 0-based; the root points at itself

  friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

struct AnnotatedQuery {
  std::vector<AnnotatedToken> tokens;

  /// Empty when the tree invariants hold, otherwise a description of the first violation.
  std::string validation_error() const;
  bool valid() const { return validation_error().empty(); }
  std::size_t root() const;

  friend bool operator==(const AnnotatedQuery&, const AnnotatedQuery&) = default;
};

/// Deterministic fallback annotator: lexicon and suffix POS rules; the first
/// VERB (else token 0) is the root and every other token hangs off the nearest
/// VERB before it, or off the root when there is none.
AnnotatedQuery heuristic_annotate(std::string_view text);

enum class SubtreeMode {
  internal,    // tokens with at least one dependent
  all_tokens,  // every token heads its own subtree
};

SubtreeMode parse_subtree_mode(std::string_view name);
std::string_view to_string(SubtreeMode mode);

int subtree_count(const AnnotatedQuery& q, SubtreeMode mode = SubtreeMode::internal);

struct GrammarSimilarity {
  double s_tree = 1.0;
  double s_pos = 1.0;
  double s_grammar = 1.0;
};

GrammarSimilarity grammar_similarity(const AnnotatedQuery& a, const AnnotatedQuery& b,
                                     SubtreeMode mode = SubtreeMode::internal);

struct LinguisticFeatures {
  std::size_t length = 0;
  int syntactic_depth = 0;
  double lexical_diversity = 0.0;
};

LinguisticFeatures features(const AnnotatedQuery& q);

struct DistributionSummary {
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  Interval ci95;
  double bandwidth = 0.0;
  std::vector<std::pair<double, double>> kde;  // (x, density)
};

inline constexpr std::size_t kde_points = 200;

/// Summary statistics, a bootstrap CI of the mean, and a Gaussian KDE with
/// Silverman bandwidth evaluated on [min - 3bw, max + 3bw]. Needs >= 2 values.
DistributionSummary summarize_distribution(std::span<const double> values, const BootstrapOptions& bootstrap = {});

/// Trapezoid-rule area under a KDE curve.
double kde_area(const std::vector<std::pair<double, double>>& curve);

/// Externally produced parses keyed by sha256 of the question text.
class AnnotationStore {
 public:
  AnnotationStore() = default;

  /// Lines without a "tokens" field (headers) are ignored; malformed or
  /// invalid lines are skipped and counted.
  static AnnotationStore load(const std::filesystem::path& path);

  void add(std::string_view text, AnnotatedQuery q);
  std::optional<AnnotatedQuery> find(std::string_view text) const;
  std::size_t size() const { return by_digest_.size(); }
  std::size_t skipped_lines() const { return skipped_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::map<std::string, AnnotatedQuery> by_digest_;
  std::size_t skipped_ = 0;
  std::vector<std::string> warnings_;
};

nlohmann::ordered_json to_json(const AnnotatedQuery& q);
AnnotatedQuery annotated_query_from_json(const nlohmann::json& tokens);

}  // namespace sqlprobe

#include "sqlprobe/linguistics.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <unordered_map>

namespace sqlprobe {

std::vector<std::string> tokenize(std::string_view text)
{
  std::vector<std::string> out;
  std::string cur;
  const auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  if (out.empty()) throw std::invalid_argument("tokenize: empty text");
  return out;
}

namespace {

constexpr std::array<std::string_view, 17> universal_tags = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

const std::unordered_map<std::string_view, std::string_view>& lexicon()
{
  static const std::unordered_map<std::string_view, std::string_view> table = [] {
    std::unordered_map<std::string_view, std::string_view> t;
    const auto add = [&](std::string_view tag, std::initializer_list<std::string_view> words) {
      for (auto w : words) t.emplace(w, tag);
    };
    add("DET", {"the", "a", "an", "all", "each", "every", "some", "any", "no", "this", "these", "those", "both",
                "either", "neither", "another"});
    add("PRON", {"what", "which", "who", "whom", "whose", "i", "me", "you", "he", "him", "she", "her", "it", "we",
                 "us", "they", "them", "its", "their", "his", "our", "my", "your", "there", "one", "ones",
                 "that", "themselves", "itself"});
    add("ADV", {"how", "when", "where", "why", "also", "only", "not", "very", "too", "then", "just", "ever",
                "never", "respectively", "together", "currently", "again", "altogether"});
    add("AUX", {"is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "can", "could",
                "will", "would", "shall", "should", "may", "might", "must"});
    add("ADP", {"of", "in", "on", "at", "by", "for", "with", "from", "into", "over", "under", "between", "among",
                "about", "than", "per", "across", "through", "during", "after", "before", "without", "within",
                "along", "above", "below", "against", "like", "via", "except", "including", "up", "out"});
    add("PART", {"to", "s", "'s", "n't"});
    add("CCONJ", {"and", "or", "but", "nor", "plus"});
    add("SCONJ", {"if", "whether", "because", "while", "although", "whereas", "unless", "since", "as"});
    add("VERB", {"list", "show", "find", "give", "return", "display", "get", "tell", "provide",
                 "compute", "calculate", "retrieve", "select", "identify", "determine", "include",
                 "exceed", "have", "has", "had", "know", "see", "want", "need", "make", "made",
                 "take", "took", "play", "played", "live", "lives", "belong", "belongs", "own", "owns",
                 "contain", "contains", "enumerate", "fetch", "produce", "sing", "sang", "write",
                 "wrote", "held", "hold", "holds", "visit", "born", "arrange", "exist",
                 "exists", "appear", "appears", "works", "costs", "earn", "earns", "teach",
                 "teaches", "speak", "speaks", "uses", "go", "goes", "come", "comes", "sell", "sells",
                 "buy", "buys"});
    add("ADJ", {"many", "much", "most", "least", "more", "less", "fewer", "few", "different", "distinct",
                "average", "total", "maximum", "minimum", "max", "min", "highest", "lowest", "largest",
                "smallest", "oldest", "youngest", "biggest", "best", "worst", "first", "last", "same", "other",
                "unique", "new", "old", "young", "high", "low", "large", "small", "big", "long", "short",
                "several", "such", "top", "bottom", "overall", "mean", "corresponding", "respective",
                "full", "whole", "entire", "main", "early", "late", "latest", "earliest", "male", "female"});
    add("NUM", {"zero", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
                "twelve", "twenty", "hundred", "thousand", "million"});
    add("INTJ", {"please", "hello", "hi", "yes", "ok"});
    return t;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
  return s.size() > suffix.size() + 2 && s.substr(s.size() - suffix.size()) == suffix;
}

// Nouns that read as commands at the start of a question ("Count the ...").
bool is_imperative_noun(std::string_view token)
{
  static const std::set<std::string_view> words = {"name", "order", "sort", "count", "rank", "group", "filter",
                                                   "report", "output", "use", "work", "cost", "sum", "total"};
  return words.count(token) > 0;
}

std::string_view tag_token(std::string_view token, bool sentence_initial)
{
  if (sentence_initial && is_imperative_noun(token)) return "VERB";
  const auto first = static_cast<unsigned char>(token.front());
  if (token.size() == 1 && first < 0x80 && std::ispunct(first)) {
    static constexpr std::string_view symbols = "$%+<>=#&*@^|~/\\";
    return symbols.find(token.front()) != std::string_view::npos ? "SYM" : "PUNCT";
  }
  if (std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return "NUM";
  if (auto it = lexicon().find(token); it != lexicon().end()) return it->second;
  if (ends_with(token, "ly")) return "ADV";
  if (ends_with(token, "ing") || ends_with(token, "ed") || ends_with(token, "ize") || ends_with(token, "ise"))
    return "VERB";
  if (ends_with(token, "ous") || ends_with(token, "ful") || ends_with(token, "able") || ends_with(token, "ible") ||
      ends_with(token, "ive") || ends_with(token, "ic") || ends_with(token, "less") || ends_with(token, "est"))
    return "ADJ";
  if (std::isdigit(first)) return "NUM";
  return "NOUN";
}

}  // namespace

bool is_universal_pos(std::string_view tag)
{
  return std::find(universal_tags.begin(), universal_tags.end(), tag) != universal_tags.end();
}

std::string AnnotatedQuery::validation_error() const
{
  if (tokens.empty()) return "no tokens";
  const auto n = static_cast<int>(tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = tokens[static_cast<std::size_t>(i)];
    if (t.head < 0 || t.head >= n) return "token " + std::to_string(i) + " has head out of range";
    if (!is_universal_pos(t.pos)) return "token " + std::to_string(i) + " has unknown POS tag '" + t.pos + "'";
    if (t.head == i) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  for (int i = 0; i < n; ++i) {
    int cur = i;
    for (int steps = 0; tokens[static_cast<std::size_t>(cur)].head != cur; ++steps) {
      if (steps > n) return "head links of token " + std::to_string(i) + " form a cycle";
      cur = tokens[static_cast<std::size_t>(cur)].head;
    }
  }
  return {};
}

std::size_t AnnotatedQuery::root() const
{
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i].head == static_cast<int>(i)) return i;
  throw std::logic_error("annotated query has no root");
}

AnnotatedQuery heuristic_annotate(std::string_view text)
{
  AnnotatedQuery q;
  for (auto& tok : tokenize(text)) {
    const auto pos = tag_token(tok, q.tokens.empty());
    q.tokens.push_back({std::move(tok), std::string(pos), 0});
  }
  int root = 0;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    if (q.tokens[i].pos == "VERB") {
      root = static_cast<int>(i);
      break;
    }
  }
  int last_verb = -1;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (idx == root) {
      q.tokens[i].head = root;
    } else {
      q.tokens[i].head = last_verb >= 0 ? last_verb : root;
    }
    if (q.tokens[i].pos == "VERB" && idx >= root) last_verb = idx;
  }
  return q;
}

SubtreeMode parse_subtree_mode(std::string_view name)
{
  if (name == "internal") return SubtreeMode::internal;
  if (name == "all-tokens" || name == "all_tokens") return SubtreeMode::all_tokens;
  throw std::invalid_argument("unknown subtree mode '" + std::string(name) + "' (expected internal|all-tokens)");
}

std::string_view to_string(SubtreeMode mode)
{
  return mode == SubtreeMode::internal ? "internal" : "all-tokens";
}

namespace {

void require_valid(const AnnotatedQuery& q)
{
  if (auto error = q.validation_error(); !error.empty()) throw std::invalid_argument("annotated query: " + error);
}

}  // namespace

int subtree_count(const AnnotatedQuery& q, SubtreeMode mode)
{
  require_valid(q);
  if (mode == SubtreeMode::all_tokens) return static_cast<int>(q.tokens.size());
  std::vector<bool> has_dependent(q.tokens.size(), false);
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    const auto head = static_cast<std::size_t>(q.tokens[i].head);
    if (head != i) has_dependent[head] = true;
  }
  return static_cast<int>(std::count(has_dependent.begin(), has_dependent.end(), true));
}

GrammarSimilarity grammar_similarity(const AnnotatedQuery& a, const AnnotatedQuery& b, SubtreeMode mode)
{
  GrammarSimilarity s;
  const int t1 = subtree_count(a, mode);
  const int t2 = subtree_count(b, mode);
  const int t_max = std::max(t1, t2);
  s.s_tree = t_max == 0 ? 1.0 : 1.0 - static_cast<double>(std::abs(t1 - t2)) / static_cast<double>(t_max);

  std::set<std::string> p1, p2;
  for (const auto& t : a.tokens) p1.insert(t.pos);
  for (const auto& t : b.tokens) p2.insert(t.pos);
  std::size_t common = 0;
  for (const auto& tag : p1) common += p2.count(tag);
  const auto p_max = std::max(p1.size(), p2.size());
  s.s_pos = p_max == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(p_max);

  s.s_grammar = (s.s_tree + s.s_pos) / 2.0;
  return s;
}

LinguisticFeatures features(const AnnotatedQuery& q)
{
  require_valid(q);
  LinguisticFeatures f;
  f.length = q.tokens.size();
  std::set<std::string> unique;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    f.syntactic_depth = std::max(f.syntactic_depth, std::abs(q.tokens[i].head - static_cast<int>(i)));
    unique.insert(to_lower(q.tokens[i].text));
  }
  if (f.length > 0) f.lexical_diversity = static_cast<double>(unique.size()) / static_cast<double>(f.length);
  return f;
}

DistributionSummary summarize_distribution(std::span<const double> values, const BootstrapOptions& bootstrap)
{
  if (values.size() < 2) throw std::invalid_argument("summarize_distribution: need at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  DistributionSummary s;
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / n;
  s.median = quantile_sorted(sorted, 0.5);
  s.q25 = quantile_sorted(sorted, 0.25);
  s.q75 = quantile_sorted(sorted, 0.75);
  s.min = sorted.front();
  s.max = sorted.back();
  s.ci95 = bootstrap_ci(sorted, bootstrap.n_resamples, bootstrap.level, bootstrap.seed);

  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr_sd = (s.q75 - s.q25) / 1.34;
  double spread = iqr_sd > 0.0 ? std::min(sd, iqr_sd) : sd;
  double bw = 0.9 * spread * std::pow(n, -0.2);
  if (!(bw > 0.0)) bw = 1e-3 * std::max(1.0, std::abs(s.mean));
  s.bandwidth = bw;

  const double lo = s.min - 3.0 * bw;
  const double hi = s.max + 3.0 * bw;
  const double step = (hi - lo) / static_cast<double>(kde_points - 1);
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * std::numbers::pi));
  s.kde.reserve(kde_points);
  for (std::size_t i = 0; i < kde_points; ++i) {
    const double x = i + 1 == kde_points ? hi : lo + step * static_cast<double>(i);
    double density = 0.0;
    for (double v : sorted) {
      const double z = (x - v) / bw;
      density += std::exp(-0.5 * z * z);
    }
    s.kde.emplace_back(x, density * norm);
  }
  return s;
}

double kde_area(const std::vector<std::pair<double, double>>& curve)
{
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].first - curve[i - 1].first) * (curve[i].second + curve[i - 1].second) / 2.0;
  return area;
}

nlohmann::ordered_json to_json(const AnnotatedQuery& q)
{
  auto tokens = nlohmann::ordered_json::array();
  for (const auto& t : q.tokens) {
    nlohmann::ordered_json item;
    item["text"] = t.text;
    item["pos"] = t.pos;
    item["head"] = t.head;
    tokens.push_back(std::move(item));
  }
  return tokens;
}

AnnotatedQuery annotated_query_from_json(const nlohmann::json& tokens)
{
  if (!tokens.is_array()) throw std::invalid_argument("tokens must be an array");
  AnnotatedQuery q;
  for (const auto& item : tokens) {
    q.tokens.push_back(
        {item.at("text").get<std::string>(), item.at("pos").get<std::string>(), item.at("head").get<int>()});
  }
  return q;
}

AnnotationStore AnnotationStore::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotation file " + path.string());
  AnnotationStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto skip = [&](const std::string& why) {
      ++store.skipped_;
      store.warnings_.push_back(path.filename().string() + ":" + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      skip("not valid JSON");
      continue;
    }
    if (!j.is_object() || !j.contains("tokens")) continue;
    try {
      auto q = annotated_query_from_json(j.at("tokens"));
      if (auto err = q.validation_error(); !err.empty()) {
        skip(err);
        continue;
      }
      std::string digest;
      if (j.contains("text_digest")) {
        digest = j.at("text_digest").get<std::string>();
      } else {
        digest = sha256_hex(j.at("text").get<std::string>());
      }
      store.by_digest_.insert_or_assign(to_lower(digest), std::move(q));
    } catch (const std::exception& e) {
      skip(e.what());
    }
  }
  return store;
}

void AnnotationStore::add(std::string_view text, AnnotatedQuery q)
{
  by_digest_.insert_or_assign(sha256_hex(text), std::move(q));
}

std::optional<AnnotatedQuery> AnnotationStore::find(std::string_view text) const
{
  if (auto it = by_digest_.find(sha256_hex(text)); it != by_digest_.end()) return it->second;
  return std::nullopt;
}

}  // namespace sqlprobe

#include "fixture_cases.hpp"

#include "sqlprobe/linguistics.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace sqlprobe {
namespace {

using testing::TempDir;

AnnotatedQuery tree(std::vector<int> heads, std::vector<std::string> tags = {})
{
  AnnotatedQuery q;
  for (std::size_t i = 0; i < heads.size(); ++i)
    q.tokens.push_back({"w" + std::to_string(i), i < tags.size() ? tags[i] : "NOUN", heads[i]});
  return q;
}

TEST(Tokenize, PunctuationSplitAndLowercased)
{
  EXPECT_EQ(tokenize("How many singers?"), (std::vector<std::string>{"how", "many", "singers", "?"}));
  EXPECT_EQ(tokenize("  Singer's  age, please "),
            (std::vector<std::string>{"singer", "'", "s", "age", ",", "please"}));
  EXPECT_THROW(tokenize(""), std::invalid_argument);
  EXPECT_THROW(tokenize(" \t\n"), std::invalid_argument);
}

TEST(HeuristicAnnotator, ImperativeRootsAtVerb)
{
  const auto q = heuristic_annotate("list all singers");
  ASSERT_EQ(q.tokens.size(), 3u);
  EXPECT_EQ(q.tokens[0].pos, "VERB");
  EXPECT_EQ(q.tokens[1].pos, "DET");
  EXPECT_EQ(q.tokens[2].pos, "NOUN");
  for (const auto& t : q.tokens) EXPECT_EQ(t.head, 0);
  EXPECT_EQ(q.root(), 0u);
}

TEST(HeuristicAnnotator, ValidAndDeterministic)
{
  for (const char* text : {"How many singers are there?", "What is the average age of all singers?",
                           "Show the names of singers who sang in concerts held in 2014 and list their ages.",
                           "?", "Count the stadiums", "Please, list every concert venue."}) {
    const auto q = heuristic_annotate(text);
    EXPECT_TRUE(q.valid()) << text << ": " << q.validation_error();
    EXPECT_EQ(q, heuristic_annotate(text));
    for (const auto& t : q.tokens) EXPECT_TRUE(is_universal_pos(t.pos)) << t.pos;
  }
  EXPECT_EQ(heuristic_annotate("Count the stadiums").tokens[0].pos, "VERB");
  EXPECT_EQ(heuristic_annotate("the count").tokens[1].pos, "NOUN");
}

TEST(HeuristicAnnotator, LaterVerbsCollectFollowingTokens)
{
  const auto q = heuristic_annotate("show names and list ages");
  ASSERT_EQ(q.tokens.size(), 5u);
  EXPECT_EQ(q.tokens[3].head, 0);
  EXPECT_EQ(q.tokens[4].head, 3);
}

TEST(TreeValidation, Invariants)
{
  EXPECT_TRUE(tree({0, 0, 1}).valid());
  EXPECT_FALSE(AnnotatedQuery{}.valid());
  EXPECT_NE(tree({0, 1}).validation_error().find("exactly one root"), std::string::npos);
  EXPECT_NE(tree({1, 2, 1}).validation_error().find("exactly one root"), std::string::npos);
  EXPECT_NE(tree({0, 3}).validation_error().find("out of range"), std::string::npos);
  EXPECT_NE(tree({0, 2, 1}).validation_error().find("cycle"), std::string::npos);
  EXPECT_NE(tree({0}, {"NN"}).validation_error().find("POS"), std::string::npos);
  EXPECT_THROW(subtree_count(tree({0, 1})), std::invalid_argument);
  EXPECT_THROW(features(tree({0, 2, 1})), std::invalid_argument);
}

TEST(Subtrees, InternalNodes)
{
  EXPECT_EQ(subtree_count(tree({0})), 0);
  EXPECT_EQ(subtree_count(tree({0, 0, 0})), 1);
  EXPECT_EQ(subtree_count(tree({0, 0, 1, 2})), 3);
  EXPECT_EQ(subtree_count(tree({0, 0, 1, 2}), SubtreeMode::all_tokens), 4);
  EXPECT_EQ(parse_subtree_mode("all-tokens"), SubtreeMode::all_tokens);
  EXPECT_EQ(to_string(SubtreeMode::internal), "internal");
  EXPECT_THROW(parse_subtree_mode("leaves"), std::invalid_argument);
}

TEST(Subtrees, RemovingOnlyDependentDropsCount)
{
  // w2 is the only dependent of w1; cutting it leaves w1 a leaf.
  const auto before = tree({0, 0, 1});
  const auto after = tree({0, 0});
  EXPECT_EQ(subtree_count(before) - subtree_count(after), 1);
}

TEST(GrammarSimilarity, TreeAndTagTerms)
{
  // Two subtrees against four; three of four tags shared.
  const auto a = tree({0, 0, 1}, {"VERB", "DET", "NOUN"});
  const auto b = tree({0, 0, 1, 2, 3}, {"VERB", "DET", "NOUN", "ADP", "NOUN"});
  const auto s = grammar_similarity(a, b);
  EXPECT_DOUBLE_EQ(s.s_tree, 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.s_pos, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.s_grammar, 5.0 / 8.0);
}

TEST(GrammarSimilarity, IdentityAndLeafOnly)
{
  const auto q = heuristic_annotate("What is the average age of all singers?");
  const auto s = grammar_similarity(q, q);
  EXPECT_EQ(s.s_tree, 1.0);
  EXPECT_EQ(s.s_pos, 1.0);
  EXPECT_EQ(s.s_grammar, 1.0);
  EXPECT_EQ(grammar_similarity(tree({0}), tree({0})).s_tree, 1.0);
}

TEST(GrammarSimilarity, DifferentQuestionsScoreBelowOne)
{
  const auto a = heuristic_annotate("How many singers do we have?");
  const auto b = heuristic_annotate("Count the singers.");
  const auto s = grammar_similarity(a, b);
  EXPECT_LT(s.s_grammar, 1.0);
  EXPECT_GT(s.s_grammar, 0.0);
}

TEST(Features, DepthAndDiversity)
{
  EXPECT_EQ(features(tree({1, 1, 1})).syntactic_depth, 1);
  EXPECT_EQ(features(tree({2, 2, 2, 2, 0}, {})).syntactic_depth, 4);
  AnnotatedQuery q;
  for (const char* w : {"the", "cat", "saw", "the", "dog"}) q.tokens.push_back({w, "NOUN", 2});
  const auto f = features(q);
  EXPECT_EQ(f.length, 5u);
  EXPECT_DOUBLE_EQ(f.lexical_diversity, 0.8);
}

TEST(Features, DiversityIgnoresCase)
{
  AnnotatedQuery q;
  for (const char* w : {"The", "the"}) q.tokens.push_back({w, "DET", 0});
  EXPECT_DOUBLE_EQ(features(q).lexical_diversity, 0.5);
}

TEST(GrammarFixture, AllPairsMatchHandDerivedValues)
{
  const auto results = testing::run_grammar_pair_cases();
  EXPECT_GE(results.size(), 10u);
  for (const auto& r : results) EXPECT_TRUE(r.ok) << r.name << ": " << r.detail;
}

TEST(Distribution, ConstantValues)
{
  const std::vector<double> v{1, 1, 1, 1};
  const auto s = summarize_distribution(v);
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.median, 1.0);
  EXPECT_EQ(s.ci95.lo, 1.0);
  EXPECT_EQ(s.ci95.hi, 1.0);
  EXPECT_GT(s.bandwidth, 0.0);
  ASSERT_EQ(s.kde.size(), kde_points);
  EXPECT_NEAR(kde_area(s.kde), 1.0, 0.01);
}

TEST(Distribution, TwoPointSummary)
{
  const std::vector<double> v{0, 1};
  const auto s = summarize_distribution(v);
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.median, 0.5);
  EXPECT_DOUBLE_EQ(s.q25, 0.25);
  EXPECT_DOUBLE_EQ(s.q75, 0.75);
  EXPECT_EQ(s.min, 0.0);
  EXPECT_EQ(s.max, 1.0);
  // min(sd, IQR/1.34) = min(0.7071, 0.3731) times 0.9 * 2^-0.2
  EXPECT_NEAR(s.bandwidth, 0.9 * (0.5 / 1.34) * std::pow(2.0, -0.2), 1e-12);
  EXPECT_NEAR(s.kde.front().first, -3.0 * s.bandwidth, 1e-12);
  EXPECT_NEAR(s.kde.back().first, 1.0 + 3.0 * s.bandwidth, 1e-12);
  EXPECT_NEAR(kde_area(s.kde), 0.9973, 0.002);
  EXPECT_THROW(summarize_distribution(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Distribution, KdeIntegratesToAboutOne)
{
  Rng rng(11);
  std::vector<double> v(300);
  for (auto& x : v) x = uniform_unit(rng);
  EXPECT_NEAR(kde_area(summarize_distribution(v).kde), 1.0, 0.01);
}

TEST(AnnotationStore, LoadsJsonl)
{
  TempDir dir;
  const auto q = tree({0, 0}, {"VERB", "NOUN"});
  const auto tokens = to_json(q).dump();
  const auto path = dir / "ann.jsonl";
  {
    std::ofstream out(path);
    out << R"({"annotator": "spacy", "version": "3.7"})" << "\n"
        << R"({"text": "List singers", "tokens": )" << tokens << "}\n"
        << "\n"
        << "not json\n"
        << R"({"text": "bad", "tokens": [{"text": "x", "pos": "NOUN", "head": 5}]})" << "\n"
        << R"({"text": "Also bad", "tokens": [{"text": "x"}]})" << "\n"
        << R"({"text_digest": ")" << sha256_hex("Shown by digest") << R"(", "tokens": )" << tokens << "}\n"
        << R"({"text": "List singers", "tokens": [{"text": "only", "pos": "VERB", "head": 0}]})" << "\n";
  }
  const auto store = AnnotationStore::load(path);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.skipped_lines(), 3u);
  ASSERT_EQ(store.warnings().size(), 3u);
  EXPECT_EQ(store.warnings()[0].rfind("ann.jsonl:4:", 0), 0u);
  EXPECT_EQ(store.find("List singers")->tokens.size(), 1u);
  EXPECT_EQ(store.find("Shown by digest"), q);
  EXPECT_FALSE(store.find("list singers"));
  EXPECT_THROW(AnnotationStore::load(dir / "missing.jsonl"), std::runtime_error);
}

TEST(AnnotationStore, JsonRoundTrip)
{
  const auto q = heuristic_annotate("Which singers are older than 30?");
  EXPECT_EQ(annotated_query_from_json(nlohmann::json::parse(to_json(q).dump())), q);
  EXPECT_THROW(annotated_query_from_json(nlohmann::json::object()), std::invalid_argument);
}

}  // namespace
}  // namespace sqlprobe

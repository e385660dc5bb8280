#pragma once

#include "support.hpp"

#include "sqlprobe/dataset.hpp"
#include "sqlprobe/execution.hpp"
#include "sqlprobe/linguistics.hpp"
#include "sqlprobe/sql/analysis.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sqlprobe::testing {

struct CaseResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

inline std::string join(const std::set<std::string>& items)
{
  std::string out = "{";
  for (const auto& s : items) out += (out.size() > 1 ? ", " : "") + s;
  return out + "}";
}

/// Hand-labeled schema element cases on the mini schemas.
inline std::vector<CaseResult> run_schema_extraction_cases()
{
  const auto doc = load_json(fixture("schema_extraction.json"));
  const auto schemas = load_schemas(fixture(doc.at("tables").get<std::string>()));
  std::vector<CaseResult> out;
  for (const auto& c : doc.at("cases")) {
    CaseResult r;
    r.name = c.at("sql").get<std::string>();
    const auto expected_tables = c.at("tables").get<std::set<std::string>>();
    const auto expected_columns = c.at("columns").get<std::set<std::string>>();
    try {
      const auto got = extract_schema_elements(r.name, schemas.at(c.at("db").get<std::string>()));
      r.ok = got.tables == expected_tables && got.columns == expected_columns && got.diagnostics.count() == 0;
      if (!r.ok)
        r.detail = "tables " + join(got.tables) + " columns " + join(got.columns) + " diagnostics " +
                   std::to_string(got.diagnostics.count());
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Hand-labeled gold/pred execution pairs on the exec fixture database.
inline std::vector<CaseResult> run_execution_match_cases()
{
  const auto doc = load_json(fixture("exec/match_cases.json"));
  const auto db = fixture("exec") / doc.at("database").get<std::string>();
  std::vector<CaseResult> out;
  for (const auto& c : doc.at("cases")) {
    CaseResult r;
    const auto gold_sql = c.at("gold").get<std::string>();
    const auto pred_sql = c.at("pred").get<std::string>();
    r.name = gold_sql + " | " + pred_sql;
    const std::chrono::duration<double> timeout(c.value("timeout", 10.0));
    bool ordered = false;
    try {
      ordered = !sql::parse_sql(gold_sql).order_by.empty();
    } catch (const std::exception&) {
    }
    const auto outcome = execution_match(execute(db, gold_sql, timeout), execute(db, pred_sql, timeout), ordered);
    const auto expected_reason = c.at("reason").get<std::string>();
    r.ok = outcome.match == c.at("match").get<bool>() && to_string(outcome.reason) == expected_reason;
    if (!r.ok)
      r.detail = "got " + std::string(outcome.match ? "match" : "no match") + "/" +
                 std::string(to_string(outcome.reason)) + ", expected " + expected_reason;
    out.push_back(std::move(r));
  }
  return out;
}

inline AnnotatedQuery annotated_from_triples(const nlohmann::json& tokens)
{
  AnnotatedQuery q;
  for (const auto& t : tokens)
    q.tokens.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<int>()});
  return q;
}

/// Constructed annotated pairs with hand-derived grammar scores and features.
inline std::vector<CaseResult> run_grammar_pair_cases(double tolerance = 1e-9)
{
  const auto doc = load_json(fixture("grammar_pairs.json"));
  std::vector<CaseResult> out;
  for (const auto& p : doc.at("pairs")) {
    CaseResult r;
    r.name = p.at("name").get<std::string>();
    std::ostringstream detail;
    try {
      const auto a = annotated_from_triples(p.at("a"));
      const auto b = annotated_from_triples(p.at("b"));
      const auto mode = parse_subtree_mode(p.value("mode", std::string("internal")));
      const auto s = grammar_similarity(a, b, mode);
      const auto s_rev = grammar_similarity(b, a, mode);
      bool ok = true;
      auto check = [&](const char* what, double got, double expected) {
        if (std::abs(got - expected) > tolerance) {
          ok = false;
          detail << what << "=" << got << " expected " << expected << "; ";
        }
      };
      check("s_tree", s.s_tree, fraction(p.at("s_tree").get<std::string>()));
      check("s_pos", s.s_pos, fraction(p.at("s_pos").get<std::string>()));
      check("s_grammar", s.s_grammar, fraction(p.at("s_grammar").get<std::string>()));
      check("symmetry", s_rev.s_grammar, s.s_grammar);
      for (const auto& [key, q] : {std::pair{"features_a", &a}, std::pair{"features_b", &b}}) {
        const auto f = features(*q);
        const auto& e = p.at(key);
        check("length", static_cast<double>(f.length), e.at(0).get<double>());
        check("depth", f.syntactic_depth, e.at(1).get<double>());
        check("diversity", f.lexical_diversity, fraction(e.at(2).get<std::string>()));
      }
      if (a == b && !(s.s_tree == 1.0 && s.s_pos == 1.0 && s.s_grammar == 1.0)) {
        ok = false;
        detail << "identity pair did not score exactly 1";
      }
      r.ok = ok;
    } catch (const std::exception& e) {
      detail << e.what();
    }
    r.detail = detail.str();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sqlprobe::testing

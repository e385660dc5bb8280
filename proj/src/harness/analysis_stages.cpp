#include "common.hpp"

#include "sqlprobe/util.hpp"

#include <ostream>
#include <sstream>

#ifndef SQLPROBE_VERSION
#define SQLPROBE_VERSION "0.0.0"
#endif

namespace sqlprobe {

using nlohmann::json;
using nlohmann::ordered_json;
using namespace detail;

namespace {

constexpr const char* report_schema_version = "1.0.0";

struct Annotated {
  AnnotatedQuery query;
  bool external = false;
};

std::string kde_csv(const std::vector<std::pair<double, double>>& curve)
{
  std::string out = "x,density\n";
  for (const auto& [x, d] : curve) out += format_double(x) + "," + format_double(d) + "\n";
  return out;
}

}  // namespace

int run_linguistics(const RunConfig& config, std::ostream& log)
{
  const auto ws = load_workspace(config);
  const auto paraphrases = load_paraphrases(config);
  AnnotationStore store;
  if (!config.annotations.empty()) {
    store = AnnotationStore::load(config.annotations);
    for (const auto& w : store.warnings()) log << "linguistics: skipped annotation line " << w << "\n";
  }

  std::size_t n_external = 0, n_heuristic = 0;
  const auto annotate = [&](const std::string& text) {
    if (auto found = store.find(text)) {
      ++n_external;
      return Annotated{std::move(*found), true};
    }
    ++n_heuristic;
    return Annotated{heuristic_annotate(text), false};
  };

  std::map<std::string, std::vector<double>> dist;
  std::string csv =
      "example_id,variant_index,valid,semantic_similarity,s_tree,s_pos,s_grammar,orig_length,para_length,"
      "orig_depth,para_depth,orig_lexical_diversity,para_lexical_diversity,orig_annotation,para_annotation\n";
  std::size_t n_pairs = 0, n_examples = 0;
  for (const auto& ex : ws.examples) {
    auto it = paraphrases.find(ex.id);
    if (it == paraphrases.end()) continue;
    ++n_examples;
    const auto orig = annotate(ex.question);
    const auto fo = features(orig.query);
    dist["original_length"].push_back(static_cast<double>(fo.length));
    dist["original_syntactic_depth"].push_back(fo.syntactic_depth);
    dist["original_lexical_diversity"].push_back(fo.lexical_diversity);

    const auto& variants = it->second.variants;
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto para = annotate(variants[v].text);
      const auto fp = features(para.query);
      const auto g = grammar_similarity(orig.query, para.query, config.subtree);
      dist["semantic_similarity"].push_back(variants[v].semantic_similarity);
      dist["s_tree"].push_back(g.s_tree);
      dist["s_pos"].push_back(g.s_pos);
      dist["s_grammar"].push_back(g.s_grammar);
      dist["paraphrase_length"].push_back(static_cast<double>(fp.length));
      dist["paraphrase_syntactic_depth"].push_back(fp.syntactic_depth);
      dist["paraphrase_lexical_diversity"].push_back(fp.lexical_diversity);
      ++n_pairs;

      csv += csv_field(ex.id) + "," + std::to_string(v) + "," + (variants[v].valid ? "true" : "false") + "," +
             format_double(variants[v].semantic_similarity) + "," + format_double(g.s_tree) + "," +
             format_double(g.s_pos) + "," + format_double(g.s_grammar) + "," + std::to_string(fo.length) + "," +
             std::to_string(fp.length) + "," + std::to_string(fo.syntactic_depth) + "," +
             std::to_string(fp.syntactic_depth) + "," + format_double(fo.lexical_diversity) + "," +
             format_double(fp.lexical_diversity) + "," + (orig.external ? "external" : "heuristic") + "," +
             (para.external ? "external" : "heuristic") + "\n";
    }
  }
  write_file_atomic(output_path(config, stage_files::linguistics_pairs), csv);

  ordered_json summary;
  summary["n_examples"] = n_examples;
  summary["n_pairs"] = n_pairs;
  summary["subtree_mode"] = std::string(to_string(config.subtree));
  summary["annotations"] = {{"external", n_external}, {"heuristic", n_heuristic}};
  ordered_json distributions;
  const auto kde_dir = output_path(config, stage_files::kde_dir);
  for (const auto& [name, values] : dist) {
    if (values.size() < 2) {
      distributions[name] = nullptr;
      continue;
    }
    const auto s = summarize_distribution(values, config.bootstrap);
    distributions[name] = {{"n", values.size()},  {"mean", s.mean}, {"median", s.median}, {"q25", s.q25},
                           {"q75", s.q75},        {"min", s.min},   {"max", s.max},
                           {"ci95", interval_json(s.ci95)},         {"bandwidth", s.bandwidth}};
    write_file_atomic(kde_dir / (name + ".csv"), kde_csv(s.kde));
  }
  summary["distributions"] = distributions;
  write_json(output_path(config, stage_files::linguistics_summary), summary);

  log << "linguistics: " << n_pairs << " pairs over " << n_examples << " examples (" << n_heuristic
      << " heuristic annotations, " << n_external << " external)\n";
  return exit_code::success;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<ordered_json> load_optional(const std::filesystem::path& path)
{
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  return ordered_json::parse(read_file(path));
}

std::string num(const ordered_json& v)
{
  if (v.is_null()) return "";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  return format_double(v.get<double>());
}

std::string accuracy_row(const std::string& group, const ordered_json& acc)
{
  if (acc.is_null()) return csv_field(group) + ",0,,,\n";
  return csv_field(group) + "," + num(acc.at("n")) + "," + num(acc.at("accuracy")) + "," + num(acc.at("ci95")[0]) +
         "," + num(acc.at("ci95")[1]) + "\n";
}

}  // namespace

int run_report(const RunConfig& config, std::ostream& log)
{
  const auto stats = load_optional(output_path(config, stage_files::stats_json));
  const auto evaluation = load_optional(output_path(config, stage_files::evaluation_report));
  const auto passk_nl2sql = load_optional(output_path(config, stage_files::passk_summary(PassKDirection::nl2sql)));
  const auto passk_sql2nl = load_optional(output_path(config, stage_files::passk_summary(PassKDirection::sql2nl)));
  const auto linguistics = load_optional(output_path(config, stage_files::linguistics_summary));

  std::vector<std::string> missing;
  const auto section = [&](const std::optional<ordered_json>& value, const std::string& stage) {
    if (value) return *value;
    missing.push_back(stage);
    return ordered_json(nullptr);
  };

  ordered_json report;
  report["schema_version"] = report_schema_version;
  report["tool"] = {{"name", "sqlprobe"}, {"version", SQLPROBE_VERSION}};
  report["config"] = config.echo();
  report["seeds"] = {{"sample_seed", config.seed}, {"bootstrap_seed", config.bootstrap.seed}};
  report["stats"] = section(stats, "stats");
  report["evaluation"] = section(evaluation, "evaluate");
  ordered_json passk;
  passk["nl2sql"] = section(passk_nl2sql, "passk nl2sql");
  passk["sql2nl"] = section(passk_sql2nl, "passk sql2nl");
  report["passk"] = passk;
  report["linguistics"] = section(linguistics, "linguistics");
  report["missing_stages"] = missing;
  auto notes = ordered_json::array();
  for (const auto& m : missing) notes.push_back("no output from stage '" + m + "'; section is null");
  report["notes"] = notes;

  const auto dir = output_path(config, stage_files::report_dir);
  std::filesystem::remove_all(dir);
  write_json(dir / "report.json", report);

  if (stats) {
    const auto& s = *stats;
    std::string csv = "dataset,n_queries,n_dbs,tables_per_db,cols_per_table,joins_per_query,aggs_per_query,"
                      "nest_depth_per_query,n_parse_failures\n";
    csv += csv_field(s.at("dataset").get<std::string>()) + "," + num(s.at("n_queries")) + "," + num(s.at("n_dbs")) +
           "," + num(s.at("tables_per_db")) + "," + num(s.at("cols_per_table")) + "," +
           num(s.at("joins_per_query")) + "," + num(s.at("aggs_per_query")) + "," +
           num(s.at("nest_depth_per_query")) + "," + num(s.at("n_parse_failures")) + "\n";
    write_file_atomic(dir / "tables" / "stats.csv", csv);
  }

  if (evaluation) {
    const auto& e = *evaluation;
    std::string acc = "group,n,accuracy,ci_lo,ci_hi\n";
    std::string buckets = "group,key,bucket,n,accuracy,ci_lo,ci_hi\n";
    std::string ner = "group,category,e_true,e_false,ner\n";
    std::map<std::string, std::string> plots;
    for (const char* group : {"original", "paraphrased"}) {
      const auto& g = e.at(group);
      acc += accuracy_row(group, g.is_null() ? ordered_json(nullptr) : g.at("accuracy"));
      if (g.is_null()) continue;
      for (const auto& [key, rows] : g.at("buckets").items()) {
        auto& plot = plots[key];
        if (plot.empty()) plot = "bucket,group,n,accuracy,ci_lo,ci_hi\n";
        for (const auto& row : rows) {
          const auto line = num(row.at("n")) + "," + num(row.at("accuracy")) + "," + num(row.at("ci95")[0]) + "," +
                            num(row.at("ci95")[1]) + "\n";
          buckets += std::string(group) + "," + key + "," + csv_field(row.at("bucket").get<std::string>()) + "," +
                     line;
          plot += csv_field(row.at("bucket").get<std::string>()) + "," + group + "," + line;
        }
      }
      for (const auto& [category, v] : g.at("ner").at("per_category").items())
        ner += std::string(group) + "," + category + "," + num(v.at("e_true")) + "," + num(v.at("e_false")) + "," +
               num(v.at("ner")) + "\n";
      const auto& pooled = g.at("ner").at("pooled");
      ner += std::string(group) + ",pooled," + num(pooled.at("e_true")) + "," + num(pooled.at("e_false")) + "," +
             num(pooled.at("ner")) + "\n";
      ner += std::string(group) + ",category_mean,,," + num(g.at("ner").at("category_mean")) + "\n";
    }
    acc += accuracy_row("paraphrased_all_variants", e.at("paraphrased_all_variants"));
    std::string headline = "metric,value\n";
    headline += "degradation," + num(e.at("degradation")) + "\n";
    headline += "confidence_score_mean," + num(e.at("confidence_score_mean")) + "\n";
    const auto& a_true = e.at("a_true");
    headline += "a_true_lo," + (a_true.is_null() ? std::string() : num(a_true[0])) + "\n";
    headline += "a_true_hi," + (a_true.is_null() ? std::string() : num(a_true[1])) + "\n";
    write_file_atomic(dir / "tables" / "accuracy.csv", acc);
    write_file_atomic(dir / "tables" / "robustness.csv", headline);
    write_file_atomic(dir / "tables" / "buckets.csv", buckets);
    write_file_atomic(dir / "tables" / "ner.csv", ner);
    for (const auto& [key, content] : plots) write_file_atomic(dir / "plots" / ("accuracy_by_" + key + ".csv"), content);
  }

  if (passk_nl2sql || passk_sql2nl) {
    std::string csv = "direction,k,pass_at_k\n";
    for (const auto* p : {&passk_nl2sql, &passk_sql2nl}) {
      if (!*p) continue;
      for (const auto& row : (*p)->at("pass_at_k"))
        csv += (*p)->at("direction").get<std::string>() + "," + num(row.at("k")) + "," + num(row.at("pass_at_k")) +
               "\n";
    }
    write_file_atomic(dir / "tables" / "passk.csv", csv);
  }

  if (linguistics) {
    std::string csv = "distribution,n,mean,median,q25,q75,min,max,ci_lo,ci_hi\n";
    for (const auto& [name, d] : linguistics->at("distributions").items()) {
      if (d.is_null()) continue;
      csv += name + "," + num(d.at("n")) + "," + num(d.at("mean")) + "," + num(d.at("median")) + "," +
             num(d.at("q25")) + "," + num(d.at("q75")) + "," + num(d.at("min")) + "," + num(d.at("max")) + "," +
             num(d.at("ci95")[0]) + "," + num(d.at("ci95")[1]) + "\n";
      const auto kde = output_path(config, stage_files::kde_dir) / (name + ".csv");
      if (std::filesystem::is_regular_file(kde))
        write_file_atomic(dir / "plots" / ("kde_" + name + ".csv"), read_file(kde));
    }
    write_file_atomic(dir / "tables" / "linguistics.csv", csv);
  }

  log << "report: written to " << stage_files::report_dir << "/report.json";
  if (!missing.empty()) {
    log << " (missing:";
    for (const auto& m : missing) log << " " << m;
    log << ")";
  }
  log << "\n";
  return exit_code::success;
}

}  // namespace sqlprobe

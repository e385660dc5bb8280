#include "sqlprobe/llm.hpp"

#include "sqlprobe/util.hpp"

#include <cctype>
#include <regex>

namespace sqlprobe {

const std::string_view paraphrase_prompt_template =
    R"(Given the following database schema and an SQL query, generate {num_queries} distinct natural language questions that describe the purpose and output of the SQL query.

{schema_definitions}

SQL Query:
{sql_query}

Instructions:
1. Generate {num_queries} natural language questions that reflect the intent of the SQL query.
2. Each question should vary in phrasing, structure, and wording, but all questions must remain logically equivalent.
3. Do not include explanations, task descriptions, or any additional comments in the output.

Output Format:
1. <First question>
2. <Second question>
...
{num_queries}. <Nth question>.)";

const std::string_view default_nl2sql_prompt_template =
    R"(Given the following database schema, write a single {dialect} SQL query that answers the question.

{schema_definitions}

Question:
{question}

Output exactly one SQL statement, either bare or inside a ```sql fenced block, with no explanation.)";

namespace {

bool is_identifier(std::string_view s)
{
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto key = tmpl.substr(i + 1, close - i - 1);
        if (is_identifier(key)) {
          auto it = values.find(std::string(key));
          if (it == values.end()) throw TemplateError(std::string(key));
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
    ++i;
  }
  return out;
}

std::string render_schema_definitions(const DatabaseSchema& schema)
{
  std::string out;
  for (const auto& table : schema.tables) {
    if (!out.empty()) out += "\n\n";
    out += "CREATE TABLE " + table.name + " (\n";
    std::vector<std::string> lines;
    for (const auto& col : table.columns) lines.push_back("  " + col.name + " " + col.type);
    std::string pk;
    for (const auto& key : schema.primary_keys) {
      if (!iequals(key.table, table.name)) continue;
      if (!pk.empty()) pk += ", ";
      pk += key.column;
    }
    if (!pk.empty()) lines.push_back("  PRIMARY KEY (" + pk + ")");
    for (const auto& [from, to] : schema.foreign_keys) {
      if (!iequals(from.table, table.name)) continue;
      lines.push_back("  FOREIGN KEY (" + from.column + ") REFERENCES " + to.table + "(" + to.column + ")");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out += lines[i];
      out += i + 1 < lines.size() ? ",\n" : "\n";
    }
    out += ");";
  }
  return out;
}

std::string render_paraphrase_prompt(const DatabaseSchema& schema, std::string_view sql, int num_queries)
{
  if (num_queries < 1) throw std::invalid_argument("num_queries must be at least 1");
  return render_template(paraphrase_prompt_template, {{"num_queries", std::to_string(num_queries)},
                                                      {"schema_definitions", render_schema_definitions(schema)},
                                                      {"sql_query", std::string(sql)}});
}

std::string render_nl2sql_prompt(const DatabaseSchema& schema, std::string_view question, sql::Dialect dialect,
                                 std::optional<std::string_view> custom_template)
{
  if (trim(question).empty()) throw std::invalid_argument("question must be non-empty");
  const auto tmpl = custom_template.value_or(default_nl2sql_prompt_template);
  return render_template(tmpl, {{"schema_definitions", render_schema_definitions(schema)},
                                {"question", std::string(question)},
                                {"dialect", dialect == sql::Dialect::sqlite ? "SQLite" : "ANSI"}});
}

std::vector<std::string> extract_numbered_items(std::string_view text)
{
  static const std::regex item_re(R"(^\s*(\d+)\.\s+(.*\S)\s*$)");
  std::map<long long, std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    std::smatch m;
    if (std::regex_match(line, m, item_re)) {
      const auto index = std::stoll(m[1].str());
      if (!items.emplace(index, trim(m[2].str())).second)
        throw NumberedListError("duplicate list index " + std::to_string(index), items.size());
    }
    start = end + 1;
  }
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [index, content] : items) out.push_back(std::move(content));
  return out;
}

std::vector<std::string> parse_numbered_list(std::string_view text, std::size_t expected_n)
{
  auto items = extract_numbered_items(text);
  if (items.size() < expected_n)
    throw NumberedListError("expected " + std::to_string(expected_n) + " numbered items, found " +
                                std::to_string(items.size()),
                            items.size());
  return items;
}

namespace {

// Cuts at the first semicolon outside quotes.
std::string first_statement(std::string_view sql)
{
  char quote = 0;
  for (std::size_t i = 0; i < sql.size(); ++i) {
    const char c = sql[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"' || c == '`') {
      quote = c;
    } else if (c == ';') {
      return trim(sql.substr(0, i));
    }
  }
  return trim(sql);
}

}  // namespace

std::string extract_sql(std::string_view output)
{
  const auto fence = output.find("```");
  if (fence != std::string_view::npos) {
    auto body_start = output.find('\n', fence + 3);
    if (body_start == std::string_view::npos) return {};
    ++body_start;
    auto body_end = output.find("```", body_start);
    if (body_end == std::string_view::npos) body_end = output.size();
    return first_statement(output.substr(body_start, body_end - body_start));
  }
  // skip chatty preambles such as "Here is the query:"
  static const std::regex start_re(R"(\b(select|with)\b)", std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(output.begin(), output.end(), m, start_re))
    output = output.substr(static_cast<std::size_t>(m.position(0)));
  return first_statement(output);
}

}  // namespace sqlprobe

#include "sqlprobe/dataset.hpp"

#include "sqlprobe/sql/analysis.hpp"
#include "sqlprobe/util.hpp"

#include <json.hpp>

#include <numeric>
#include <set>
#include <vector>

namespace sqlprobe {

using nlohmann::json;

DatasetFormat parse_dataset_format(std::string_view name)
{
  const auto lower = to_lower(name);
  if (lower == "spider") return DatasetFormat::spider;
  if (lower == "bird") return DatasetFormat::bird;
  if (lower == "fiben") return DatasetFormat::fiben;
  throw std::invalid_argument("unknown dataset format: " + std::string(name));
}

std::string_view to_string(DatasetFormat format)
{
  switch (format) {
    case DatasetFormat::spider: return "spider";
    case DatasetFormat::bird: return "bird";
    case DatasetFormat::fiben: return "fiben";
  }
  return "unknown";
}

const ColumnDef* TableDef::find_column(std::string_view column) const
{
  const auto key = canonical_name(column);
  for (const auto& c : columns) {
    if (to_lower(c.name) == key) return &c;
  }
  return nullptr;
}

const TableDef* DatabaseSchema::find_table(std::string_view table) const
{
  const auto key = canonical_name(table);
  for (const auto& t : tables) {
    if (to_lower(t.name) == key) return &t;
  }
  return nullptr;
}

void DatabaseSchema::validate() const
{
  std::set<std::string> seen;
  for (const auto& t : tables) {
    if (!seen.insert(to_lower(t.name)).second)
      throw DatasetError("schema " + db_id + ": duplicate table name '" + t.name + "'");
  }
  auto check = [&](const ColumnRef& ref, const char* what) {
    const TableDef* t = find_table(ref.table);
    if (!t || !t->find_column(ref.column))
      throw DatasetError("schema " + db_id + ": " + what + " references missing column " + ref.table + "." +
                         ref.column);
  };
  for (const auto& pk : primary_keys) check(pk, "primary key");
  for (const auto& [from, to] : foreign_keys) {
    check(from, "foreign key");
    check(to, "foreign key");
  }
}

namespace {

json parse_json_file(const std::filesystem::path& path)
{
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw DatasetError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatasetError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

// First present string field among the candidates; empty optional when none.
std::optional<std::string> string_field(const json& record, const std::vector<const char*>& keys)
{
  for (const char* key : keys) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return std::nullopt;
}

struct FieldNames {
  std::vector<const char*> id;
  std::vector<const char*> db_id;
  std::vector<const char*> question;
  std::vector<const char*> sql;
  const char* sql_label;
};

FieldNames field_names(DatasetFormat format)
{
  switch (format) {
    case DatasetFormat::spider:
      return {{"id"}, {"db_id"}, {"question"}, {"query"}, "query"};
    case DatasetFormat::bird:
      return {{"id", "question_id"}, {"db_id"}, {"question"}, {"SQL", "sql"}, "SQL"};
    case DatasetFormat::fiben:
      return {{"id", "question_id"}, {"db_id"}, {"question", "nl", "text"}, {"sql", "SQL", "query"}, "sql"};
  }
  throw std::logic_error("unhandled format");
}

}  // namespace

std::vector<DatasetExample> load_examples(const std::filesystem::path& path, DatasetFormat format)
{
  const json doc = parse_json_file(path);
  if (!doc.is_array()) throw DatasetError(path.string() + ": expected a JSON list of records");

  const auto names = field_names(format);
  const auto prefix = std::string(to_string(format));
  std::vector<DatasetExample> out;
  out.reserve(doc.size());
  std::set<std::string> ids;

  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& record = doc[i];
    auto missing = [&](const std::string& field) {
      return DatasetError(path.string() + ": record " + std::to_string(i) + " is missing field '" + field + "'");
    };
    if (!record.is_object()) throw DatasetError(path.string() + ": record " + std::to_string(i) + " is not an object");

    DatasetExample ex;
    ex.id = string_field(record, names.id).value_or(prefix + "-" + std::to_string(i));
    auto db = string_field(record, names.db_id);
    if (!db) {
      // FIBEN ships a single database
      if (format != DatasetFormat::fiben) throw missing("db_id");
      db = "fiben";
    }
    ex.db_id = *db;
    auto question = string_field(record, names.question);
    if (!question) throw missing("question");
    ex.question = *question;
    auto sql = string_field(record, names.sql);
    if (!sql || trim(*sql).empty()) throw missing(names.sql_label);
    ex.gold_sql = *sql;
    if (!ids.insert(ex.id).second)
      throw DatasetError(path.string() + ": duplicate example id '" + ex.id + "' at record " + std::to_string(i));
    out.push_back(std::move(ex));
  }
  return out;
}

SchemaMap load_schemas(const std::filesystem::path& path, const std::optional<std::filesystem::path>& db_root)
{
  const json doc = parse_json_file(path);
  if (!doc.is_array()) throw DatasetError(path.string() + ": expected a JSON list of schemas");

  SchemaMap out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    const std::string where = path.string() + ": schema " + std::to_string(i);
    try {
      DatabaseSchema schema;
      schema.db_id = entry.at("db_id").get<std::string>();
      const auto& table_names = entry.contains("table_names_original") ? entry.at("table_names_original")
                                                                        : entry.at("table_names");
      const auto& column_names = entry.contains("column_names_original") ? entry.at("column_names_original")
                                                                          : entry.at("column_names");
      json column_types = entry.value("column_types", json::array());

      for (const auto& name : table_names) schema.tables.push_back({name.get<std::string>(), {}});

      // global column index (as used by key lists) -> reference; index of "*" stays empty
      std::vector<std::optional<ColumnRef>> by_index;
      for (std::size_t c = 0; c < column_names.size(); ++c) {
        const auto table_index = column_names[c].at(0).get<long long>();
        const auto column_name = column_names[c].at(1).get<std::string>();
        if (table_index < 0) {
          by_index.emplace_back();
          continue;
        }
        if (table_index >= static_cast<long long>(schema.tables.size()))
          throw DatasetError(where + " (" + schema.db_id + "): column " + std::to_string(c) + " '" + column_name +
                             "' references table index " + std::to_string(table_index) + " but only " +
                             std::to_string(schema.tables.size()) + " tables exist");
        auto& table = schema.tables[static_cast<std::size_t>(table_index)];
        const std::string type = c < column_types.size() ? column_types[c].get<std::string>() : "text";
        table.columns.push_back({column_name, type});
        by_index.push_back(ColumnRef{table.name, column_name});
      }

      auto resolve = [&](const json& idx) -> ColumnRef {
        const auto k = idx.get<long long>();
        if (k < 0 || k >= static_cast<long long>(by_index.size()) || !by_index[static_cast<std::size_t>(k)])
          throw DatasetError(where + " (" + schema.db_id + "): key references invalid column index " +
                             std::to_string(k));
        return *by_index[static_cast<std::size_t>(k)];
      };
      for (const auto& pk : entry.value("primary_keys", json::array())) {
        if (pk.is_array()) {
          for (const auto& part : pk) schema.primary_keys.push_back(resolve(part));
        } else {
          schema.primary_keys.push_back(resolve(pk));
        }
      }
      for (const auto& fk : entry.value("foreign_keys", json::array()))
        schema.foreign_keys.emplace_back(resolve(fk.at(0)), resolve(fk.at(1)));

      if (db_root) schema.db_file = *db_root / schema.db_id / (schema.db_id + ".sqlite");
      schema.validate();
      const std::string id = schema.db_id;
      if (!out.emplace(id, std::move(schema)).second) throw DatasetError(path.string() + ": duplicate db_id '" + id + "'");
    } catch (const json::exception& e) {
      throw DatasetError(where + ": malformed entry: " + e.what());
    }
  }
  return out;
}

DatasetStats compute_dataset_stats(const std::vector<DatasetExample>& examples, const SchemaMap& schemas)
{
  return compute_dataset_stats(examples, schemas, StructureOptions{});
}

DatasetStats compute_dataset_stats(const std::vector<DatasetExample>& examples, const SchemaMap& schemas,
                                   const StructureOptions& options)
{
  if (examples.empty()) throw DatasetError("empty dataset");

  DatasetStats stats;
  stats.n_queries = examples.size();

  std::set<std::string> db_ids;
  long long joins = 0;
  long long aggs = 0;
  long long depth = 0;
  std::size_t parsed = 0;
  for (const auto& ex : examples) {
    db_ids.insert(ex.db_id);
    try {
      const auto s = analyze_structure(ex.gold_sql, options);
      joins += s.join_count;
      aggs += s.agg_count;
      depth += s.nest_depth;
      ++parsed;
    } catch (const std::exception&) {
      ++stats.n_parse_failures;
      stats.failed_example_ids.push_back(ex.id);
    }
  }
  if (parsed > 0) {
    stats.joins_per_query = static_cast<double>(joins) / static_cast<double>(parsed);
    stats.aggs_per_query = static_cast<double>(aggs) / static_cast<double>(parsed);
    stats.nest_depth_per_query = static_cast<double>(depth) / static_cast<double>(parsed);
  }

  stats.n_dbs = db_ids.size();
  std::size_t tables = 0;
  std::size_t columns = 0;
  std::size_t known_dbs = 0;
  for (const auto& id : db_ids) {
    auto it = schemas.find(id);
    if (it == schemas.end()) continue;
    ++known_dbs;
    tables += it->second.tables.size();
    for (const auto& t : it->second.tables) columns += t.columns.size();
  }
  if (known_dbs > 0) stats.tables_per_db = static_cast<double>(tables) / static_cast<double>(known_dbs);
  if (tables > 0) stats.cols_per_table = static_cast<double>(columns) / static_cast<double>(tables);
  return stats;
}

std::vector<DatasetExample> sample_examples(const std::vector<DatasetExample>& examples, std::size_t n,
                                            std::uint64_t seed)
{
  if (n > examples.size())
    throw DatasetError("cannot sample " + std::to_string(n) + " of " + std::to_string(examples.size()) + " examples");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<DatasetExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(examples[order[i]]);
  return out;
}

}  // namespace sqlprobe

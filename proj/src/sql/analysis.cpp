#include "sqlprobe/sql/analysis.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>
#include <array>
#include <deque>

namespace sqlprobe {

using sql::Expr;
using sql::ExprKind;
using sql::FromItem;
using sql::Query;
using sql::SelectCore;
using sql::TableRef;

JoinCounting parse_join_counting(std::string_view name)
{
  const auto lower = to_lower(name);
  if (lower == "all") return JoinCounting::all;
  if (lower == "explicit") return JoinCounting::explicit_only;
  throw std::invalid_argument("unknown join counting mode: " + std::string(name));
}

namespace {

bool is_aggregate(std::string_view fn)
{
  static constexpr std::array<std::string_view, 5> names = {"COUNT", "SUM", "AVG", "MIN", "MAX"};
  return std::find(names.begin(), names.end(), fn) != names.end();
}

// ---------------------------------------------------------------------------
// structure

class StructureWalker {
 public:
  explicit StructureWalker(JoinCounting joins) : joins_(joins) {}

  QueryStructure run(const Query& q)
  {
    query(q, 1);
    out_.has_nested = out_.nest_depth > 1;
    return out_;
  }

 private:
  void query(const Query& q, int depth)
  {
    out_.nest_depth = std::max(out_.nest_depth, depth);
    for (const auto& branch : q.branches) {
      if (branch.parenthesized) {
        query(*branch.parenthesized, depth);
      } else {
        core(branch, depth);
      }
    }
    if (!q.order_by.empty()) out_.has_order_by = true;
    for (const auto& item : q.order_by) expr(item.expr, depth);
    if (q.limit) expr(*q.limit, depth);
    if (q.offset) expr(*q.offset, depth);
  }

  void core(const SelectCore& c, int depth)
  {
    for (const auto& item : c.projections) expr(item.expr, depth);
    for (const auto& item : c.from) from_item(item, depth);
    if (joins_ == JoinCounting::all && c.from.size() > 1)
      out_.join_count += static_cast<int>(c.from.size()) - 1;
    if (c.where) expr(*c.where, depth);
    if (!c.group_by.empty()) out_.has_group_by = true;
    for (const auto& e : c.group_by) expr(e, depth);
    if (c.having) {
      out_.has_having = true;
      expr(*c.having, depth);
    }
  }

  void from_item(const FromItem& item, int depth)
  {
    table_ref(item.first, depth);
    out_.join_count += static_cast<int>(item.joins.size());
    for (const auto& join : item.joins) {
      table_ref(join.right, depth);
      if (join.on) expr(*join.on, depth);
    }
  }

  void table_ref(const TableRef& ref, int depth)
  {
    if (ref.subquery) query(*ref.subquery, depth + 1);
    if (ref.nested) from_item(*ref.nested, depth);
  }

  void expr(const Expr& e, int depth)
  {
    if (e.kind == ExprKind::function && is_aggregate(e.text)) ++out_.agg_count;
    if (e.subquery) query(*e.subquery, depth + 1);
    for (const auto& arg : e.args) expr(arg, depth);
  }

  JoinCounting joins_;
  QueryStructure out_;
};

// ---------------------------------------------------------------------------
// schema elements

struct Relation {
  std::string key;                 // alias, or the table name when unaliased
  std::string table;               // lowercase table name; empty for derived tables
  const TableDef* def = nullptr;   // null for derived or unknown tables
  bool derived = false;
  std::vector<std::string> outputs;  // derived table result column names

  bool owns(const std::string& column) const
  {
    if (def) return def->find_column(column) != nullptr;
    if (derived) return std::find(outputs.begin(), outputs.end(), column) != outputs.end();
    return false;
  }
};

struct Scope {
  std::vector<Relation> relations;
  std::vector<std::string> aliases;  // projection aliases, lowercase
  const Scope* parent = nullptr;

  bool has_alias(const std::string& name) const
  {
    return std::find(aliases.begin(), aliases.end(), name) != aliases.end();
  }
};

class ElementExtractor {
 public:
  ElementExtractor(const DatabaseSchema& schema, sql::Dialect dialect) : schema_(schema), dialect_(dialect) {}

  SchemaElementSet run(const Query& q)
  {
    query(q, nullptr);
    return std::move(out_);
  }

 private:
  // Returns the result column names, used when q is a derived table.
  std::vector<std::string> query(const Query& q, const Scope* parent)
  {
    std::vector<std::string> outputs;
    const Scope* first_scope = nullptr;
    for (std::size_t i = 0; i < q.branches.size(); ++i) {
      const auto& branch = q.branches[i];
      if (branch.parenthesized) {
        auto inner = query(*branch.parenthesized, parent);
        if (i == 0) outputs = std::move(inner);
        continue;
      }
      Scope& scope = scopes_.emplace_back();
      scope.parent = parent;
      auto inner = core(branch, scope);
      if (i == 0) {
        outputs = std::move(inner);
        first_scope = &scope;
      }
    }
    // ORDER BY of a compound binds to the first branch's names.
    Scope empty;
    empty.parent = parent;
    const Scope& order_scope = first_scope ? *first_scope : empty;
    for (const auto& item : q.order_by) expr(item.expr, order_scope, true);
    if (q.limit) expr(*q.limit, order_scope, false);
    if (q.offset) expr(*q.offset, order_scope, false);
    return outputs;
  }

  std::vector<std::string> core(const SelectCore& c, Scope& scope)
  {
    std::vector<const Expr*> conditions;
    for (const auto& item : c.from) from_item(item, scope, conditions);

    for (const auto& item : c.projections) {
      if (!item.alias.empty()) scope.aliases.push_back(canonical_name(item.alias));
    }

    std::vector<std::string> outputs;
    for (const auto& item : c.projections) {
      if (item.expr.kind == ExprKind::star) {
        expand_star(item.expr.qualifier, scope, outputs);
        continue;
      }
      expr(item.expr, scope, false);
      if (!item.alias.empty()) {
        outputs.push_back(canonical_name(item.alias));
      } else if (item.expr.kind == ExprKind::column) {
        outputs.push_back(canonical_name(item.expr.name));
      } else {
        outputs.emplace_back();
      }
    }
    for (const Expr* cond : conditions) expr(*cond, scope, false);
    if (c.where) expr(*c.where, scope, false);
    for (const auto& e : c.group_by) expr(e, scope, true);
    if (c.having) expr(*c.having, scope, true);
    return outputs;
  }

  void from_item(const FromItem& item, Scope& scope, std::vector<const Expr*>& conditions)
  {
    const std::size_t left_begin = scope.relations.size();
    table_ref(item.first, scope, conditions);
    for (const auto& join : item.joins) {
      table_ref(join.right, scope, conditions);
      if (join.on) conditions.push_back(&*join.on);
      for (const auto& raw : join.using_columns) {
        const auto column = canonical_name(raw);
        bool found = false;
        for (std::size_t i = left_begin; i < scope.relations.size(); ++i) {
          const auto& rel = scope.relations[i];
          if (!rel.owns(column)) continue;
          found = true;
          if (rel.def) record_column(rel, column);
        }
        if (!found) out_.diagnostics.unresolved_columns.push_back(column);
      }
    }
  }

  void table_ref(const TableRef& ref, Scope& scope, std::vector<const Expr*>& conditions)
  {
    if (ref.nested) {
      from_item(*ref.nested, scope, conditions);
      return;
    }
    Relation rel;
    if (ref.subquery) {
      rel.derived = true;
      rel.outputs = query(*ref.subquery, scope.parent);
      rel.key = canonical_name(ref.alias);
      scope.relations.push_back(std::move(rel));
      return;
    }
    const auto written = canonical_name(ref.name);
    rel.def = schema_.find_table(written);
    rel.table = rel.def ? to_lower(rel.def->name) : written;
    rel.key = ref.alias.empty() ? rel.table : canonical_name(ref.alias);
    if (!rel.def) out_.diagnostics.unknown_tables.push_back(written);
    out_.tables.insert(rel.table);
    scope.relations.push_back(std::move(rel));
  }

  void expand_star(const std::string& qualifier, const Scope& scope, std::vector<std::string>& outputs)
  {
    auto expand = [&](const Relation& rel) {
      if (rel.def) {
        for (const auto& col : rel.def->columns) {
          const auto name = to_lower(col.name);
          record_column(rel, name);
          outputs.push_back(name);
        }
      } else if (rel.derived) {
        outputs.insert(outputs.end(), rel.outputs.begin(), rel.outputs.end());
      }
    };
    if (qualifier.empty()) {
      for (const auto& rel : scope.relations) expand(rel);
      return;
    }
    const auto key = canonical_name(qualifier);
    if (const Relation* rel = find_relation(key, scope)) {
      expand(*rel);
    } else {
      out_.diagnostics.unresolved_columns.push_back(key + ".*");
    }
  }

  static const Relation* find_relation(const std::string& key, const Scope& scope)
  {
    for (const Scope* s = &scope; s; s = s->parent) {
      for (const auto& rel : s->relations) {
        if (rel.key == key) return &rel;
      }
      // tolerate qualifying an aliased table by its real name
      for (const auto& rel : s->relations) {
        if (!rel.table.empty() && rel.table == key) return &rel;
      }
    }
    return nullptr;
  }

  void record_column(const Relation& rel, const std::string& column)
  {
    out_.columns.insert(rel.table + "." + column);
  }

  void expr(const Expr& e, const Scope& scope, bool aliases_first)
  {
    if (e.kind == ExprKind::column) column(e, scope, aliases_first);
    if (e.subquery) query(*e.subquery, &scope);
    for (const auto& arg : e.args) expr(arg, scope, aliases_first);
  }

  void column(const Expr& e, const Scope& scope, bool aliases_first)
  {
    const auto name = canonical_name(e.name);
    if (!e.qualifier.empty()) {
      const auto qualifier = canonical_name(e.qualifier);
      const Relation* rel = find_relation(qualifier, scope);
      if (!rel) {
        out_.diagnostics.unresolved_columns.push_back(qualifier + "." + name);
      } else if (rel->def) {
        if (rel->def->find_column(name)) {
          record_column(*rel, name);
        } else {
          out_.diagnostics.unresolved_columns.push_back(qualifier + "." + name);
        }
      } else if (!rel->derived) {
        // table missing from the schema: keep the reference as written
        record_column(*rel, name);
      }
      return;
    }

    if (aliases_first && scope.has_alias(name)) return;
    for (const Scope* s = &scope; s; s = s->parent) {
      std::vector<const Relation*> owners;
      for (const auto& rel : s->relations) {
        if (!rel.owns(name)) continue;
        // a self-join owns the column once per table, not per alias
        const bool seen = std::any_of(owners.begin(), owners.end(), [&](const Relation* o) {
          return o->def && rel.def && o->def == rel.def;
        });
        if (!seen) owners.push_back(&rel);
      }
      if (owners.size() == 1) {
        if (owners.front()->def) record_column(*owners.front(), name);
        return;
      }
      if (owners.size() > 1) {
        out_.diagnostics.ambiguous_columns.push_back(name);
        return;
      }
      if (s->has_alias(name)) return;
    }
    if (e.double_quoted && dialect_ == sql::Dialect::sqlite) return;  // string literal
    out_.diagnostics.unresolved_columns.push_back(name);
  }

  const DatabaseSchema& schema_;
  sql::Dialect dialect_;
  SchemaElementSet out_;
  std::deque<Scope> scopes_;  // stable addresses for parent links
};

}  // namespace

QueryStructure analyze_structure(const sql::Query& query, JoinCounting joins)
{
  return StructureWalker(joins).run(query);
}

QueryStructure analyze_structure(std::string_view sql, const StructureOptions& options)
{
  return analyze_structure(sql::parse_sql(sql, options.dialect), options.joins);
}

SchemaElementSet extract_schema_elements(const sql::Query& query, const DatabaseSchema& schema,
                                         sql::Dialect dialect)
{
  return ElementExtractor(schema, dialect).run(query);
}

SchemaElementSet extract_schema_elements(std::string_view sql, const DatabaseSchema& schema,
                                         sql::Dialect dialect)
{
  return extract_schema_elements(sql::parse_sql(sql, dialect), schema, dialect);
}

SchemaErrorCounts diff_schema_elements(const SchemaElementSet& predicted, const SchemaElementSet& gold)
{
  auto count_missing = [](const std::set<std::string>& from, const std::set<std::string>& in) {
    return static_cast<int>(std::count_if(from.begin(), from.end(),
                                          [&](const std::string& x) { return !in.contains(x); }));
  };
  SchemaErrorCounts counts;
  counts.missing_columns = count_missing(gold.columns, predicted.columns);
  counts.extra_columns = count_missing(predicted.columns, gold.columns);
  counts.missing_tables = count_missing(gold.tables, predicted.tables);
  counts.extra_tables = count_missing(predicted.tables, gold.tables);
  return counts;
}

}  // namespace sqlprobe

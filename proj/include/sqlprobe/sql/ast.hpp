#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sqlprobe::sql {

struct Query;
struct FromItem;

enum class ExprKind {
  literal,      // number, string, NULL, TRUE/FALSE, CURRENT_*
  column,       // [qualifier.]name
  star,         // [qualifier.]* inside a projection or function argument
  function,     // name(args); aggregates included
  unary,        // op args[0]
  binary,       // args[0] op args[1]
  between,      // args[0] BETWEEN args[1] AND args[2]
  in_list,      // args[0] IN (args[1..])
  in_subquery,  // args[0] IN (subquery)
  exists,       // EXISTS (subquery)
  subquery,     // scalar (subquery)
  case_when,    // CASE [args[0] if has_operand] WHEN/THEN pairs [ELSE]
  cast,         // CAST(args[0] AS text)
  is_null,      // args[0] IS [NOT] NULL
  like,         // args[0] LIKE/GLOB/REGEXP args[1] [ESCAPE args[2]]
  collate,      // args[0] COLLATE text
  row,          // (args...)
};

struct Expr {
  ExprKind kind = ExprKind::literal;
  /// Literal text, operator, function name (uppercased), or type name.
  std::string text;
  /// Table qualifier for column / star references.
  std::string qualifier;
  /// Column name for column references.
  std::string name;
  /// Column written as a double-quoted token; SQLite falls back to a string
  /// literal when no column of that name is in scope.
  bool double_quoted = false;
  bool negated = false;
  bool distinct = false;
  bool has_operand = false;
  bool has_else = false;
  std::vector<Expr> args;
  std::shared_ptr<Query> subquery;
  std::size_t offset = 0;
};

enum class JoinType { inner, left, right, full, cross, natural };

struct TableRef {
  std::string name;  // schema table name as written (empty for derived tables)
  std::string alias;
  std::shared_ptr<Query> subquery;
  /// Parenthesized join tree "( a JOIN b ... )".
  std::shared_ptr<FromItem> nested;
};

struct JoinClause {
  JoinType type = JoinType::inner;
  TableRef right;
  std::optional<Expr> on;
  std::vector<std::string> using_columns;
};

/// One comma-separated element of FROM: a relation followed by explicit joins.
struct FromItem {
  TableRef first;
  std::vector<JoinClause> joins;
};

struct SelectItem {
  Expr expr;
  std::string alias;
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> projections;
  std::vector<FromItem> from;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  /// Set when this branch is a parenthesized query; the fields above are unused.
  std::shared_ptr<Query> parenthesized;
};

enum class SetOperator { union_distinct, union_all, intersect, except };

struct OrderItem {
  Expr expr;
  bool descending = false;
};

struct Query {
  std::vector<SelectCore> branches;  // at least one
  std::vector<SetOperator> operators;  // branches.size() - 1
  std::vector<OrderItem> order_by;
  std::optional<Expr> limit;
  std::optional<Expr> offset;
};

}  // namespace sqlprobe::sql

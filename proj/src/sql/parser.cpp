#include "sqlprobe/sql/parser.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>
#include <array>

namespace sqlprobe::sql {

Dialect parse_dialect(std::string_view name)
{
  const auto lower = to_lower(name);
  if (lower == "sqlite") return Dialect::sqlite;
  if (lower == "ansi") return Dialect::ansi;
  throw std::invalid_argument("unknown SQL dialect: " + std::string(name));
}

namespace {

// Words that never start or continue an identifier in clause positions.
constexpr std::array<std::string_view, 52> reserved_words = {
    "SELECT",  "FROM",    "WHERE",   "GROUP",   "HAVING", "ORDER",   "LIMIT",   "OFFSET",
    "UNION",   "INTERSECT", "EXCEPT", "JOIN",   "INNER",  "LEFT",    "RIGHT",   "FULL",
    "CROSS",   "NATURAL", "OUTER",   "ON",      "USING",  "AND",     "OR",      "NOT",
    "AS",      "BY",      "IN",      "IS",      "LIKE",   "GLOB",    "REGEXP",  "MATCH",
    "BETWEEN", "CASE",    "WHEN",    "THEN",    "ELSE",   "END",     "EXISTS",  "NULL",
    "DISTINCT", "ALL",    "ASC",     "DESC",    "COLLATE", "ESCAPE", "CAST",    "WINDOW",
    "WITH",    "VALUES",  "ISNULL",  "NOTNULL",
};

bool is_reserved(std::string_view word)
{
  return std::any_of(reserved_words.begin(), reserved_words.end(),
                     [&](std::string_view r) { return iequals(r, word); });
}

std::string upper(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, Dialect dialect) : tokens_(std::move(tokens)), dialect_(dialect) {}

  Query statement()
  {
    if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
    if (peek_kw("VALUES")) throw UnsupportedConstruct("VALUES statement", cur().offset);
    if (!peek_kw("SELECT") && !peek_sym("("))
      throw SyntaxError("expected SELECT near '" + cur().text + "'", cur().offset);
    Query q = query();
    while (accept_sym(";")) {
    }
    if (cur().kind != TokenKind::end) {
      if (peek_kw("SELECT")) throw SyntaxError("multiple statements", cur().offset);
      throw SyntaxError("unexpected token '" + cur().text + "'", cur().offset);
    }
    return q;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  const Token& ahead(std::size_t k) const { return tokens_[std::min(pos_ + k, tokens_.size() - 1)]; }
  void advance()
  {
    if (pos_ + 1 < tokens_.size()) ++pos_;
  }

  static bool is_kw(const Token& t, std::string_view kw)
  {
    return t.kind == TokenKind::identifier && iequals(t.text, kw);
  }
  bool peek_kw(std::string_view kw) const { return is_kw(cur(), kw); }
  bool peek_sym(std::string_view s) const { return cur().kind == TokenKind::symbol && cur().text == s; }
  static bool is_sym(const Token& t, std::string_view s) { return t.kind == TokenKind::symbol && t.text == s; }

  bool accept_kw(std::string_view kw)
  {
    if (!peek_kw(kw)) return false;
    advance();
    return true;
  }
  bool accept_sym(std::string_view s)
  {
    if (!peek_sym(s)) return false;
    advance();
    return true;
  }
  void expect_kw(std::string_view kw)
  {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  void expect_sym(std::string_view s)
  {
    if (!accept_sym(s)) fail("expected '" + std::string(s) + "'");
  }
  [[noreturn]] void fail(const std::string& what) const
  {
    const auto& t = cur();
    const std::string near = t.kind == TokenKind::end ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(what + " near " + near, t.offset);
  }

  static bool is_name_token(const Token& t)
  {
    switch (t.kind) {
      case TokenKind::identifier:
        return !is_reserved(t.text);
      case TokenKind::quoted_identifier:
      case TokenKind::double_quoted:
        return true;
      default:
        return false;
    }
  }

  std::string name()
  {
    if (!is_name_token(cur())) fail("expected identifier");
    std::string text = cur().text;
    advance();
    return text;
  }

  std::string optional_alias()
  {
    if (accept_kw("AS")) {
      if (cur().kind == TokenKind::string) {
        std::string text = cur().text;
        advance();
        return text;
      }
      return name();
    }
    if (is_name_token(cur())) return name();
    return {};
  }

  bool starts_query(std::size_t k) const
  {
    const Token& t = ahead(k);
    if (is_kw(t, "SELECT")) return true;
    if (is_kw(t, "WITH") || is_kw(t, "VALUES")) return true;
    return is_sym(t, "(") && starts_query(k + 1);
  }

  Query query()
  {
    Query q;
    q.branches.push_back(branch());
    while (true) {
      if (accept_kw("UNION")) {
        q.operators.push_back(accept_kw("ALL") ? SetOperator::union_all : SetOperator::union_distinct);
      } else if (accept_kw("INTERSECT")) {
        q.operators.push_back(SetOperator::intersect);
      } else if (accept_kw("EXCEPT")) {
        q.operators.push_back(SetOperator::except);
      } else {
        break;
      }
      q.branches.push_back(branch());
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        OrderItem item{expr(), false};
        if (accept_kw("DESC")) {
          item.descending = true;
        } else {
          accept_kw("ASC");
        }
        if (accept_kw("NULLS")) {
          if (!accept_kw("FIRST") && !accept_kw("LAST")) fail("expected FIRST or LAST");
        }
        q.order_by.push_back(std::move(item));
      } while (accept_sym(","));
    }
    if (accept_kw("LIMIT")) {
      Expr first = expr();
      if (accept_kw("OFFSET")) {
        q.limit = std::move(first);
        q.offset = expr();
      } else if (accept_sym(",")) {
        q.offset = std::move(first);
        q.limit = expr();
      } else {
        q.limit = std::move(first);
      }
    }
    return q;
  }

  SelectCore branch()
  {
    if (peek_sym("(") && starts_query(1)) {
      advance();
      if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
      SelectCore core;
      core.parenthesized = std::make_shared<Query>(query());
      expect_sym(")");
      return core;
    }
    if (peek_kw("VALUES")) throw UnsupportedConstruct("VALUES clause", cur().offset);
    return select_core();
  }

  SelectCore select_core()
  {
    SelectCore core;
    expect_kw("SELECT");
    if (accept_kw("DISTINCT")) {
      core.distinct = true;
    } else {
      accept_kw("ALL");
    }
    do {
      core.projections.push_back(select_item());
    } while (accept_sym(","));

    if (accept_kw("FROM")) {
      do {
        core.from.push_back(from_item());
      } while (accept_sym(","));
    }
    if (accept_kw("WHERE")) core.where = expr();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        core.group_by.push_back(expr());
      } while (accept_sym(","));
    }
    if (accept_kw("HAVING")) core.having = expr();
    if (peek_kw("WINDOW")) throw UnsupportedConstruct("WINDOW clause", cur().offset);
    return core;
  }

  SelectItem select_item()
  {
    const std::size_t offset = cur().offset;
    if (accept_sym("*")) {
      Expr star;
      star.kind = ExprKind::star;
      star.offset = offset;
      return {std::move(star), {}};
    }
    if (is_name_token(cur()) && is_sym(ahead(1), ".") && is_sym(ahead(2), "*")) {
      Expr star;
      star.kind = ExprKind::star;
      star.qualifier = cur().text;
      star.offset = offset;
      advance();
      advance();
      advance();
      return {std::move(star), {}};
    }
    SelectItem item{expr(), {}};
    item.alias = optional_alias();
    return item;
  }

  std::optional<JoinType> join_operator()
  {
    const std::size_t save = pos_;
    if (accept_kw("JOIN")) return JoinType::inner;
    if (accept_kw("INNER")) {
      expect_kw("JOIN");
      return JoinType::inner;
    }
    if (accept_kw("CROSS")) {
      expect_kw("JOIN");
      return JoinType::cross;
    }
    bool natural = accept_kw("NATURAL");
    std::optional<JoinType> type;
    if (accept_kw("LEFT")) {
      type = JoinType::left;
    } else if (accept_kw("RIGHT")) {
      type = JoinType::right;
    } else if (accept_kw("FULL")) {
      type = JoinType::full;
    } else if (natural && accept_kw("INNER")) {
      type = JoinType::inner;
    }
    if (type || natural) {
      accept_kw("OUTER");
      expect_kw("JOIN");
      return natural ? JoinType::natural : *type;
    }
    pos_ = save;
    return std::nullopt;
  }

  FromItem from_item()
  {
    FromItem item;
    item.first = table_ref();
    while (auto type = join_operator()) {
      JoinClause join;
      join.type = *type;
      join.right = table_ref();
      if (accept_kw("ON")) {
        join.on = expr();
      } else if (accept_kw("USING")) {
        expect_sym("(");
        do {
          join.using_columns.push_back(name());
        } while (accept_sym(","));
        expect_sym(")");
      }
      item.joins.push_back(std::move(join));
    }
    return item;
  }

  TableRef table_ref()
  {
    TableRef ref;
    if (accept_sym("(")) {
      if (starts_query(0)) {
        if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
        ref.subquery = std::make_shared<Query>(query());
        expect_sym(")");
      } else {
        ref.nested = std::make_shared<FromItem>(from_item());
        expect_sym(")");
      }
      ref.alias = optional_alias();
      return ref;
    }
    ref.name = name();
    if (accept_sym(".")) ref.name = name();  // schema-qualified; the schema part is dropped
    if (peek_sym("(")) throw UnsupportedConstruct("table-valued function", cur().offset);
    ref.alias = optional_alias();
    if (accept_kw("INDEXED")) {
      expect_kw("BY");
      name();
    } else if (peek_kw("NOT") && is_kw(ahead(1), "INDEXED")) {
      advance();
      advance();
    }
    return ref;
  }

  // ---- expressions, lowest precedence first ----

  Expr expr() { return or_expr(); }

  static Expr make(ExprKind kind, std::string text, std::size_t offset)
  {
    Expr e;
    e.kind = kind;
    e.text = std::move(text);
    e.offset = offset;
    return e;
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs)
  {
    Expr e = make(ExprKind::binary, std::move(op), lhs.offset);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr or_expr()
  {
    Expr lhs = and_expr();
    while (accept_kw("OR")) lhs = binary("OR", std::move(lhs), and_expr());
    return lhs;
  }

  Expr and_expr()
  {
    Expr lhs = not_expr();
    while (accept_kw("AND")) lhs = binary("AND", std::move(lhs), not_expr());
    return lhs;
  }

  Expr not_expr()
  {
    const std::size_t offset = cur().offset;
    if (accept_kw("NOT")) {
      Expr e = make(ExprKind::unary, "NOT", offset);
      e.args.push_back(not_expr());
      return e;
    }
    return comparison();
  }

  bool peek_negatable_predicate(std::size_t k) const
  {
    const Token& t = ahead(k);
    return is_kw(t, "IN") || is_kw(t, "BETWEEN") || is_kw(t, "LIKE") || is_kw(t, "GLOB") ||
           is_kw(t, "REGEXP") || is_kw(t, "MATCH");
  }

  Expr comparison()
  {
    Expr lhs = bitwise();
    while (true) {
      const std::size_t offset = cur().offset;
      if (accept_kw("IS")) {
        const bool negated = accept_kw("NOT");
        if (accept_kw("NULL")) {
          Expr e = make(ExprKind::is_null, "IS NULL", offset);
          e.negated = negated;
          e.args.push_back(std::move(lhs));
          lhs = std::move(e);
        } else {
          if (accept_kw("DISTINCT")) {
            expect_kw("FROM");
          }
          lhs = binary(negated ? "IS NOT" : "IS", std::move(lhs), bitwise());
        }
        continue;
      }
      if (accept_kw("ISNULL") || accept_kw("NOTNULL")) {
        Expr e = make(ExprKind::is_null, "IS NULL", offset);
        e.negated = is_kw(tokens_[pos_ - 1], "NOTNULL");
        e.args.push_back(std::move(lhs));
        lhs = std::move(e);
        continue;
      }
      bool negated = false;
      if (peek_kw("NOT") && peek_negatable_predicate(1)) {
        advance();
        negated = true;
      }
      if (accept_kw("IN")) {
        lhs = in_predicate(std::move(lhs), negated, offset);
        continue;
      }
      if (accept_kw("BETWEEN")) {
        Expr e = make(ExprKind::between, "BETWEEN", offset);
        e.negated = negated;
        e.args.push_back(std::move(lhs));
        e.args.push_back(bitwise());
        expect_kw("AND");
        e.args.push_back(bitwise());
        lhs = std::move(e);
        continue;
      }
      if (peek_kw("LIKE") || peek_kw("GLOB") || peek_kw("REGEXP") || peek_kw("MATCH")) {
        Expr e = make(ExprKind::like, upper(cur().text), offset);
        advance();
        e.negated = negated;
        e.args.push_back(std::move(lhs));
        e.args.push_back(bitwise());
        if (accept_kw("ESCAPE")) e.args.push_back(bitwise());
        lhs = std::move(e);
        continue;
      }
      if (negated) fail("expected predicate after NOT");
      static constexpr std::array<std::string_view, 8> ops = {"=", "==", "!=", "<>", "<", "<=", ">", ">="};
      if (cur().kind == TokenKind::symbol &&
          std::find(ops.begin(), ops.end(), std::string_view(cur().text)) != ops.end()) {
        std::string op = cur().text;
        advance();
        lhs = binary(std::move(op), std::move(lhs), bitwise());
        continue;
      }
      break;
    }
    return lhs;
  }

  Expr in_predicate(Expr lhs, bool negated, std::size_t offset)
  {
    if (!accept_sym("(")) {
      if (is_name_token(cur())) throw UnsupportedConstruct("IN table-name", cur().offset);
      fail("expected '(' after IN");
    }
    if (starts_query(0)) {
      if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
      Expr e = make(ExprKind::in_subquery, "IN", offset);
      e.negated = negated;
      e.args.push_back(std::move(lhs));
      e.subquery = std::make_shared<Query>(query());
      expect_sym(")");
      return e;
    }
    Expr e = make(ExprKind::in_list, "IN", offset);
    e.negated = negated;
    e.args.push_back(std::move(lhs));
    if (!peek_sym(")")) {
      do {
        e.args.push_back(expr());
      } while (accept_sym(","));
    }
    expect_sym(")");
    return e;
  }

  Expr bitwise()
  {
    Expr lhs = additive();
    while (peek_sym("&") || peek_sym("|") || peek_sym("<<") || peek_sym(">>")) {
      std::string op = cur().text;
      advance();
      lhs = binary(std::move(op), std::move(lhs), additive());
    }
    return lhs;
  }

  Expr additive()
  {
    Expr lhs = multiplicative();
    while (peek_sym("+") || peek_sym("-")) {
      std::string op = cur().text;
      advance();
      lhs = binary(std::move(op), std::move(lhs), multiplicative());
    }
    return lhs;
  }

  Expr multiplicative()
  {
    Expr lhs = concat();
    while (peek_sym("*") || peek_sym("/") || peek_sym("%")) {
      std::string op = cur().text;
      advance();
      lhs = binary(std::move(op), std::move(lhs), concat());
    }
    return lhs;
  }

  Expr concat()
  {
    Expr lhs = unary();
    while (accept_sym("||")) lhs = binary("||", std::move(lhs), unary());
    return lhs;
  }

  Expr unary()
  {
    const std::size_t offset = cur().offset;
    if (peek_sym("-") || peek_sym("+") || peek_sym("~")) {
      Expr e = make(ExprKind::unary, cur().text, offset);
      advance();
      e.args.push_back(unary());
      return e;
    }
    Expr e = primary();
    while (accept_kw("COLLATE")) {
      Expr c = make(ExprKind::collate, name(), offset);
      c.args.push_back(std::move(e));
      e = std::move(c);
    }
    return e;
  }

  Expr primary()
  {
    const Token t = cur();
    switch (t.kind) {
      case TokenKind::number:
        advance();
        return make(ExprKind::literal, t.text, t.offset);
      case TokenKind::string:
        advance();
        return make(ExprKind::literal, "'" + t.text + "'", t.offset);
      case TokenKind::parameter:
        throw UnsupportedConstruct("bind parameter", t.offset);
      case TokenKind::end:
        fail("unexpected end of input");
      case TokenKind::symbol:
        if (t.text == "(") return parenthesized();
        if (t.text == "*") fail("unexpected '*'");
        fail("unexpected symbol");
      default:
        break;
    }

    if (t.kind == TokenKind::identifier) {
      if (accept_kw("NULL") || accept_kw("TRUE") || accept_kw("FALSE") || accept_kw("CURRENT_DATE") ||
          accept_kw("CURRENT_TIME") || accept_kw("CURRENT_TIMESTAMP"))
        return make(ExprKind::literal, upper(t.text), t.offset);
      if (accept_kw("CASE")) return case_expr(t.offset);
      if (accept_kw("CAST")) return cast_expr(t.offset);
      if (accept_kw("EXISTS")) {
        expect_sym("(");
        if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
        Expr e = make(ExprKind::exists, "EXISTS", t.offset);
        e.subquery = std::make_shared<Query>(query());
        expect_sym(")");
        return e;
      }
      if (is_reserved(t.text)) fail("unexpected keyword");
      if (is_sym(ahead(1), "(")) return function_call();
    }

    // column reference, possibly qualified
    Expr col = make(ExprKind::column, {}, t.offset);
    col.name = name();
    col.double_quoted = t.kind == TokenKind::double_quoted && dialect_ == Dialect::sqlite;
    while (accept_sym(".")) {
      col.double_quoted = false;
      if (accept_sym("*")) {
        col.kind = ExprKind::star;
        col.qualifier = col.name;
        col.name.clear();
        return col;
      }
      // schema.table.column keeps only the last two parts
      col.qualifier = col.name;
      col.name = name();
    }
    return col;
  }

  Expr parenthesized()
  {
    const std::size_t offset = cur().offset;
    expect_sym("(");
    if (starts_query(0)) {
      if (peek_kw("WITH")) throw UnsupportedConstruct("common table expression (WITH)", cur().offset);
      Expr e = make(ExprKind::subquery, "SUBQUERY", offset);
      e.subquery = std::make_shared<Query>(query());
      expect_sym(")");
      return e;
    }
    Expr first = expr();
    if (!accept_sym(",")) {
      expect_sym(")");
      return first;
    }
    Expr row = make(ExprKind::row, "ROW", offset);
    row.args.push_back(std::move(first));
    do {
      row.args.push_back(expr());
    } while (accept_sym(","));
    expect_sym(")");
    return row;
  }

  Expr function_call()
  {
    const Token t = cur();
    advance();
    expect_sym("(");
    Expr e = make(ExprKind::function, upper(t.text), t.offset);
    if (peek_sym("*")) {
      e.args.push_back(make(ExprKind::star, "*", cur().offset));
      advance();
    } else if (!peek_sym(")")) {
      if (accept_kw("DISTINCT")) {
        e.distinct = true;
      } else {
        accept_kw("ALL");
      }
      do {
        e.args.push_back(expr());
      } while (accept_sym(","));
    }
    expect_sym(")");
    if (peek_kw("FILTER")) throw UnsupportedConstruct("aggregate FILTER clause", cur().offset);
    if (peek_kw("OVER")) throw UnsupportedConstruct("window function", cur().offset);
    return e;
  }

  Expr case_expr(std::size_t offset)
  {
    Expr e = make(ExprKind::case_when, "CASE", offset);
    if (!peek_kw("WHEN")) {
      e.has_operand = true;
      e.args.push_back(expr());
    }
    if (!peek_kw("WHEN")) fail("expected WHEN");
    while (accept_kw("WHEN")) {
      e.args.push_back(expr());
      expect_kw("THEN");
      e.args.push_back(expr());
    }
    if (accept_kw("ELSE")) {
      e.has_else = true;
      e.args.push_back(expr());
    }
    expect_kw("END");
    return e;
  }

  Expr cast_expr(std::size_t offset)
  {
    expect_sym("(");
    Expr operand = expr();
    expect_kw("AS");
    std::string type;
    while (cur().kind == TokenKind::identifier && !peek_sym(")")) {
      if (!type.empty()) type += ' ';
      type += upper(cur().text);
      advance();
    }
    if (type.empty()) fail("expected type name");
    if (accept_sym("(")) {
      type += '(';
      do {
        if (cur().kind != TokenKind::number) fail("expected type size");
        type += cur().text;
        advance();
        if (peek_sym(",")) type += ',';
      } while (accept_sym(","));
      expect_sym(")");
      type += ')';
    }
    expect_sym(")");
    Expr e = make(ExprKind::cast, std::move(type), offset);
    e.args.push_back(std::move(operand));
    return e;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Dialect dialect_;
};

}  // namespace

Query parse_sql(std::string_view sql, Dialect dialect)
{
  Parser parser(tokenize_sql(sql), dialect);
  return parser.statement();
}

}  // namespace sqlprobe::sql

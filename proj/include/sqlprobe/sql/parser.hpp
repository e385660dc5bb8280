#pragma once

#include "sqlprobe/sql/ast.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlprobe::sql {

enum class Dialect { sqlite, ansi };

Dialect parse_dialect(std::string_view name);

/// Malformed input. offset is the byte position of the offending token.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed SQL using a construct this parser does not model
/// (window functions, CTEs, VALUES, bind parameters).
class UnsupportedConstruct : public std::runtime_error {
 public:
  UnsupportedConstruct(const std::string& construct, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

enum class TokenKind {
  identifier,
  quoted_identifier,  // `x` or [x]
  double_quoted,      // "x": identifier in ANSI, identifier-or-string in SQLite
  string,
  number,
  symbol,
  parameter,
  end,
};

struct Token {
  TokenKind kind;
  std::string text;  // quotes removed for quoted kinds
  std::size_t offset;
};

std::vector<Token> tokenize_sql(std::string_view sql);

Query parse_sql(std::string_view sql, Dialect dialect = Dialect::sqlite);

}  // namespace sqlprobe::sql

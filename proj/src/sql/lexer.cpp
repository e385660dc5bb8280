#include "sqlprobe/sql/parser.hpp"

#include <array>
#include <cctype>

namespace sqlprobe::sql {

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

constexpr std::array<std::string_view, 8> two_char_symbols = {"<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
constexpr std::string_view one_char_symbols = "(),.;+-*/%=<>&|~";

}  // namespace

SyntaxError::SyntaxError(const std::string& message, std::size_t offset)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset)
{
}

UnsupportedConstruct::UnsupportedConstruct(const std::string& construct, std::size_t offset)
    : std::runtime_error("unsupported construct at offset " + std::to_string(offset) + ": " + construct),
      offset_(offset)
{
}

std::vector<Token> tokenize_sql(std::string_view sql)
{
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sql.size();

  auto read_quoted = [&](char close, std::size_t start) {
    std::string text;
    std::size_t j = start + 1;
    while (true) {
      if (j >= n) throw SyntaxError("unterminated quoted token", start);
      if (sql[j] == close) {
        // doubled closing quote is an escaped literal quote
        if (close != ']' && j + 1 < n && sql[j + 1] == close) {
          text.push_back(close);
          j += 2;
          continue;
        }
        break;
      }
      text.push_back(sql[j]);
      ++j;
    }
    i = j + 1;
    return text;
  };

  while (i < n) {
    const auto c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto end = sql.find("*/", i + 2);
      if (end == std::string_view::npos) throw SyntaxError("unterminated comment", i);
      i = end + 2;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < n && ident_char(static_cast<unsigned char>(sql[i]))) ++i;
      tokens.push_back({TokenKind::identifier, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
        i += 2;
        while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
      } else {
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        if (i < n && sql[i] == '.') {
          ++i;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
        }
        if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
          std::size_t j = i + 1;
          if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
          if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
            i = j;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
          }
        }
      }
      if (i < n && ident_start(static_cast<unsigned char>(sql[i])))
        throw SyntaxError("malformed number", start);
      tokens.push_back({TokenKind::number, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'') {
      tokens.push_back({TokenKind::string, read_quoted('\'', start), start});
      continue;
    }
    if (c == '"') {
      tokens.push_back({TokenKind::double_quoted, read_quoted('"', start), start});
      continue;
    }
    if (c == '`') {
      tokens.push_back({TokenKind::quoted_identifier, read_quoted('`', start), start});
      continue;
    }
    if (c == '[') {
      tokens.push_back({TokenKind::quoted_identifier, read_quoted(']', start), start});
      continue;
    }
    if (c == '?' || c == ':' || c == '@' || c == '$') {
      ++i;
      while (i < n && ident_char(static_cast<unsigned char>(sql[i]))) ++i;
      tokens.push_back({TokenKind::parameter, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (i + 1 < n) {
      const auto two = sql.substr(i, 2);
      bool matched = false;
      for (auto sym : two_char_symbols) {
        if (two == sym) {
          tokens.push_back({TokenKind::symbol, std::string(sym), start});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (one_char_symbols.find(static_cast<char>(c)) != std::string_view::npos) {
      tokens.push_back({TokenKind::symbol, std::string(1, static_cast<char>(c)), start});
      ++i;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + static_cast<char>(c) + "'", start);
  }
  tokens.push_back({TokenKind::end, "", n});
  return tokens;
}

}  // namespace sqlprobe::sql

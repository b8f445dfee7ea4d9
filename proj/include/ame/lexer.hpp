#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ame/common.hpp"

namespace ame {

enum class TokenKind { Identifier, Keyword, Literal, Punct, MemberDot };

struct Token {
  TokenKind kind;
  std::string text;
  int line = 1;
  int col = 1;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
};

namespace detail {

inline const std::unordered_set<std::string>& keyword_set() {
  static const std::unordered_set<std::string> kw = {
      "function", "contract", "if",     "else",  "for",     "while",
      "return",   "require",  "assert", "revert", "throw",  "mapping",
      "returns",  "true",     "false",
  };
  return kw;
}

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace detail

/// Lexes a Solidity-like source text. Comments and whitespace are dropped;
/// every token keeps its starting line/column.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto advance = [&](std::size_t count) {
    for (std::size_t k = 0; k < count && i < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  static const std::array<const char*, 18> two_char_ops = {
      "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=",
      "&&", "||", "++", "--", "=>", "->", "**", "<<", ">>"};
  const std::string_view singles = "()[]{};,<>=!+-*/%&|^~?:";

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      advance(2);
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      advance(2);
      continue;
    }
    int tline = line, tcol = col;
    if (detail::ident_start(c)) {
      std::size_t j = i;
      while (j < n && detail::ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      TokenKind kind = detail::keyword_set().count(word) ? TokenKind::Keyword
                                                         : TokenKind::Identifier;
      // `true`/`false` read more naturally as literals downstream.
      if (word == "true" || word == "false") kind = TokenKind::Literal;
      out.push_back({kind, std::move(word), tline, tcol});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      if (c == '0' && j + 1 < n && (src[j + 1] == 'x' || src[j + 1] == 'X')) {
        j += 2;
        while (j < n && (std::isxdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      } else {
        while (j < n && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      }
      out.push_back({TokenKind::Literal, std::string(src.substr(i, j - i)), tline, tcol});
      advance(j - i);
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      std::size_t j = i + 1;
      std::string text;
      bool closed = false;
      while (j < n) {
        if (src[j] == '\\' && j + 1 < n) {
          text += src[j];
          text += src[j + 1];
          j += 2;
          continue;
        }
        if (src[j] == quote) {
          closed = true;
          break;
        }
        if (src[j] == '\n') break;
        text += src[j];
        ++j;
      }
      if (!closed)
        throw UnterminatedStringError("unterminated string literal at line " +
                                      std::to_string(tline) + ", col " + std::to_string(tcol));
      out.push_back({TokenKind::Literal, text, tline, tcol});
      advance(j + 1 - i);
      continue;
    }
    if (c == '.') {
      out.push_back({TokenKind::MemberDot, ".", tline, tcol});
      advance(1);
      continue;
    }
    if (i + 1 < n) {
      std::string pair{c, src[i + 1]};
      bool matched = false;
      for (const char* op : two_char_ops) {
        if (pair == op) {
          out.push_back({TokenKind::Punct, pair, tline, tcol});
          advance(2);
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (singles.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), tline, tcol});
      advance(1);
      continue;
    }
    throw IllegalCharacterError("illegal character '" + std::string(1, c) + "' at line " +
                                std::to_string(tline) + ", col " + std::to_string(tcol));
  }
  return out;
}

}  // namespace ame

// lexer.cpp - MiniC tokenizer

#include <cctype>
#include <set>

#include "diverge/frontend.hpp"

namespace diverge {

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "int",   "void",  "if",       "else",   "while", "for",
    "switch", "case", "default",  "goto",   "break", "continue",
    "return", "sizeof", "static", "extern"};

// Longest first, so that `<=` wins over `<`.
const char* const kPuncts[] = {"&&", "||", "==", "!=", "<=", ">=", "++", "--",
                               "+=", "-=", "*=", "/=", "(",  ")",  "{",  "}",
                               ";",  ",",  "=",  "<",  ">",  "+",  "-",  "*",
                               "/",  "!",  "&",  ":",  "[",  "]"};

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

LexResult lex(std::string_view text, int file) {
  LexResult out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourceLoc loc{file, line, col};
    if (text.substr(i, 2) == "//") {
      size_t end = text.find('\n', i);
      if (end == std::string_view::npos) end = text.size();
      std::string_view comment = text.substr(i, end - i);
      if (comment.substr(0, 3) == "//@")
        out.annotations.push_back({file, line, trim(comment.substr(3))});
      advance(end - i);
      continue;
    }
    if (text.substr(i, 2) == "/*") {
      size_t end = text.find("*/", i + 2);
      if (end == std::string_view::npos)
        throw ParseError("unterminated block comment", loc);
      advance(end + 2 - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      int base = 10;
      if (text.substr(i, 2) == "0x" || text.substr(i, 2) == "0X") {
        base = 16;
        j += 2;
      }
      size_t digits = j;
      while (j < text.size() && std::isxdigit(static_cast<unsigned char>(text[j])) &&
             (base == 16 || std::isdigit(static_cast<unsigned char>(text[j]))))
        ++j;
      if (j == digits) throw ParseError("malformed integer literal", loc);
      std::string lit(text.substr(digits, j - digits));
      std::int64_t v = 0;
      try {
        v = static_cast<std::int64_t>(std::stoull(lit, nullptr, base));
      } catch (const std::exception&) {
        throw ParseError("integer literal out of range", loc);
      }
      if (v < 0) throw ParseError("integer literal out of range", loc);
      if (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        throw ParseError("malformed integer literal", loc);
      out.tokens.push_back({Token::Kind::Int, std::string(text.substr(i, j - i)), v, loc});
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      std::string word(text.substr(i, j - i));
      auto kind = kKeywords.count(word) ? Token::Kind::Keyword : Token::Kind::Ident;
      out.tokens.push_back({kind, std::move(word), 0, loc});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view pv(p);
      if (text.substr(i, pv.size()) == pv) {
        out.tokens.push_back({Token::Kind::Punct, std::string(pv), 0, loc});
        advance(pv.size());
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(std::string("unexpected character '") + c + "'", loc);
  }
  out.tokens.push_back({Token::Kind::End, "", 0, {file, line, col}});
  return out;
}

}  // namespace diverge

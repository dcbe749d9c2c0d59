// frontend.hpp - lexing, parsing and pretty-printing of MiniC

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "diverge/ast.hpp"

namespace diverge {

struct Token {
  enum class Kind { Ident, Int, Punct, Keyword, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<Annotation> annotations;
};

LexResult lex(std::string_view text, int file = 0);

/// Parses one source text into a Program with a single source file entry.
Program parse(std::string_view source_text, const std::string& path = "<input>");

/// Parses several files as one program. Function names must be unique
/// across all of them.
Program parse_files(const std::vector<SourceFile>& files);

std::string print_expr(const Expr& e);
std::string print_function(const FunctionDef& f);
std::string print_program(const Program& p);

bool same_shape(const FunctionDef& a, const FunctionDef& b);
bool same_shape(const Program& a, const Program& b);

}  // namespace diverge

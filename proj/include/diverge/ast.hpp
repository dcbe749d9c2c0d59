// ast.hpp - MiniC abstract syntax
//
// MiniC is the small C-like object language analyzed by diverge: integers,
// pointers to integers, structured and unstructured control flow, and calls.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diverge {

struct SourceLoc {
  int file = 0;  // index into Program::source_files
  int line = 0;
  int col = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

/// `int` with `depth` levels of indirection. Depth is capped at 3.
struct MiniType {
  int depth = 0;

  static constexpr int kMaxDepth = 3;
  friend bool operator==(const MiniType&, const MiniType&) = default;
};

enum class UnOp { Neg, Not, Deref, AddrOf };
enum class BinOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

const char* to_string(UnOp op);
const char* to_string(BinOp op);
bool is_comparison(BinOp op);
bool is_logical(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { IntLit, Var, Unary, Binary, Call, SizeOf };

  Kind kind = Kind::IntLit;
  std::int64_t value = 0;  // IntLit
  std::string name;        // Var, Call
  int var = -1;            // Var: resolved slot index, -1 before lowering
  UnOp unop = UnOp::Neg;
  BinOp binop = BinOp::Add;
  std::vector<ExprPtr> kids;
  SourceLoc loc;

  static ExprPtr int_lit(std::int64_t v, SourceLoc loc = {});
  static ExprPtr variable(std::string name, SourceLoc loc = {}, int var = -1);
  static ExprPtr unary(UnOp op, ExprPtr e, SourceLoc loc = {});
  static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, SourceLoc loc = {});
  static ExprPtr call(std::string name, std::vector<ExprPtr> args,
                      SourceLoc loc = {});
};

/// Structural equality, ignoring source locations and resolved slots.
bool same_shape(const Expr& a, const Expr& b);

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Declarator {
  std::string name;
  MiniType type;
  ExprPtr init;  // may be null
  SourceLoc loc;
};

struct Stmt {
  enum class Kind {
    Block, Decl, Assign, ExprStmt, If, While, Goto, Label, Break, Continue,
    Return, Empty
  };

  Kind kind = Kind::Empty;
  std::vector<StmtPtr> body;       // Block
  std::vector<Declarator> decls;   // Decl
  ExprPtr lhs;                     // Assign
  ExprPtr expr;                    // Assign rhs, ExprStmt, If/While cond, Return
  StmtPtr then_branch;             // If; While body; Label target
  StmtPtr else_branch;             // If (may be null)
  StmtPtr step;                    // While: `for` step (may be null)
  std::string label;               // Goto, Label
  SourceLoc loc;
};

bool same_shape(const Stmt& a, const Stmt& b);

struct Param {
  std::string name;
  MiniType type;
};

struct FunctionDef {
  std::string name;
  bool returns_void = false;
  MiniType return_type;
  std::vector<Param> params;
  StmtPtr body;  // always a Block
  SourceLoc loc;
  int end_line = 0;
};

/// A `//@ ...` comment in the source.
struct Annotation {
  int file = 0;
  int line = 0;
  std::string text;  // after the `//@` marker, trimmed
};

struct SourceFile {
  std::string path;
  std::string text;
  int line_count = 0;
};

struct Program {
  std::vector<FunctionDef> functions;
  std::vector<SourceFile> source_files;
  std::vector<Annotation> annotations;

  const FunctionDef* find(const std::string& name) const;
  int index_of(const std::string& name) const;
};

/// Malformed input, with a position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, SourceLoc loc);
  SourceLoc loc() const { return loc_; }
  /// The message without the position prefix.
  const std::string& message() const { return msg_; }

 private:
  SourceLoc loc_;
  std::string msg_;
};

/// A `goto` whose label does not exist in the same function.
class UndefinedLabel : public ParseError {
 public:
  UndefinedLabel(const std::string& label, SourceLoc loc);
};

bool is_builtin(const std::string& name);

}  // namespace diverge

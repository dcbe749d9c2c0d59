// printer.cpp - MiniC pretty-printer and structural comparison

#include <sstream>

#include "diverge/frontend.hpp"

namespace diverge {

namespace {

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Unary) return 7;
  if (e.kind != Expr::Kind::Binary) return 8;
  switch (e.binop) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 4;
    case BinOp::Add:
    case BinOp::Sub: return 5;
    case BinOp::Mul:
    case BinOp::Div: return 6;
  }
  return 0;
}

void print(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, int min_prec) {
  bool parens = precedence(child) < min_prec ||
                (child.kind == Expr::Kind::IntLit && child.value < 0 && min_prec >= 7);
  if (parens) os << '(';
  print(os, child);
  if (parens) os << ')';
}

void print(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      os << e.value;
      return;
    case Expr::Kind::Var:
      os << e.name;
      return;
    case Expr::Kind::SizeOf:
      os << "sizeof(int" << std::string(static_cast<size_t>(e.value), '*') << ')';
      return;
    case Expr::Kind::Unary:
      os << to_string(e.unop);
      // `- -x` must not print as `--x`.
      if (e.unop == UnOp::Neg && e.kids[0]->kind == Expr::Kind::Unary &&
          e.kids[0]->unop == UnOp::Neg)
        os << ' ';
      print_child(os, *e.kids[0], 7);
      return;
    case Expr::Kind::Binary: {
      int p = precedence(e);
      print_child(os, *e.kids[0], p);
      os << ' ' << to_string(e.binop) << ' ';
      print_child(os, *e.kids[1], p + 1);
      return;
    }
    case Expr::Kind::Call:
      os << e.name << '(';
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) os << ", ";
        print(os, *e.kids[i]);
      }
      os << ')';
      return;
  }
}

std::string type_prefix(const MiniType& t) {
  return "int " + std::string(static_cast<size_t>(t.depth), '*');
}

void print_simple(std::ostream& os, const Stmt& s) {
  if (s.kind == Stmt::Kind::Assign) {
    print(os, *s.lhs);
    os << " = ";
    print(os, *s.expr);
  } else if (s.kind == Stmt::Kind::ExprStmt) {
    print(os, *s.expr);
  } else if (s.kind == Stmt::Kind::Decl) {
    os << "int ";
    for (size_t i = 0; i < s.decls.size(); ++i) {
      const auto& d = s.decls[i];
      if (i) os << ", ";
      os << std::string(static_cast<size_t>(d.type.depth), '*') << d.name;
      if (d.init) {
        os << " = ";
        print(os, *d.init);
      }
    }
  }
}

void print_stmt(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::Block:
      os << pad << "{\n";
      for (const auto& c : s.body) print_stmt(os, *c, indent + 1);
      os << pad << "}\n";
      return;
    case Stmt::Kind::Decl:
    case Stmt::Kind::Assign:
    case Stmt::Kind::ExprStmt:
      os << pad;
      print_simple(os, s);
      os << ";\n";
      return;
    case Stmt::Kind::If:
      os << pad << "if (";
      print(os, *s.expr);
      os << ")\n";
      print_stmt(os, *s.then_branch, indent + 1);
      if (s.else_branch) {
        os << pad << "else\n";
        print_stmt(os, *s.else_branch, indent + 1);
      }
      return;
    case Stmt::Kind::While:
      if (s.step) {
        os << pad << "for (; ";
        print(os, *s.expr);
        os << "; ";
        print_simple(os, *s.step);
        os << ")\n";
      } else {
        os << pad << "while (";
        print(os, *s.expr);
        os << ")\n";
      }
      print_stmt(os, *s.then_branch, indent + 1);
      return;
    case Stmt::Kind::Goto:
      os << pad << "goto " << s.label << ";\n";
      return;
    case Stmt::Kind::Label:
      os << pad << s.label << ":\n";
      print_stmt(os, *s.then_branch, indent);
      return;
    case Stmt::Kind::Break:
      os << pad << "break;\n";
      return;
    case Stmt::Kind::Continue:
      os << pad << "continue;\n";
      return;
    case Stmt::Kind::Return:
      os << pad << "return";
      if (s.expr) {
        os << ' ';
        print(os, *s.expr);
      }
      os << ";\n";
      return;
    case Stmt::Kind::Empty:
      os << pad << ";\n";
      return;
  }
}

bool same_ptr_shape(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_shape(*a, *b);
}

bool same_ptr_shape(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return same_shape(*a, *b);
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::string print_function(const FunctionDef& f) {
  std::ostringstream os;
  if (f.returns_void)
    os << "void ";
  else
    os << type_prefix(f.return_type);
  os << f.name << '(';
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ", ";
    os << type_prefix(f.params[i].type) << f.params[i].name;
  }
  os << ")\n";
  print_stmt(os, *f.body, 0);
  return os.str();
}

std::string print_program(const Program& p) {
  std::string out;
  for (size_t i = 0; i < p.functions.size(); ++i) {
    if (i) out += '\n';
    out += print_function(p.functions[i]);
  }
  return out;
}

bool same_shape(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  switch (a.kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::SizeOf:
      if (a.value != b.value) return false;
      break;
    case Expr::Kind::Var:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::Unary:
      if (a.unop != b.unop) return false;
      break;
    case Expr::Kind::Binary:
      if (a.binop != b.binop) return false;
      break;
    case Expr::Kind::Call:
      if (a.name != b.name) return false;
      break;
  }
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!same_shape(*a.kids[i], *b.kids[i])) return false;
  return true;
}

bool same_shape(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.label != b.label || a.body.size() != b.body.size() ||
      a.decls.size() != b.decls.size())
    return false;
  for (size_t i = 0; i < a.body.size(); ++i)
    if (!same_shape(*a.body[i], *b.body[i])) return false;
  for (size_t i = 0; i < a.decls.size(); ++i) {
    const auto& x = a.decls[i];
    const auto& y = b.decls[i];
    if (x.name != y.name || x.type != y.type || !same_ptr_shape(x.init, y.init)) return false;
  }
  return same_ptr_shape(a.lhs, b.lhs) && same_ptr_shape(a.expr, b.expr) &&
         same_ptr_shape(a.then_branch, b.then_branch) &&
         same_ptr_shape(a.else_branch, b.else_branch) && same_ptr_shape(a.step, b.step);
}

bool same_shape(const FunctionDef& a, const FunctionDef& b) {
  if (a.name != b.name || a.returns_void != b.returns_void ||
      a.return_type != b.return_type || a.params.size() != b.params.size())
    return false;
  for (size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].type != b.params[i].type)
      return false;
  return same_shape(*a.body, *b.body);
}

bool same_shape(const Program& a, const Program& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!same_shape(a.functions[i], b.functions[i])) return false;
  return true;
}

}  // namespace diverge

// parser.cpp - recursive-descent MiniC parser
//
// `for` loops become `while` statements carrying a step; `switch` statements
// become a temporary plus an if/goto chain; `a[i]` becomes `*(a + i)`.
// Compound assignments and increments become plain assignments.

#include <map>
#include <set>

#include "diverge/frontend.hpp"

namespace diverge {

const char* to_string(UnOp op) {
  switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::Not: return "!";
    case UnOp::Deref: return "*";
    case UnOp::AddrOf: return "&";
  }
  return "?";
}

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  return op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt ||
         op == BinOp::Ge || op == BinOp::Eq || op == BinOp::Ne;
}

bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

bool is_builtin(const std::string& name) {
  return name == "malloc" || name == "free" || name == "nondet";
}

ExprPtr Expr::int_lit(std::int64_t v, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::IntLit;
  e->value = v;
  e->loc = loc;
  return e;
}

ExprPtr Expr::variable(std::string name, SourceLoc loc, int var) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Var;
  e->name = std::move(name);
  e->var = var;
  e->loc = loc;
  return e;
}

ExprPtr Expr::unary(UnOp op, ExprPtr x, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Unary;
  e->unop = op;
  e->kids = {std::move(x)};
  e->loc = loc;
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr l, ExprPtr r, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->binop = op;
  e->kids = {std::move(l), std::move(r)};
  e->loc = loc;
  return e;
}

ExprPtr Expr::call(std::string name, std::vector<ExprPtr> args, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Call;
  e->name = std::move(name);
  e->kids = std::move(args);
  e->loc = loc;
  return e;
}

ParseError::ParseError(const std::string& msg, SourceLoc loc)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) +
                         ": " + msg),
      loc_(loc),
      msg_(msg) {}

UndefinedLabel::UndefinedLabel(const std::string& label, SourceLoc loc)
    : ParseError("undefined label '" + label + "'", loc) {}

const FunctionDef* Program::find(const std::string& name) const {
  int i = index_of(name);
  return i < 0 ? nullptr : &functions[static_cast<size_t>(i)];
}

int Program::index_of(const std::string& name) const {
  for (size_t i = 0; i < functions.size(); ++i)
    if (functions[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

class Parser {
 public:
  Parser(std::vector<Token> toks, Program& prog) : toks_(std::move(toks)), prog_(prog) {}

  void parse_translation_unit() {
    while (!at_end()) parse_top_level();
  }

 private:
  enum class BreakTarget { Loop, Switch };

  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program& prog_;

  // Per-function state.
  std::vector<std::set<std::string>> scopes_;
  std::vector<std::pair<BreakTarget, std::string>> breakables_;
  std::map<std::string, SourceLoc> labels_;
  std::vector<std::pair<std::string, SourceLoc>> gotos_;
  int switch_counter_ = 0;

  const Token& peek(size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is(const char* text, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.kind == Token::Kind::Punct || t.kind == Token::Kind::Keyword) && t.text == text;
  }
  bool accept(const char* text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(const char* text) {
    if (!is(text))
      throw ParseError(std::string("expected '") + text + "' but found '" + describe(peek()) + "'",
                       peek().loc);
    return toks_[pos_++];
  }
  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "end of input" : t.text;
  }
  std::string expect_ident() {
    if (peek().kind != Token::Kind::Ident)
      throw ParseError("expected identifier but found '" + describe(peek()) + "'", peek().loc);
    return toks_[pos_++].text;
  }

  bool starts_type() const { return is("int") || is("void"); }

  int parse_stars() {
    int depth = 0;
    while (accept("*")) ++depth;
    if (depth > MiniType::kMaxDepth)
      throw ParseError("pointer depth exceeds " + std::to_string(MiniType::kMaxDepth),
                       peek().loc);
    return depth;
  }

  void declare(const std::string& name, SourceLoc loc) {
    if (!scopes_.back().insert(name).second)
      throw ParseError("redeclaration of '" + name + "'", loc);
  }

  bool is_declared(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (it->count(name)) return true;
    return false;
  }

  void parse_top_level() {
    accept("static");
    bool is_extern = accept("extern");
    SourceLoc loc = peek().loc;
    if (!starts_type()) throw ParseError("expected function definition", loc);
    bool is_void = is("void");
    ++pos_;
    int depth = parse_stars();
    if (is_void && depth > 0) is_void = false;  // `void*` is treated as a pointer
    FunctionDef fn;
    fn.loc = loc;
    fn.returns_void = is_void;
    fn.return_type.depth = depth;
    fn.name = expect_ident();
    expect("(");
    std::set<std::string> param_names;
    if (!is(")")) {
      if (is("void") && is(")", 1)) {
        ++pos_;
      } else {
        do {
          SourceLoc ploc = peek().loc;
          if (!starts_type()) throw ParseError("expected parameter type", ploc);
          ++pos_;
          Param p;
          p.type.depth = parse_stars();
          p.name = expect_ident();
          if (accept("[")) {  // `int a[]` is `int* a`
            expect("]");
            if (++p.type.depth > MiniType::kMaxDepth)
              throw ParseError("pointer depth exceeds 3", ploc);
          }
          if (!param_names.insert(p.name).second)
            throw ParseError("duplicate parameter '" + p.name + "'", ploc);
          fn.params.push_back(std::move(p));
        } while (accept(","));
      }
    }
    expect(")");
    if (accept(";")) return;  // prototype: ignored
    if (is_extern) throw ParseError("extern function with a body", loc);
    if (prog_.find(fn.name))
      throw ParseError("duplicate function '" + fn.name + "'", loc);

    scopes_.assign(1, param_names);
    breakables_.clear();
    labels_.clear();
    gotos_.clear();
    switch_counter_ = 0;
    fn.body = parse_block();
    fn.end_line = toks_[pos_ - 1].loc.line;
    for (const auto& [label, gloc] : gotos_)
      if (!labels_.count(label)) throw UndefinedLabel(label, gloc);
    prog_.functions.push_back(std::move(fn));
  }

  StmtPtr make(Stmt::Kind kind, SourceLoc loc) {
    auto s = std::make_shared<Stmt>();
    s->kind = kind;
    s->loc = loc;
    return s;
  }

  StmtPtr parse_block() {
    SourceLoc loc = expect("{").loc;
    scopes_.emplace_back();
    auto block = std::make_shared<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->loc = loc;
    while (!is("}")) {
      if (at_end()) throw ParseError("unexpected end of input in block", peek().loc);
      block->body.push_back(parse_stmt());
    }
    expect("}");
    scopes_.pop_back();
    return block;
  }

  StmtPtr parse_stmt() {
    SourceLoc loc = peek().loc;
    if (is("{")) return parse_block();
    if (accept(";")) return make(Stmt::Kind::Empty, loc);
    if (starts_type()) {
      auto s = parse_decl();
      expect(";");
      return s;
    }
    if (accept("if")) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::If;
      s->loc = loc;
      expect("(");
      s->expr = parse_expr();
      expect(")");
      s->then_branch = parse_scoped_stmt();
      if (accept("else")) s->else_branch = parse_scoped_stmt();
      return s;
    }
    if (accept("while")) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::While;
      s->loc = loc;
      expect("(");
      s->expr = parse_expr();
      expect(")");
      breakables_.push_back({BreakTarget::Loop, ""});
      s->then_branch = parse_scoped_stmt();
      breakables_.pop_back();
      return s;
    }
    if (accept("for")) return parse_for(loc);
    if (accept("switch")) return parse_switch(loc);
    if (accept("goto")) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Goto;
      s->loc = loc;
      s->label = expect_ident();
      gotos_.push_back({s->label, loc});
      expect(";");
      return s;
    }
    if (accept("break")) {
      expect(";");
      if (breakables_.empty()) throw ParseError("'break' outside loop or switch", loc);
      if (breakables_.back().first == BreakTarget::Switch) {
        auto s = make(Stmt::Kind::Goto, loc);
        std::const_pointer_cast<Stmt>(s)->label = breakables_.back().second;
        gotos_.push_back({breakables_.back().second, loc});
        return s;
      }
      return make(Stmt::Kind::Break, loc);
    }
    if (accept("continue")) {
      expect(";");
      bool in_loop = false;
      for (const auto& b : breakables_) in_loop |= b.first == BreakTarget::Loop;
      if (!in_loop) throw ParseError("'continue' outside loop", loc);
      return make(Stmt::Kind::Continue, loc);
    }
    if (accept("return")) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Return;
      s->loc = loc;
      if (!is(";")) s->expr = parse_expr();
      expect(";");
      return s;
    }
    if (peek().kind == Token::Kind::Ident && is(":", 1)) {
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Label;
      s->loc = loc;
      s->label = expect_ident();
      expect(":");
      if (labels_.count(s->label))
        throw ParseError("duplicate label '" + s->label + "'", loc);
      labels_[s->label] = loc;
      if (is("}"))
        s->then_branch = make(Stmt::Kind::Empty, peek().loc);
      else
        s->then_branch = parse_stmt();
      return s;
    }
    auto s = parse_simple();
    expect(";");
    return s;
  }

  // A statement that opens its own scope when it is not a block, so that a
  // declaration as the body of `if`/`while` does not leak.
  StmtPtr parse_scoped_stmt() {
    scopes_.emplace_back();
    auto s = parse_stmt();
    scopes_.pop_back();
    return s;
  }

  StmtPtr parse_decl() {
    SourceLoc loc = peek().loc;
    if (!is("int")) throw ParseError("only 'int' variables are supported", loc);
    ++pos_;
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Decl;
    s->loc = loc;
    do {
      Declarator d;
      d.loc = peek().loc;
      d.type.depth = parse_stars();
      d.name = expect_ident();
      if (accept("=")) d.init = parse_expr();
      declare(d.name, d.loc);
      s->decls.push_back(std::move(d));
    } while (accept(","));
    return s;
  }

  // Assignment, compound assignment, increment, or expression statement,
  // without the trailing semicolon.
  StmtPtr parse_simple() {
    SourceLoc loc = peek().loc;
    auto assign = [&](ExprPtr lhs, ExprPtr rhs) {
      check_lvalue(*lhs);
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Assign;
      s->loc = loc;
      s->lhs = std::move(lhs);
      s->expr = std::move(rhs);
      return s;
    };
    if (is("++") || is("--")) {
      BinOp op = is("++") ? BinOp::Add : BinOp::Sub;
      ++pos_;
      auto target = parse_unary();
      return assign(target, Expr::binary(op, target, Expr::int_lit(1, loc), loc));
    }
    auto e = parse_expr();
    if (accept("=")) return assign(e, parse_expr());
    static const std::pair<const char*, BinOp> kCompound[] = {
        {"+=", BinOp::Add}, {"-=", BinOp::Sub}, {"*=", BinOp::Mul}, {"/=", BinOp::Div}};
    for (const auto& [text, op] : kCompound)
      if (accept(text)) return assign(e, Expr::binary(op, e, parse_expr(), loc));
    if (is("++") || is("--")) {
      BinOp op = is("++") ? BinOp::Add : BinOp::Sub;
      ++pos_;
      return assign(e, Expr::binary(op, e, Expr::int_lit(1, loc), loc));
    }
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::ExprStmt;
    s->loc = loc;
    s->expr = std::move(e);
    return s;
  }

  static void check_lvalue(const Expr& e) {
    bool ok = e.kind == Expr::Kind::Var ||
              (e.kind == Expr::Kind::Unary && e.unop == UnOp::Deref);
    if (!ok) throw ParseError("assignment target is not an lvalue", e.loc);
  }

  StmtPtr parse_for(SourceLoc loc) {
    expect("(");
    scopes_.emplace_back();
    StmtPtr init;
    if (!is(";")) init = starts_type() ? parse_decl() : parse_simple();
    expect(";");
    ExprPtr cond = is(";") ? Expr::int_lit(1, peek().loc) : parse_expr();
    expect(";");
    StmtPtr step;
    if (!is(")")) step = parse_simple();
    expect(")");
    breakables_.push_back({BreakTarget::Loop, ""});
    auto body = parse_scoped_stmt();
    breakables_.pop_back();
    scopes_.pop_back();

    auto loop = std::make_shared<Stmt>();
    loop->kind = Stmt::Kind::While;
    loop->loc = loc;
    loop->expr = std::move(cond);
    loop->then_branch = std::move(body);
    loop->step = std::move(step);
    if (!init) return loop;
    auto block = std::make_shared<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->loc = loc;
    block->body = {init, loop};
    return block;
  }

  StmtPtr parse_switch(SourceLoc loc) {
    expect("(");
    ExprPtr scrutinee = parse_expr();
    expect(")");
    std::string base = "__sw" + std::to_string(switch_counter_++);
    while (is_declared(base) || labels_.count(base + "_end"))
      base = "__sw" + std::to_string(switch_counter_++);
    std::string end_label = base + "_end";

    auto block = std::make_shared<Stmt>();
    block->kind = Stmt::Kind::Block;
    block->loc = loc;
    scopes_.emplace_back();
    declare(base, loc);
    auto decl = std::make_shared<Stmt>();
    decl->kind = Stmt::Kind::Decl;
    decl->loc = loc;
    decl->decls.push_back({base, MiniType{}, scrutinee, loc});
    block->body.push_back(decl);

    std::vector<StmtPtr> dispatch, cases;
    std::string default_label;
    int case_no = 0;
    breakables_.push_back({BreakTarget::Switch, end_label});
    expect("{");
    while (!accept("}")) {
      if (at_end()) throw ParseError("unexpected end of input in switch", peek().loc);
      SourceLoc cloc = peek().loc;
      if (accept("case") || is("default")) {
        bool is_default = accept("default");
        std::string label = base + "_c" + std::to_string(case_no++);
        if (!is_default) {
          bool neg = accept("-");
          if (peek().kind != Token::Kind::Int)
            throw ParseError("case label must be an integer constant", peek().loc);
          std::int64_t v = toks_[pos_++].value;
          auto cmp = Expr::binary(BinOp::Eq, Expr::variable(base, cloc),
                                  Expr::int_lit(neg ? -v : v, cloc), cloc);
          auto jump = make(Stmt::Kind::Goto, cloc);
          std::const_pointer_cast<Stmt>(jump)->label = label;
          auto test = std::make_shared<Stmt>();
          test->kind = Stmt::Kind::If;
          test->loc = cloc;
          test->expr = cmp;
          test->then_branch = jump;
          dispatch.push_back(test);
        } else {
          if (!default_label.empty()) throw ParseError("duplicate default label", cloc);
          default_label = label;
        }
        expect(":");
        labels_[label] = cloc;
        auto mark = std::make_shared<Stmt>();
        mark->kind = Stmt::Kind::Label;
        mark->loc = cloc;
        mark->label = label;
        mark->then_branch = make(Stmt::Kind::Empty, cloc);
        cases.push_back(mark);
        continue;
      }
      if (cases.empty()) throw ParseError("statement before first case label", cloc);
      cases.push_back(parse_stmt());
    }
    breakables_.pop_back();
    scopes_.pop_back();

    auto fallback = make(Stmt::Kind::Goto, loc);
    std::const_pointer_cast<Stmt>(fallback)->label =
        default_label.empty() ? end_label : default_label;
    auto end_mark = std::make_shared<Stmt>();
    end_mark->kind = Stmt::Kind::Label;
    end_mark->loc = toks_[pos_ - 1].loc;
    end_mark->label = end_label;
    end_mark->then_branch = make(Stmt::Kind::Empty, end_mark->loc);
    labels_[end_label] = end_mark->loc;

    for (auto& s : dispatch) block->body.push_back(s);
    block->body.push_back(fallback);
    for (auto& s : cases) block->body.push_back(s);
    block->body.push_back(end_mark);
    return block;
  }

  // Expressions, lowest precedence first.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    auto l = parse_and();
    while (is("||")) {
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(BinOp::Or, l, parse_and(), loc);
    }
    return l;
  }

  ExprPtr parse_and() {
    auto l = parse_equality();
    while (is("&&")) {
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(BinOp::And, l, parse_equality(), loc);
    }
    return l;
  }

  ExprPtr parse_equality() {
    auto l = parse_relational();
    while (is("==") || is("!=")) {
      BinOp op = is("==") ? BinOp::Eq : BinOp::Ne;
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(op, l, parse_relational(), loc);
    }
    return l;
  }

  ExprPtr parse_relational() {
    auto l = parse_additive();
    for (;;) {
      BinOp op;
      if (is("<")) op = BinOp::Lt;
      else if (is("<=")) op = BinOp::Le;
      else if (is(">")) op = BinOp::Gt;
      else if (is(">=")) op = BinOp::Ge;
      else return l;
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(op, l, parse_additive(), loc);
    }
  }

  ExprPtr parse_additive() {
    auto l = parse_multiplicative();
    while (is("+") || is("-")) {
      BinOp op = is("+") ? BinOp::Add : BinOp::Sub;
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(op, l, parse_multiplicative(), loc);
    }
    return l;
  }

  ExprPtr parse_multiplicative() {
    auto l = parse_unary();
    while (is("*") || is("/")) {
      BinOp op = is("*") ? BinOp::Mul : BinOp::Div;
      SourceLoc loc = toks_[pos_++].loc;
      l = Expr::binary(op, l, parse_unary(), loc);
    }
    return l;
  }

  ExprPtr parse_unary() {
    SourceLoc loc = peek().loc;
    if (accept("-")) {
      auto operand = parse_unary();
      if (operand->kind == Expr::Kind::IntLit) return Expr::int_lit(-operand->value, loc);
      return Expr::unary(UnOp::Neg, operand, loc);
    }
    if (accept("!")) return Expr::unary(UnOp::Not, parse_unary(), loc);
    if (accept("*")) return Expr::unary(UnOp::Deref, parse_unary(), loc);
    if (accept("&")) {
      auto operand = parse_unary();
      if (operand->kind != Expr::Kind::Var)
        throw ParseError("'&' requires a variable", loc);
      return Expr::unary(UnOp::AddrOf, operand, loc);
    }
    // Cast: `(int*) e` is accepted and dropped.
    if (is("(") && (is("int", 1) || is("void", 1))) {
      ++pos_;
      ++pos_;
      parse_stars();
      expect(")");
      return parse_unary();
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    auto e = parse_primary();
    while (is("[")) {
      SourceLoc loc = toks_[pos_++].loc;
      auto index = parse_expr();
      expect("]");
      e = Expr::unary(UnOp::Deref, Expr::binary(BinOp::Add, e, index, loc), loc);
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    SourceLoc loc = t.loc;
    if (t.kind == Token::Kind::Int) {
      ++pos_;
      return Expr::int_lit(t.value, loc);
    }
    if (accept("sizeof")) {
      expect("(");
      if (!starts_type()) throw ParseError("sizeof expects a type", peek().loc);
      ++pos_;
      int depth = parse_stars();
      expect(")");
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::SizeOf;
      e->value = depth;
      e->loc = loc;
      return e;
    }
    if (accept("(")) {
      auto e = parse_expr();
      expect(")");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      std::string name = t.text;
      ++pos_;
      if (accept("(")) {
        std::vector<ExprPtr> args;
        if (!is(")")) {
          do args.push_back(parse_expr());
          while (accept(","));
        }
        expect(")");
        return Expr::call(name, std::move(args), loc);
      }
      if (!is_declared(name)) throw ParseError("undeclared variable '" + name + "'", loc);
      return Expr::variable(name, loc);
    }
    throw ParseError("expected expression but found '" + describe(t) + "'", loc);
  }
};

int count_lines(std::string_view text) {
  int n = 1;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

Program parse_files(const std::vector<SourceFile>& files) {
  Program prog;
  for (size_t i = 0; i < files.size(); ++i) {
    SourceFile sf = files[i];
    sf.line_count = count_lines(sf.text);
    prog.source_files.push_back(sf);
    LexResult lexed = lex(sf.text, static_cast<int>(i));
    for (auto& a : lexed.annotations) prog.annotations.push_back(std::move(a));
    Parser parser(std::move(lexed.tokens), prog);
    parser.parse_translation_unit();
  }
  return prog;
}

Program parse(std::string_view source_text, const std::string& path) {
  return parse_files({SourceFile{path, std::string(source_text), 0}});
}

}  // namespace diverge

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liseq/ast.hpp"
#include "liseq/check.hpp"
#include "liseq/lexer.hpp"

namespace liseq {

struct ParseOptions {
  // Range for 'int' declared without an explicit [lo,hi].
  std::int64_t default_int_lo = 0;
  std::int64_t default_int_hi = 7;
};

struct ParamParseResult {
  std::optional<ParamProgram> program;
  DiagList diags;
};

struct SeqParseResult {
  std::optional<SeqProgram> program;
  DiagList diags;
};

namespace detail {

class Parser {
 public:
  Parser(std::vector<Token> toks, DiagList& diags, ParseOptions opts, bool param_mode)
      : toks_(std::move(toks)), diags_(diags), opts_(opts), param_mode_(param_mode) {}

  ParamProgram parse_param_program() {
    ParamProgram p;
    p.shared = parse_vardecs();
    if (peek().kind == Tok::KwInit) {
      next();
      expect(Tok::Colon, "':' after 'init'");
      p.init_body = parse_stmts(p);
    }
    // declaration initializers run before the init block, in declaration order
    std::vector<Stmt> pre;
    for (auto& d : p.shared) {
      if (d.init) {
        Stmt s;
        s.kind = StmtKind::Assign;
        s.pc = p.fresh_pc();
        s.pos = d.pos;
        s.lhs = d.name;
        s.expr = d.type.is_bool ? Expr::bool_const(*d.init != 0) : Expr::constant(*d.init);
        s.has_expr = true;
        pre.push_back(std::move(s));
        d.init.reset();
      }
    }
    pre.insert(pre.end(), p.init_body.begin(), p.init_body.end());
    p.init_body = std::move(pre);
    while (peek().kind == Tok::KwProcess) p.processes.push_back(parse_process(p));
    if (p.processes.empty()) diags_.error(peek().pos, "expected at least one process");
    expect(Tok::End, "end of input");
    return p;
  }

  SeqProgram parse_seq_program() {
    SeqProgram p;
    p.globals = parse_vardecs();
    while (peek().kind == Tok::KwVoid || peek().kind == Tok::KwBool || peek().kind == Tok::KwInt)
      p.procs.push_back(parse_procedure(p));
    if (p.procs.empty()) diags_.error(peek().pos, "expected at least one procedure");
    expect(Tok::End, "end of input");
    return p;
  }

 private:
  const Token& peek(size_t k = 0) const {
    size_t i = i_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (i_ < toks_.size() - 1) ++i_;
    return t;
  }
  bool accept(Tok k) {
    if (peek().kind == k) {
      next();
      return true;
    }
    return false;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) diags_.error(peek().pos, std::string("expected ") + what);
  }

  std::string expect_ident() {
    if (peek().kind != Tok::Ident) {
      diags_.error(peek().pos, "expected identifier");
      return "<error>";
    }
    const Token& t = next();
    if (param_mode_ && is_generated_name(t.text))
      diags_.error(t.pos, "identifier uses reserved prefix '" + std::string(kGenPrefix) + "'");
    return t.text;
  }

  bool at_type() const {
    Tok k = peek().kind;
    return k == Tok::KwBool || k == Tok::KwInt;
  }

  Type parse_type() {
    if (accept(Tok::KwBool)) return Type::boolean();
    expect(Tok::KwInt, "'bool' or 'int'");
    std::int64_t lo = opts_.default_int_lo, hi = opts_.default_int_hi;
    if (accept(Tok::LBracket)) {
      lo = parse_int_const();
      expect(Tok::Comma, "',' in int range");
      hi = parse_int_const();
      expect(Tok::RBracket, "']' after int range");
      if (lo > hi) diags_.error(peek().pos, "empty int range");
    }
    return Type::integer(lo, hi);
  }

  std::int64_t parse_int_const() {
    bool neg = accept(Tok::Minus);
    if (peek().kind != Tok::IntLit) {
      diags_.error(peek().pos, "expected integer literal");
      return 0;
    }
    std::int64_t v = next().value;
    return neg ? -v : v;
  }

  // A run of declarations: type name [:= const] (, name [:= const])* ;
  std::vector<VarDecl> parse_vardecs() {
    std::vector<VarDecl> out;
    while (at_type()) {
      // procedure definitions also start with a type: "bool f ( ... )"
      if (peek(1).kind == Tok::Ident && peek(2).kind == Tok::LParen) break;
      if (peek(1).kind == Tok::LBracket) {
        // scan past the range to check for "int[lo,hi] f ("
        size_t j = 2;
        while (peek(j).kind != Tok::RBracket && peek(j).kind != Tok::End) ++j;
        if (peek(j + 1).kind == Tok::Ident && peek(j + 2).kind == Tok::LParen) break;
      }
      Type t = parse_type();
      for (;;) {
        VarDecl d;
        d.pos = peek().pos;
        d.name = expect_ident();
        d.type = t;
        if (accept(Tok::Assign)) d.init = parse_const_initializer(t);
        out.push_back(std::move(d));
        if (!accept(Tok::Comma)) break;
      }
      expect(Tok::Semi, "';' after declaration");
    }
    return out;
  }

  std::int64_t parse_const_initializer(const Type& t) {
    Pos pos = peek().pos;
    if (accept(Tok::KwTrue)) return 1;
    if (accept(Tok::KwFalse)) return 0;
    std::int64_t v = parse_int_const();
    if (!t.contains(v)) diags_.error(pos, "initializer out of range");
    return v;
  }

  Process parse_process(ParamProgram& pgm) {
    Process proc;
    proc.pos = peek().pos;
    expect(Tok::KwProcess, "'process'");
    proc.name = expect_ident();
    expect(Tok::Colon, "':' after process name");
    proc.globals = parse_vardecs();
    while (peek().kind == Tok::KwVoid || at_type() ||
           (peek().kind == Tok::Ident && peek(1).kind == Tok::LParen)) {
      proc.procs.push_back(parse_procedure(pgm));
    }
    if (proc.procs.empty()) diags_.error(peek().pos, "process has no procedures");
    return proc;
  }

  template <class Program>
  Procedure parse_procedure(Program& pgm) {
    Procedure f;
    f.pos = peek().pos;
    if (accept(Tok::KwVoid)) {
      f.ret.reset();
    } else if (at_type()) {
      f.ret = parse_type();
    }  // bare "name()" means void main-style procedure
    f.name = expect_ident();
    expect(Tok::LParen, "'(' after procedure name");
    if (peek().kind != Tok::RParen) {
      for (;;) {
        VarDecl d;
        d.pos = peek().pos;
        d.type = parse_type();
        d.name = expect_ident();
        f.params.push_back(std::move(d));
        if (!accept(Tok::Comma)) break;
      }
    }
    expect(Tok::RParen, "')' after parameters");
    expect(Tok::KwBegin, "'begin'");
    f.locals = parse_vardecs();
    f.body = parse_stmts(pgm);
    expect(Tok::KwEnd, "'end'");
    return f;
  }

  bool at_stmt() const {
    switch (peek().kind) {
      case Tok::KwSkip:
      case Tok::KwAssume:
      case Tok::KwAssert:
      case Tok::KwCall:
      case Tok::KwReturn:
      case Tok::KwWhile:
      case Tok::KwIf:
      case Tok::KwAtomic:
        return true;
      case Tok::Ident:
        return peek(1).kind == Tok::Assign;
      default:
        return false;
    }
  }

  template <class Program>
  std::vector<Stmt> parse_stmts(Program& pgm) {
    std::vector<Stmt> out;
    while (at_stmt()) out.push_back(parse_stmt(pgm));
    return out;
  }

  template <class Program>
  Stmt parse_stmt(Program& pgm) {
    Stmt s;
    s.pos = peek().pos;
    s.pc = pgm.fresh_pc();
    switch (peek().kind) {
      case Tok::KwSkip:
        next();
        s.kind = StmtKind::Skip;
        expect(Tok::Semi, "';'");
        break;
      case Tok::KwAssume:
      case Tok::KwAssert: {
        s.kind = next().kind == Tok::KwAssume ? StmtKind::Assume : StmtKind::Assert;
        expect(Tok::LParen, "'('");
        s.expr = parse_expr();
        s.has_expr = true;
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        break;
      }
      case Tok::KwCall: {
        next();
        s.kind = StmtKind::Call;
        s.callee = expect_ident();
        expect(Tok::LParen, "'('");
        if (peek().kind != Tok::RParen) {
          for (;;) {
            s.args.push_back(parse_expr());
            if (!accept(Tok::Comma)) break;
          }
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        break;
      }
      case Tok::KwReturn: {
        next();
        s.kind = StmtKind::Return;
        if (peek().kind != Tok::Semi) {
          s.expr = parse_expr();
          s.has_expr = true;
        }
        expect(Tok::Semi, "';'");
        break;
      }
      case Tok::KwWhile: {
        next();
        s.kind = StmtKind::While;
        expect(Tok::LParen, "'('");
        s.expr = parse_expr();
        s.has_expr = true;
        expect(Tok::RParen, "')'");
        expect(Tok::KwDo, "'do'");
        s.body = parse_stmts(pgm);
        expect(Tok::KwOd, "'od'");
        break;
      }
      case Tok::KwIf: {
        next();
        s.kind = StmtKind::If;
        expect(Tok::LParen, "'('");
        s.expr = parse_expr();
        s.has_expr = true;
        expect(Tok::RParen, "')'");
        expect(Tok::KwThen, "'then'");
        s.body = parse_stmts(pgm);
        if (accept(Tok::KwElse)) s.else_body = parse_stmts(pgm);
        expect(Tok::KwFi, "'fi'");
        break;
      }
      case Tok::KwAtomic: {
        if (!param_mode_) {
          diags_.error(peek().pos, "'atomic' is not allowed in sequential programs");
          next();
          break;
        }
        next();
        s.kind = StmtKind::Atomic;
        expect(Tok::KwBegin, "'begin'");
        s.body = parse_stmts(pgm);
        expect(Tok::KwEnd, "'end'");
        break;
      }
      case Tok::Ident: {
        s.lhs = expect_ident();
        expect(Tok::Assign, "':='");
        Expr rhs = parse_expr();
        if (rhs.kind == ExprKind::CallFn) {
          s.kind = StmtKind::Call;
          s.callee = rhs.name;
          s.args = std::move(rhs.args);
        } else {
          s.kind = StmtKind::Assign;
          s.expr = std::move(rhs);
          s.has_expr = true;
        }
        expect(Tok::Semi, "';'");
        break;
      }
      default:
        diags_.error(peek().pos, "expected statement");
        next();
        break;
    }
    return s;
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    Expr e = parse_and();
    while (peek().kind == Tok::OrOr) {
      Pos pos = next().pos;
      Expr r = parse_and();
      e = Expr::bin(BinOp::Or, std::move(e), std::move(r));
      e.pos = pos;
    }
    return e;
  }

  Expr parse_and() {
    Expr e = parse_cmp();
    while (peek().kind == Tok::AndAnd) {
      Pos pos = next().pos;
      Expr r = parse_cmp();
      // a && b desugars to !(!a || !b)
      e = Expr::make_not(Expr::bin(BinOp::Or, Expr::make_not(std::move(e)),
                                   Expr::make_not(std::move(r))));
      e.pos = pos;
    }
    return e;
  }

  Expr parse_cmp() {
    Expr e = parse_add();
    for (;;) {
      BinOp op;
      switch (peek().kind) {
        case Tok::EqEq: op = BinOp::Eq; break;
        case Tok::NotEq: op = BinOp::Ne; break;
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Ge: op = BinOp::Ge; break;
        default: return e;
      }
      Pos pos = next().pos;
      Expr r = parse_add();
      e = Expr::bin(op, std::move(e), std::move(r));
      e.pos = pos;
    }
  }

  Expr parse_add() {
    Expr e = parse_mul();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      BinOp op = peek().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      Pos pos = next().pos;
      Expr r = parse_mul();
      e = Expr::bin(op, std::move(e), std::move(r));
      e.pos = pos;
    }
    return e;
  }

  Expr parse_mul() {
    Expr e = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      BinOp op = peek().kind == Tok::Star ? BinOp::Mul : BinOp::Div;
      Pos pos = next().pos;
      Expr r = parse_unary();
      e = Expr::bin(op, std::move(e), std::move(r));
      e.pos = pos;
    }
    return e;
  }

  Expr parse_unary() {
    if (peek().kind == Tok::Not) {
      Pos pos = next().pos;
      Expr e = Expr::make_not(parse_unary());
      e.pos = pos;
      return e;
    }
    if (peek().kind == Tok::Minus) {
      Pos pos = next().pos;
      if (peek().kind == Tok::IntLit) {
        Expr e = Expr::constant(-next().value);
        e.pos = pos;
        return e;
      }
      Expr e = Expr::bin(BinOp::Sub, Expr::constant(0), parse_unary());
      e.pos = pos;
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    Pos pos = peek().pos;
    switch (peek().kind) {
      case Tok::KwTrue:
        next();
        return with_pos(Expr::bool_const(true), pos);
      case Tok::KwFalse:
        next();
        return with_pos(Expr::bool_const(false), pos);
      case Tok::Star:
        // '*' in operand position is the nondeterministic boolean
        next();
        return with_pos(Expr::nondet(), pos);
      case Tok::IntLit:
        return with_pos(Expr::constant(next().value), pos);
      case Tok::LParen: {
        next();
        Expr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        std::string name = expect_ident();
        if (accept(Tok::LParen)) {
          Expr e;
          e.kind = ExprKind::CallFn;
          e.name = std::move(name);
          e.pos = pos;
          if (peek().kind != Tok::RParen) {
            for (;;) {
              e.args.push_back(parse_expr());
              if (!accept(Tok::Comma)) break;
            }
          }
          expect(Tok::RParen, "')'");
          return e;
        }
        return with_pos(Expr::var(std::move(name)), pos);
      }
      default:
        diags_.error(pos, "expected expression");
        next();
        return Expr::bool_const(false);
    }
  }

  static Expr with_pos(Expr e, Pos p) {
    e.pos = p;
    return e;
  }

  std::vector<Token> toks_;
  DiagList& diags_;
  ParseOptions opts_;
  bool param_mode_;
  size_t i_ = 0;
};

}  // namespace detail

inline ParamParseResult parse_param(std::string_view text, ParseOptions opts = {}) {
  ParamParseResult r;
  Lexer lex(text, r.diags);
  detail::Parser p(lex.run(), r.diags, opts, /*param_mode=*/true);
  ParamProgram pgm = p.parse_param_program();
  if (r.diags.ok()) check_param(pgm, r.diags);
  if (r.diags.ok()) r.program = std::move(pgm);
  return r;
}

inline SeqParseResult parse_seq(std::string_view text, ParseOptions opts = {}) {
  SeqParseResult r;
  Lexer lex(text, r.diags);
  detail::Parser p(lex.run(), r.diags, opts, /*param_mode=*/false);
  SeqProgram pgm = p.parse_seq_program();
  if (r.diags.ok()) check_seq(pgm, r.diags);
  if (r.diags.ok()) r.program = std::move(pgm);
  return r;
}

}  // namespace liseq

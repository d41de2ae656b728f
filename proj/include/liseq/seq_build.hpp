#pragma once

// Small statement/expression builders shared by the two sequentializers.

#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace liseq::detail {

inline Expr vref(const std::string& n) { return Expr::var(n); }

inline Expr eq(Expr a, Expr b) { return Expr::bin(BinOp::Eq, std::move(a), std::move(b)); }

template <class Program>
Stmt mk_assign(Program& p, const std::string& lhs, Expr rhs) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.pc = p.fresh_pc();
  s.lhs = lhs;
  s.expr = std::move(rhs);
  s.has_expr = true;
  return s;
}

template <class Program>
Stmt mk_assume(Program& p, Expr cond) {
  Stmt s;
  s.kind = StmtKind::Assume;
  s.pc = p.fresh_pc();
  s.expr = std::move(cond);
  s.has_expr = true;
  return s;
}

template <class Program>
Stmt mk_assert(Program& p, Expr cond) {
  Stmt s;
  s.kind = StmtKind::Assert;
  s.pc = p.fresh_pc();
  s.expr = std::move(cond);
  s.has_expr = true;
  return s;
}

template <class Program>
Stmt mk_return(Program& p) {
  Stmt s;
  s.kind = StmtKind::Return;
  s.pc = p.fresh_pc();
  return s;
}

template <class Program>
Stmt mk_call(Program& p, const std::string& callee, std::vector<Expr> args = {}) {
  Stmt s;
  s.kind = StmtKind::Call;
  s.pc = p.fresh_pc();
  s.callee = callee;
  s.args = std::move(args);
  return s;
}

template <class Program>
Stmt mk_if(Program& p, Expr cond, std::vector<Stmt> then_b, std::vector<Stmt> else_b = {}) {
  Stmt s;
  s.kind = StmtKind::If;
  s.pc = p.fresh_pc();
  s.expr = std::move(cond);
  s.has_expr = true;
  s.body = std::move(then_b);
  s.else_body = std::move(else_b);
  return s;
}

template <class Program>
Stmt mk_while(Program& p, Expr cond, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::While;
  s.pc = p.fresh_pc();
  s.expr = std::move(cond);
  s.has_expr = true;
  s.body = std::move(body);
  return s;
}

// x := arbitrary value of its type, as plain language statements
template <class Program>
void mk_havoc(Program& p, const VarDecl& d, std::vector<Stmt>& out) {
  if (d.type.is_bool) {
    out.push_back(mk_assign(p, d.name, Expr::nondet()));
    return;
  }
  // if (*) then x := lo; else if (*) then x := lo+1; ... else x := hi; fi
  std::vector<Stmt> tail{mk_assign(p, d.name, Expr::constant(d.type.hi))};
  for (std::int64_t v = d.type.hi - 1; v >= d.type.lo; --v) {
    std::vector<Stmt> then_b{mk_assign(p, d.name, Expr::constant(v))};
    std::vector<Stmt> wrapped{mk_if(p, Expr::nondet(), std::move(then_b), std::move(tail))};
    tail = std::move(wrapped);
  }
  for (auto& s : tail) out.push_back(std::move(s));
}

inline Expr init_const(const VarDecl& d) {
  std::int64_t v = d.init ? *d.init : (d.type.is_bool ? 0 : d.type.lo);
  return d.type.is_bool ? Expr::bool_const(v != 0) : Expr::constant(v);
}

}  // namespace liseq::detail

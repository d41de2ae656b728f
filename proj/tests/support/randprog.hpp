#pragma once

// Random well-formed programs for round-trip testing. Generated programs
// always pass the scope/type checker: names are drawn from disjoint pools,
// expressions are built type-directed, and placement rules (atomic, return,
// calls) mirror the checker.

#include <random>
#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace randprog {

using namespace liseq;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  ParamProgram param_program() {
    ParamProgram p;
    reset();
    int nshared = pick(1, 2);
    for (int i = 0; i < nshared; ++i)
      p.shared.push_back(decl("s" + std::to_string(i), rand_type(), /*with_init=*/false));
    scope_ = p.shared;
    // init: straight-line shared setup (no decl initializers; those would be
    // desugared on reparse and break structural comparison)
    int ninit = pick(0, 3);
    for (int i = 0; i < ninit; ++i) p.init_body.push_back(init_assign(p));
    int nproc = pick(1, 2);
    for (int i = 0; i < nproc; ++i) p.processes.push_back(process(p, i));
    return p;
  }

  SeqProgram seq_program() {
    SeqProgram p;
    reset();
    int ng = pick(1, 3);
    for (int i = 0; i < ng; ++i)
      p.globals.push_back(decl("g" + std::to_string(i), rand_type(), coin()));
    scope_ = p.globals;
    procedures(p, p.procs, "", /*allow_atomic=*/false);
    return p;
  }

 private:
  std::mt19937_64 rng_;
  std::vector<VarDecl> scope_;       // variables visible at the current point
  std::vector<Procedure>* procs_ = nullptr;  // callable helpers (already emitted)
  bool in_atomic_ = false;
  bool allow_atomic_ = false;
  const Procedure* current_ = nullptr;

  void reset() {
    scope_.clear();
    procs_ = nullptr;
    in_atomic_ = false;
    current_ = nullptr;
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }

  Type rand_type() {
    if (coin()) return Type::boolean();
    int lo = pick(0, 2);
    return Type::integer(lo, lo + pick(1, 4));
  }

  VarDecl decl(std::string name, Type t, bool with_init) {
    VarDecl d;
    d.name = std::move(name);
    d.type = t;
    if (with_init)
      d.init = t.is_bool ? static_cast<std::int64_t>(coin())
                         : t.lo + pick(0, static_cast<int>(t.hi - t.lo));
    return d;
  }

  Stmt init_assign(ParamProgram& p) {
    Stmt s;
    s.kind = StmtKind::Assign;
    s.pc = p.fresh_pc();
    const VarDecl& v = scope_[pick(0, static_cast<int>(scope_.size()) - 1)];
    s.lhs = v.name;
    s.expr = expr(v.type.is_bool, 1);
    s.has_expr = true;
    return s;
  }

  Process process(ParamProgram& p, int idx) {
    Process proc;
    proc.name = "P" + std::to_string(idx);
    auto saved = scope_;
    int ng = pick(0, 2);
    for (int i = 0; i < ng; ++i) {
      VarDecl d = decl(proc.name + "g" + std::to_string(i), rand_type(), coin());
      scope_.push_back(d);
      proc.globals.push_back(std::move(d));
    }
    procedures(p, proc.procs, proc.name, /*allow_atomic=*/true);
    scope_ = saved;
    return proc;
  }

  template <class Program>
  void procedures(Program& p, std::vector<Procedure>& out, const std::string& prefix,
                  bool allow_atomic) {
    allow_atomic_ = allow_atomic;
    procs_ = &out;
    int nhelpers = pick(0, 2);
    for (int i = 0; i < nhelpers; ++i) {
      Procedure f;
      f.name = prefix + "f" + std::to_string(i);
      if (coin()) f.ret = rand_type();
      int np = pick(0, 2);
      for (int j = 0; j < np; ++j)
        f.params.push_back(decl(f.name + "a" + std::to_string(j), rand_type(), false));
      fill_procedure(p, f);
      out.push_back(std::move(f));
    }
    Procedure m;
    m.name = "main";
    fill_procedure(p, m);
    out.push_back(std::move(m));
    procs_ = nullptr;
  }

  template <class Program>
  void fill_procedure(Program& p, Procedure& f) {
    auto saved = scope_;
    for (const auto& d : f.params) scope_.push_back(d);
    int nl = pick(0, 2);
    for (int i = 0; i < nl; ++i) {
      VarDecl d = decl(f.name + "l" + std::to_string(i), rand_type(), coin());
      scope_.push_back(d);
      f.locals.push_back(std::move(d));
    }
    current_ = &f;
    f.body = stmts(p, 2);
    if (f.ret) {  // guarantee a value on every run-to-end path
      Stmt r;
      r.kind = StmtKind::Return;
      r.pc = p.fresh_pc();
      r.expr = expr(f.ret->is_bool, 1);
      r.has_expr = true;
      out_push(f.body, std::move(r));
    }
    current_ = nullptr;
    scope_ = saved;
  }

  static void out_push(std::vector<Stmt>& body, Stmt s) { body.push_back(std::move(s)); }

  template <class Program>
  std::vector<Stmt> stmts(Program& p, int depth) {
    std::vector<Stmt> out;
    int n = pick(depth > 1 ? 1 : 0, 3);
    for (int i = 0; i < n; ++i) out.push_back(stmt(p, depth));
    return out;
  }

  template <class Program>
  Stmt stmt(Program& p, int depth) {
    Stmt s;
    s.pc = p.fresh_pc();
    for (;;) {
      int pc = s.pc;
      s = Stmt{};  // drop fields set by an abandoned draw
      s.pc = pc;
      int c = pick(0, 9);
      switch (c) {
        case 0:
          s.kind = StmtKind::Skip;
          return s;
        case 1:
        case 2: {
          s.kind = StmtKind::Assign;
          const VarDecl& v = scope_[pick(0, static_cast<int>(scope_.size()) - 1)];
          s.lhs = v.name;
          s.expr = expr(v.type.is_bool, 2);
          s.has_expr = true;
          return s;
        }
        case 3:
          s.kind = coin() ? StmtKind::Assume : StmtKind::Assert;
          s.expr = expr(true, 2);
          s.has_expr = true;
          return s;
        case 4: {
          if (in_atomic_ || !procs_ || procs_->empty()) continue;
          const Procedure& f = (*procs_)[pick(0, static_cast<int>(procs_->size()) - 1)];
          s.kind = StmtKind::Call;
          s.callee = f.name;
          for (const auto& a : f.params) s.args.push_back(expr(a.type.is_bool, 1));
          if (f.ret && coin()) {
            // pick a type-compatible destination
            for (int tries = 0; tries < 8; ++tries) {
              const VarDecl& v = scope_[pick(0, static_cast<int>(scope_.size()) - 1)];
              if (v.type.is_bool == f.ret->is_bool) {
                s.lhs = v.name;
                break;
              }
            }
            if (s.lhs.empty()) continue;  // no destination found; redraw
          }
          return s;
        }
        case 5: {
          if (in_atomic_ || !current_) continue;
          s.kind = StmtKind::Return;
          if (current_->ret) {
            s.expr = expr(current_->ret->is_bool, 1);
            s.has_expr = true;
          }
          return s;
        }
        case 6: {
          if (depth <= 0) continue;
          s.kind = StmtKind::While;
          s.expr = expr(true, 1);
          s.has_expr = true;
          s.body = stmts(p, depth - 1);
          return s;
        }
        case 7: {
          if (depth <= 0) continue;
          s.kind = StmtKind::If;
          s.expr = expr(true, 1);
          s.has_expr = true;
          s.body = stmts(p, depth - 1);
          if (coin()) s.else_body = stmts(p, depth - 1);
          return s;
        }
        case 8: {
          if (depth <= 0 || in_atomic_ || !allow_atomic_) continue;
          s.kind = StmtKind::Atomic;
          in_atomic_ = true;
          s.body = stmts(p, depth - 1);
          in_atomic_ = false;
          return s;
        }
        default:
          s.kind = StmtKind::Assume;
          s.expr = Expr::bool_const(true);
          s.has_expr = true;
          return s;
      }
    }
  }

  const VarDecl* find_var(bool want_bool) {
    int n = static_cast<int>(scope_.size());
    int start = pick(0, n - 1);
    for (int i = 0; i < n; ++i) {
      const VarDecl& v = scope_[(start + i) % n];
      if (v.type.is_bool == want_bool) return &v;
    }
    return nullptr;
  }

  Expr expr(bool want_bool, int depth) {
    if (want_bool) {
      int c = pick(0, depth > 0 ? 6 : 2);
      switch (c) {
        case 0:
          return Expr::bool_const(coin());
        case 1:
          return Expr::nondet();
        case 2: {
          if (const VarDecl* v = find_var(true)) return Expr::var(v->name);
          return Expr::bool_const(coin());
        }
        case 3:
          return Expr::make_not(expr(true, depth - 1));
        case 4:
          return Expr::bin(BinOp::Or, expr(true, depth - 1), expr(true, depth - 1));
        case 5: {
          BinOp op = static_cast<BinOp>(pick(static_cast<int>(BinOp::Lt),
                                             static_cast<int>(BinOp::Ge)));
          return Expr::bin(op, expr(false, depth - 1), expr(false, depth - 1));
        }
        default: {
          BinOp op = coin() ? BinOp::Eq : BinOp::Ne;
          bool b = coin();
          return Expr::bin(op, expr(b, depth - 1), expr(b, depth - 1));
        }
      }
    }
    int c = pick(0, depth > 0 ? 3 : 1);
    switch (c) {
      case 0:
        return Expr::constant(pick(-2, 6));
      case 1: {
        if (const VarDecl* v = find_var(false)) return Expr::var(v->name);
        return Expr::constant(pick(0, 4));
      }
      default: {
        BinOp op = static_cast<BinOp>(pick(static_cast<int>(BinOp::Add),
                                           static_cast<int>(BinOp::Div)));
        return Expr::bin(op, expr(false, depth - 1), expr(false, depth - 1));
      }
    }
  }
};

}  // namespace randprog

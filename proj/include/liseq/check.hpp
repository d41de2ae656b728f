#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "liseq/ast.hpp"
#include "liseq/diag.hpp"

namespace liseq {

namespace detail {

// Scope and type checking shared by the two languages. Variable shadowing is
// rejected: every name is declared at most once along a scope chain.
class Checker {
 public:
  explicit Checker(DiagList& diags) : diags_(diags) {}

  void check_param(const ParamProgram& p) {
    declare_scope(p.shared, "shared");
    // init sees only shared variables and may not call procedures
    in_init_ = true;
    check_body(p.init_body, nullptr, false);
    in_init_ = false;
    for (const auto& proc : p.processes) {
      auto saved_vars = vars_;
      declare_scope(proc.globals, "process global");
      procs_.clear();
      int mains = 0;
      for (const auto& f : proc.procs) {
        if (procs_.count(f.name)) diags_.error(f.pos, "duplicate procedure '" + f.name + "'");
        procs_[f.name] = &f;
        if (f.name == "main") {
          ++mains;
          if (!f.params.empty()) diags_.error(f.pos, "main takes no parameters");
          if (f.ret) diags_.error(f.pos, "main must be void");
        }
      }
      if (mains != 1) diags_.error(proc.pos, "process must have exactly one procedure named main");
      for (const auto& f : proc.procs) check_procedure(f, /*allow_atomic=*/true);
      vars_ = saved_vars;
    }
  }

  void check_seq(const SeqProgram& p) {
    declare_scope(p.globals, "global");
    procs_.clear();
    int mains = 0;
    for (const auto& f : p.procs) {
      if (procs_.count(f.name)) diags_.error(f.pos, "duplicate procedure '" + f.name + "'");
      procs_[f.name] = &f;
      if (f.name == "main") {
        ++mains;
        if (!f.params.empty()) diags_.error(f.pos, "main takes no parameters");
        if (f.ret) diags_.error(f.pos, "main must be void");
      }
    }
    if (mains != 1) diags_.error(Pos{}, "program must have exactly one procedure named main");
    for (const auto& f : p.procs) check_procedure(f, /*allow_atomic=*/false);
  }

 private:
  void declare_scope(const std::vector<VarDecl>& decls, const char* what) {
    for (const auto& d : decls) {
      if (vars_.count(d.name))
        diags_.error(d.pos, std::string("duplicate ") + what + " variable '" + d.name + "'");
      if (d.init && !d.type.contains(*d.init))
        diags_.error(d.pos, "initializer out of range for '" + d.name + "'");
      vars_[d.name] = d.type;
    }
  }

  void check_procedure(const Procedure& f, bool allow_atomic) {
    auto saved = vars_;
    declare_scope(f.params, "parameter");
    declare_scope(f.locals, "local");
    current_ = &f;
    check_body(f.body, &f, allow_atomic);
    current_ = nullptr;
    vars_ = saved;
  }

  void check_body(const std::vector<Stmt>& body, const Procedure* f, bool allow_atomic) {
    for (const auto& s : body) check_stmt(s, f, allow_atomic);
  }

  void check_stmt(const Stmt& s, const Procedure* f, bool allow_atomic) {
    switch (s.kind) {
      case StmtKind::Skip:
        break;
      case StmtKind::Assign: {
        auto lt = lookup(s.lhs, s.pos);
        auto rt = check_expr(s.expr);
        if (lt && rt && lt->is_bool != rt->is_bool)
          diags_.error(s.pos, "type mismatch in assignment to '" + s.lhs + "'");
        break;
      }
      case StmtKind::Assume:
      case StmtKind::Assert: {
        auto t = check_expr(s.expr);
        if (t && !t->is_bool) diags_.error(s.pos, "condition must be boolean");
        break;
      }
      case StmtKind::Call: {
        if (in_atomic_) diags_.error(s.pos, "procedure call inside atomic block");
        if (in_init_) {
          diags_.error(s.pos, "procedure call in init block");
          break;
        }
        if (s.callee == "main") {
          diags_.error(s.pos, "call to main");
          break;
        }
        auto it = procs_.find(s.callee);
        if (it == procs_.end()) {
          diags_.error(s.pos, "call to undefined procedure '" + s.callee + "'");
          break;
        }
        const Procedure& callee = *it->second;
        if (s.args.size() != callee.params.size()) {
          diags_.error(s.pos, "wrong number of arguments to '" + s.callee + "'");
          break;
        }
        for (size_t i = 0; i < s.args.size(); ++i) {
          auto at = check_expr(s.args[i]);
          if (at && at->is_bool != callee.params[i].type.is_bool)
            diags_.error(s.pos, "argument type mismatch in call to '" + s.callee + "'");
        }
        if (!s.lhs.empty()) {
          auto lt = lookup(s.lhs, s.pos);
          if (!callee.ret) {
            diags_.error(s.pos, "'" + s.callee + "' returns no value");
          } else if (lt && lt->is_bool != callee.ret->is_bool) {
            diags_.error(s.pos, "type mismatch in assignment from '" + s.callee + "'");
          }
        }
        break;
      }
      case StmtKind::Return: {
        if (in_init_ || !f) {
          diags_.error(s.pos, "return outside of a procedure");
          break;
        }
        if (in_atomic_) diags_.error(s.pos, "return inside atomic block");
        if (f->ret && !s.has_expr) diags_.error(s.pos, "missing return value");
        if (!f->ret && s.has_expr) diags_.error(s.pos, "void procedure returns a value");
        if (s.has_expr) {
          auto t = check_expr(s.expr);
          if (t && f->ret && t->is_bool != f->ret->is_bool)
            diags_.error(s.pos, "return type mismatch");
        }
        break;
      }
      case StmtKind::While:
      case StmtKind::If: {
        auto t = check_expr(s.expr);
        if (t && !t->is_bool) diags_.error(s.pos, "condition must be boolean");
        check_body(s.body, f, allow_atomic);
        check_body(s.else_body, f, allow_atomic);
        break;
      }
      case StmtKind::Atomic: {
        if (!allow_atomic || in_init_) {
          diags_.error(s.pos, "atomic block not allowed here");
          break;
        }
        if (in_atomic_) {
          diags_.error(s.pos, "nested atomic block");
          break;
        }
        in_atomic_ = true;
        check_body(s.body, f, allow_atomic);
        in_atomic_ = false;
        break;
      }
    }
  }

  std::optional<Type> lookup(const std::string& name, Pos pos) {
    auto it = vars_.find(name);
    if (it == vars_.end()) {
      diags_.error(pos, "undeclared variable '" + name + "'");
      return std::nullopt;
    }
    return it->second;
  }

  std::optional<Type> check_expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Const:
        return e.is_bool_const ? Type::boolean() : Type::integer(e.value, e.value);
      case ExprKind::Var:
        return lookup(e.name, e.pos);
      case ExprKind::Nondet:
        return Type::boolean();
      case ExprKind::Not: {
        auto t = check_expr(e.args[0]);
        if (t && !t->is_bool) diags_.error(e.pos, "'!' needs a boolean operand");
        return Type::boolean();
      }
      case ExprKind::CallFn:
        // user function calls are only legal as the full right-hand side of an
        // assignment; the parser turns those into Call statements
        diags_.error(e.pos, "procedure call may only appear as 'x := f(...)' or 'call f(...)'");
        return std::nullopt;
      case ExprKind::Bin: {
        auto a = check_expr(e.args[0]);
        auto b = check_expr(e.args[1]);
        switch (e.op) {
          case BinOp::Or:
            if ((a && !a->is_bool) || (b && !b->is_bool))
              diags_.error(e.pos, "'||' needs boolean operands");
            return Type::boolean();
          case BinOp::Eq:
          case BinOp::Ne:
            if (a && b && a->is_bool != b->is_bool)
              diags_.error(e.pos, "comparison between bool and int");
            return Type::boolean();
          case BinOp::Lt:
          case BinOp::Le:
          case BinOp::Gt:
          case BinOp::Ge:
            if ((a && a->is_bool) || (b && b->is_bool))
              diags_.error(e.pos, "ordering comparison needs integer operands");
            return Type::boolean();
          default:
            if ((a && a->is_bool) || (b && b->is_bool))
              diags_.error(e.pos, "arithmetic needs integer operands");
            return Type::integer(0, 0);
        }
      }
    }
    return std::nullopt;
  }

  DiagList& diags_;
  std::map<std::string, Type> vars_;
  std::map<std::string, const Procedure*> procs_;
  const Procedure* current_ = nullptr;
  bool in_init_ = false;
  bool in_atomic_ = false;
};

}  // namespace detail

inline void check_param(const ParamProgram& p, DiagList& diags) {
  detail::Checker(diags).check_param(p);
}

inline void check_seq(const SeqProgram& p, DiagList& diags) {
  detail::Checker(diags).check_seq(p);
}

// Collects every pc in the program; used by the pc-uniqueness property.
inline void collect_pcs(const std::vector<Stmt>& body, std::vector<int>& out) {
  for (const auto& s : body) {
    out.push_back(s.pc);
    collect_pcs(s.body, out);
    collect_pcs(s.else_body, out);
  }
}

inline std::vector<int> all_pcs(const ParamProgram& p) {
  std::vector<int> out;
  collect_pcs(p.init_body, out);
  for (const auto& proc : p.processes)
    for (const auto& f : proc.procs) collect_pcs(f.body, out);
  return out;
}

inline std::vector<int> all_pcs(const SeqProgram& p) {
  std::vector<int> out;
  for (const auto& f : p.procs) collect_pcs(f.body, out);
  return out;
}

}  // namespace liseq

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace liseq {

// Flat instruction form of procedure bodies. Both interpreters and the
// pushdown lowering run over this representation, so statement-level
// semantics (what counts as one step, where switches may happen, which pc a
// localized state carries) is defined in exactly one place.

enum class VarScope { Shared, Global, Local };

struct VarRef {
  VarScope scope = VarScope::Local;
  int index = 0;
  bool operator==(const VarRef&) const = default;
};

struct VarInfo {
  std::string name;
  Type type;
  std::int64_t initial = 0;  // initializer or type default
};

struct CExpr {
  ExprKind kind = ExprKind::Const;
  std::int64_t value = 0;
  VarRef var;
  BinOp op = BinOp::Or;
  std::vector<CExpr> args;
};

enum class IOp {
  Nop,     // skip
  Assign,  // lhs := expr
  Assume,
  Assert,
  Call,    // callee(args); optional lhs receives the return value
  Return,  // optional expr
  Jump,    // unconditional, synthetic
  Branch,  // while/if condition: falls through when true, jumps to 'target' when false
  AtomicBegin,
  AtomicEnd,
};

struct Instr {
  IOp op = IOp::Nop;
  int src_pc = -1;  // pc of the source statement; -1 for synthetic control flow
  VarRef lhs;
  bool has_lhs = false;
  CExpr expr;
  bool has_expr = false;
  int callee = -1;
  std::vector<CExpr> args;
  int target = 0;
};

struct CompiledProc {
  std::string name;
  int num_params = 0;
  std::vector<VarInfo> locals;  // params first, then declared locals
  std::vector<Instr> code;      // ends with an implicit return at code.size()
  bool has_ret = false;
  Type ret_type;
};

// One process of a parameterized program, or a whole sequential program
// (which is the degenerate case with no shared segment).
struct CompiledUnit {
  std::vector<VarInfo> globals;
  std::vector<CompiledProc> procs;
  std::map<std::string, int> proc_index;
  int main_index = -1;

  int find_proc(const std::string& n) const {
    auto it = proc_index.find(n);
    return it == proc_index.end() ? -1 : it->second;
  }
};

struct CompiledParam {
  std::vector<VarInfo> shared;
  std::vector<Instr> init_code;  // references shared variables only
  std::vector<CompiledUnit> processes;
  std::vector<std::string> process_names;
};

using Valuation = std::vector<std::int64_t>;

inline std::int64_t default_value(const Type& t) { return t.is_bool ? 0 : t.lo; }

inline Valuation initial_valuation(const std::vector<VarInfo>& vars) {
  Valuation v(vars.size());
  for (size_t i = 0; i < vars.size(); ++i) v[i] = vars[i].initial;
  return v;
}

namespace detail {

class ProcCompiler {
 public:
  ProcCompiler(const std::map<std::string, VarRef>& env, const std::map<std::string, int>& procs)
      : env_(env), procs_(procs) {}

  std::vector<Instr> compile(const std::vector<Stmt>& body) {
    code_.clear();
    stmts(body);
    return std::move(code_);
  }

  CExpr expr(const Expr& e) const {
    CExpr c;
    c.kind = e.kind;
    switch (e.kind) {
      case ExprKind::Const:
      case ExprKind::Nondet:
        c.value = e.value;
        break;
      case ExprKind::Var:
        c.var = resolve(e.name);
        break;
      case ExprKind::Not:
        c.args.push_back(expr(e.args[0]));
        break;
      case ExprKind::Bin:
        c.op = e.op;
        c.args.push_back(expr(e.args[0]));
        c.args.push_back(expr(e.args[1]));
        break;
      case ExprKind::CallFn:
        throw std::logic_error("call expression survived scope checking");
    }
    return c;
  }

 private:
  VarRef resolve(const std::string& name) const {
    auto it = env_.find(name);
    if (it == env_.end()) throw std::logic_error("unresolved variable " + name);
    return it->second;
  }

  void stmts(const std::vector<Stmt>& body) {
    for (const auto& s : body) stmt(s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Skip: {
        Instr i;
        i.op = IOp::Nop;
        i.src_pc = s.pc;
        code_.push_back(std::move(i));
        break;
      }
      case StmtKind::Assign: {
        Instr i;
        i.op = IOp::Assign;
        i.src_pc = s.pc;
        i.lhs = resolve(s.lhs);
        i.has_lhs = true;
        i.expr = expr(s.expr);
        i.has_expr = true;
        code_.push_back(std::move(i));
        break;
      }
      case StmtKind::Assume:
      case StmtKind::Assert: {
        Instr i;
        i.op = s.kind == StmtKind::Assume ? IOp::Assume : IOp::Assert;
        i.src_pc = s.pc;
        i.expr = expr(s.expr);
        i.has_expr = true;
        code_.push_back(std::move(i));
        break;
      }
      case StmtKind::Call: {
        Instr i;
        i.op = IOp::Call;
        i.src_pc = s.pc;
        auto it = procs_.find(s.callee);
        if (it == procs_.end()) throw std::logic_error("unresolved procedure " + s.callee);
        i.callee = it->second;
        for (const auto& a : s.args) i.args.push_back(expr(a));
        if (!s.lhs.empty()) {
          i.lhs = resolve(s.lhs);
          i.has_lhs = true;
        }
        code_.push_back(std::move(i));
        break;
      }
      case StmtKind::Return: {
        Instr i;
        i.op = IOp::Return;
        i.src_pc = s.pc;
        if (s.has_expr) {
          i.expr = expr(s.expr);
          i.has_expr = true;
        }
        code_.push_back(std::move(i));
        break;
      }
      case StmtKind::While: {
        int head = static_cast<int>(code_.size());
        Instr br;
        br.op = IOp::Branch;
        br.src_pc = s.pc;
        br.expr = expr(s.expr);
        br.has_expr = true;
        code_.push_back(std::move(br));
        int br_at = head;
        stmts(s.body);
        Instr j;
        j.op = IOp::Jump;
        j.target = head;
        code_.push_back(std::move(j));
        code_[br_at].target = static_cast<int>(code_.size());
        break;
      }
      case StmtKind::If: {
        Instr br;
        br.op = IOp::Branch;
        br.src_pc = s.pc;
        br.expr = expr(s.expr);
        br.has_expr = true;
        int br_at = static_cast<int>(code_.size());
        code_.push_back(std::move(br));
        stmts(s.body);
        if (s.else_body.empty()) {
          code_[br_at].target = static_cast<int>(code_.size());
        } else {
          Instr j;
          j.op = IOp::Jump;
          int j_at = static_cast<int>(code_.size());
          code_.push_back(std::move(j));
          code_[br_at].target = static_cast<int>(code_.size());
          stmts(s.else_body);
          code_[j_at].target = static_cast<int>(code_.size());
        }
        break;
      }
      case StmtKind::Atomic: {
        Instr b;
        b.op = IOp::AtomicBegin;
        b.src_pc = s.pc;
        code_.push_back(std::move(b));
        stmts(s.body);
        Instr e;
        e.op = IOp::AtomicEnd;
        code_.push_back(std::move(e));
        break;
      }
    }
  }

  const std::map<std::string, VarRef>& env_;
  const std::map<std::string, int>& procs_;
  std::vector<Instr> code_;
};

inline std::vector<VarInfo> var_infos(const std::vector<VarDecl>& decls) {
  std::vector<VarInfo> out;
  out.reserve(decls.size());
  for (const auto& d : decls)
    out.push_back({d.name, d.type, d.init ? *d.init : default_value(d.type)});
  return out;
}

inline void bind(std::map<std::string, VarRef>& env, const std::vector<VarDecl>& decls,
                 VarScope scope, int base = 0) {
  for (size_t i = 0; i < decls.size(); ++i)
    env[decls[i].name] = VarRef{scope, base + static_cast<int>(i)};
}

inline CompiledProc compile_procedure(const Procedure& f, std::map<std::string, VarRef> env,
                                      const std::map<std::string, int>& procs) {
  CompiledProc cp;
  cp.name = f.name;
  cp.num_params = static_cast<int>(f.params.size());
  bind(env, f.params, VarScope::Local, 0);
  bind(env, f.locals, VarScope::Local, cp.num_params);
  cp.locals = var_infos(f.params);
  auto locs = var_infos(f.locals);
  cp.locals.insert(cp.locals.end(), locs.begin(), locs.end());
  if (f.ret) {
    cp.has_ret = true;
    cp.ret_type = *f.ret;
  }
  ProcCompiler pc(env, procs);
  cp.code = pc.compile(f.body);
  return cp;
}

}  // namespace detail

inline CompiledUnit compile_seq(const SeqProgram& p) {
  CompiledUnit u;
  u.globals = detail::var_infos(p.globals);
  std::map<std::string, VarRef> env;
  detail::bind(env, p.globals, VarScope::Global);
  for (size_t i = 0; i < p.procs.size(); ++i) u.proc_index[p.procs[i].name] = static_cast<int>(i);
  for (const auto& f : p.procs) u.procs.push_back(detail::compile_procedure(f, env, u.proc_index));
  u.main_index = u.find_proc("main");
  return u;
}

inline CompiledParam compile_param(const ParamProgram& p) {
  CompiledParam cp;
  cp.shared = detail::var_infos(p.shared);
  std::map<std::string, VarRef> shared_env;
  detail::bind(shared_env, p.shared, VarScope::Shared);
  {
    std::map<std::string, int> no_procs;
    detail::ProcCompiler pc(shared_env, no_procs);
    cp.init_code = pc.compile(p.init_body);
  }
  for (const auto& proc : p.processes) {
    CompiledUnit u;
    u.globals = detail::var_infos(proc.globals);
    std::map<std::string, VarRef> env = shared_env;
    detail::bind(env, proc.globals, VarScope::Global);
    for (size_t i = 0; i < proc.procs.size(); ++i)
      u.proc_index[proc.procs[i].name] = static_cast<int>(i);
    for (const auto& f : proc.procs)
      u.procs.push_back(detail::compile_procedure(f, env, u.proc_index));
    u.main_index = u.find_proc("main");
    cp.processes.push_back(std::move(u));
    cp.process_names.push_back(proc.name);
  }
  return cp;
}

// ---- expression evaluation ----------------------------------------------

// All possible values of an expression (nondeterministic subterms branch),
// plus whether some evaluation divides by zero.
struct EvalResult {
  std::vector<std::int64_t> values;
  bool div_zero = false;
};

namespace detail {

struct EvalCtx {
  const Valuation* shared = nullptr;
  const Valuation* globals = nullptr;
  const Valuation* locals = nullptr;
};

inline void eval_rec(const CExpr& e, const EvalCtx& ctx, EvalResult& out);

inline std::vector<std::int64_t> eval_values(const CExpr& e, const EvalCtx& ctx,
                                             EvalResult& err_sink) {
  EvalResult r;
  eval_rec(e, ctx, r);
  err_sink.div_zero = err_sink.div_zero || r.div_zero;
  return r.values;
}

inline void eval_rec(const CExpr& e, const EvalCtx& ctx, EvalResult& out) {
  switch (e.kind) {
    case ExprKind::Const:
      out.values.push_back(e.value);
      return;
    case ExprKind::Nondet:
      out.values = {0, 1};
      return;
    case ExprKind::Var: {
      const Valuation* v = nullptr;
      switch (e.var.scope) {
        case VarScope::Shared: v = ctx.shared; break;
        case VarScope::Global: v = ctx.globals; break;
        case VarScope::Local: v = ctx.locals; break;
      }
      out.values.push_back((*v)[e.var.index]);
      return;
    }
    case ExprKind::Not: {
      auto a = eval_values(e.args[0], ctx, out);
      for (auto v : a) out.values.push_back(v ? 0 : 1);
      std::sort(out.values.begin(), out.values.end());
      out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
      return;
    }
    case ExprKind::Bin: {
      auto a = eval_values(e.args[0], ctx, out);
      auto b = eval_values(e.args[1], ctx, out);
      for (auto x : a) {
        for (auto y : b) {
          switch (e.op) {
            case BinOp::Or: out.values.push_back((x || y) ? 1 : 0); break;
            case BinOp::Add: out.values.push_back(x + y); break;
            case BinOp::Sub: out.values.push_back(x - y); break;
            case BinOp::Mul: out.values.push_back(x * y); break;
            case BinOp::Div:
              if (y == 0)
                out.div_zero = true;
              else
                out.values.push_back(x / y);
              break;
            case BinOp::Eq: out.values.push_back(x == y ? 1 : 0); break;
            case BinOp::Ne: out.values.push_back(x != y ? 1 : 0); break;
            case BinOp::Lt: out.values.push_back(x < y ? 1 : 0); break;
            case BinOp::Le: out.values.push_back(x <= y ? 1 : 0); break;
            case BinOp::Gt: out.values.push_back(x > y ? 1 : 0); break;
            case BinOp::Ge: out.values.push_back(x >= y ? 1 : 0); break;
          }
        }
      }
      std::sort(out.values.begin(), out.values.end());
      out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
      return;
    }
    case ExprKind::CallFn:
      throw std::logic_error("call expression in evaluation");
  }
}

}  // namespace detail

inline EvalResult eval_expr(const CExpr& e, const Valuation* shared, const Valuation* globals,
                            const Valuation* locals) {
  EvalResult r;
  detail::EvalCtx ctx{shared, globals, locals};
  detail::eval_rec(e, ctx, r);
  std::sort(r.values.begin(), r.values.end());
  r.values.erase(std::unique(r.values.begin(), r.values.end()), r.values.end());
  return r;
}

}  // namespace liseq

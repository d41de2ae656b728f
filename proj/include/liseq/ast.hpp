#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace liseq {

// Source position, 1-based. line==0 means "no position" (generated node).
struct Pos {
  int line = 0;
  int col = 0;
};

// Variable type: bool, or int restricted to an inclusive range.
struct Type {
  bool is_bool = true;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  static Type boolean() { return Type{true, 0, 1}; }
  static Type integer(std::int64_t lo, std::int64_t hi) { return Type{false, lo, hi}; }

  bool operator==(const Type&) const = default;
  std::int64_t domain_size() const { return is_bool ? 2 : hi - lo + 1; }
  bool contains(std::int64_t v) const { return is_bool ? (v == 0 || v == 1) : (v >= lo && v <= hi); }
};

enum class BinOp { Or, Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge };

enum class ExprKind {
  Const,   // value (bool as 0/1)
  Var,     // name
  Nondet,  // '*', boolean
  Not,     // args[0]
  Bin,     // op, args[0], args[1]
  CallFn,  // user function in 'x := f(...)' position; name, args
};

struct Expr {
  ExprKind kind = ExprKind::Const;
  std::int64_t value = 0;
  bool is_bool_const = false;  // distinguishes T/F from integer literals for printing
  std::string name;
  BinOp op = BinOp::Or;
  std::vector<Expr> args;
  Pos pos;

  static Expr constant(std::int64_t v) {
    Expr e;
    e.kind = ExprKind::Const;
    e.value = v;
    return e;
  }
  static Expr bool_const(bool b) {
    Expr e = constant(b ? 1 : 0);
    e.is_bool_const = true;
    return e;
  }
  static Expr var(std::string n) {
    Expr e;
    e.kind = ExprKind::Var;
    e.name = std::move(n);
    return e;
  }
  static Expr nondet() {
    Expr e;
    e.kind = ExprKind::Nondet;
    return e;
  }
  static Expr make_not(Expr a) {
    Expr e;
    e.kind = ExprKind::Not;
    e.args.push_back(std::move(a));
    return e;
  }
  static Expr bin(BinOp op, Expr a, Expr b) {
    Expr e;
    e.kind = ExprKind::Bin;
    e.op = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
  }
};

enum class StmtKind {
  Skip,
  Assign,  // lhs := expr
  Assume,  // assume(expr)
  Assert,  // assert(expr)
  Call,    // call callee(args), or lhs := callee(args) when lhs nonempty
  Return,  // return [expr]
  While,   // while (expr) do body od
  If,      // if (expr) then body else else_body fi
  Atomic,  // atomic begin body end
};

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  int pc = -1;  // unique program counter label
  Pos pos;
  std::string lhs;     // Assign / Call-with-result
  std::string callee;  // Call
  Expr expr;           // Assign rhs, Assume/Assert/While/If condition, Return value
  bool has_expr = false;
  std::vector<Expr> args;       // Call
  std::vector<Stmt> body;       // While / If-then / Atomic
  std::vector<Stmt> else_body;  // If-else
};

struct VarDecl {
  std::string name;
  Type type;
  std::optional<std::int64_t> init;  // constant initializer
  Pos pos;
};

struct Procedure {
  std::string name;
  std::optional<Type> ret;  // nullopt == void
  std::vector<VarDecl> params;
  std::vector<VarDecl> locals;
  std::vector<Stmt> body;
  Pos pos;
};

struct Process {
  std::string name;
  std::vector<VarDecl> globals;
  std::vector<Procedure> procs;
  Pos pos;
};

struct ParamProgram {
  std::vector<VarDecl> shared;
  std::vector<Stmt> init_body;
  std::vector<Process> processes;
  int next_pc = 0;  // fresh-label counter; all pcs in the program are < next_pc

  int fresh_pc() { return next_pc++; }
};

struct SeqProgram {
  std::vector<VarDecl> globals;
  std::vector<Procedure> procs;
  int next_pc = 0;

  int fresh_pc() { return next_pc++; }
};

// Prefix reserved for generated identifiers; rejected in parameterized (user) programs.
inline constexpr const char* kGenPrefix = "__liseq_";

inline bool is_generated_name(const std::string& n) {
  return n.rfind(kGenPrefix, 0) == 0;
}

// Structural equality modulo pc labels and source positions.
bool equal_mod_pc(const Expr& a, const Expr& b);
bool equal_mod_pc(const Stmt& a, const Stmt& b);

inline bool equal_mod_pc(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal_mod_pc(a[i], b[i])) return false;
  return true;
}
inline bool equal_mod_pc(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal_mod_pc(a[i], b[i])) return false;
  return true;
}

inline bool equal_mod_pc(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.value == b.value && a.name == b.name && a.op == b.op &&
         equal_mod_pc(a.args, b.args);
}

inline bool equal_mod_pc(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.lhs == b.lhs && a.callee == b.callee &&
         a.has_expr == b.has_expr && (!a.has_expr || equal_mod_pc(a.expr, b.expr)) &&
         equal_mod_pc(a.args, b.args) && equal_mod_pc(a.body, b.body) &&
         equal_mod_pc(a.else_body, b.else_body);
}

inline bool equal_mod_pc(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.type == b.type && a.init == b.init;
}
inline bool equal_mod_pc(const std::vector<VarDecl>& a, const std::vector<VarDecl>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal_mod_pc(a[i], b[i])) return false;
  return true;
}
inline bool equal_mod_pc(const Procedure& a, const Procedure& b) {
  return a.name == b.name && a.ret == b.ret && equal_mod_pc(a.params, b.params) &&
         equal_mod_pc(a.locals, b.locals) && equal_mod_pc(a.body, b.body);
}
inline bool equal_mod_pc(const std::vector<Procedure>& a, const std::vector<Procedure>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal_mod_pc(a[i], b[i])) return false;
  return true;
}
inline bool equal_mod_pc(const Process& a, const Process& b) {
  return a.name == b.name && equal_mod_pc(a.globals, b.globals) && equal_mod_pc(a.procs, b.procs);
}
inline bool equal_mod_pc(const ParamProgram& a, const ParamProgram& b) {
  if (!equal_mod_pc(a.shared, b.shared) || !equal_mod_pc(a.init_body, b.init_body)) return false;
  if (a.processes.size() != b.processes.size()) return false;
  for (size_t i = 0; i < a.processes.size(); ++i)
    if (!equal_mod_pc(a.processes[i], b.processes[i])) return false;
  return true;
}
inline bool equal_mod_pc(const SeqProgram& a, const SeqProgram& b) {
  return equal_mod_pc(a.globals, b.globals) && equal_mod_pc(a.procs, b.procs);
}

}  // namespace liseq

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace liseq {

// Normalization brings a parameterized program into the single-process,
// void-procedures-only form the sequentializations start from:
//
//   1. all processes are merged into one; process globals and procedures are
//      renamed "<process>_<name>" where needed, and a fresh main picks one of
//      the original mains nondeterministically;
//   2. value returns are eliminated: each procedure f with a return type
//      gets a process global __liseq_ret_f, 'return e' stores to it, and
//      'x := f(..)' becomes a call followed by a copy from it.
//
// Original statements keep their pc labels; inserted statements get fresh
// ones. The normalized program is the reference for every downstream
// comparison.

namespace detail {

inline void rename_in_expr(Expr& e, const std::map<std::string, std::string>& vars) {
  if (e.kind == ExprKind::Var) {
    auto it = vars.find(e.name);
    if (it != vars.end()) e.name = it->second;
  }
  for (auto& a : e.args) rename_in_expr(a, vars);
}

inline void rename_in_stmts(std::vector<Stmt>& body, const std::map<std::string, std::string>& vars,
                            const std::map<std::string, std::string>& procs) {
  for (auto& s : body) {
    if (!s.lhs.empty()) {
      auto it = vars.find(s.lhs);
      if (it != vars.end()) s.lhs = it->second;
    }
    if (!s.callee.empty()) {
      auto it = procs.find(s.callee);
      if (it != procs.end()) s.callee = it->second;
    }
    if (s.has_expr) rename_in_expr(s.expr, vars);
    for (auto& a : s.args) rename_in_expr(a, vars);
    rename_in_stmts(s.body, vars, procs);
    rename_in_stmts(s.else_body, vars, procs);
  }
}

inline std::string pick_name(const std::string& candidate, std::set<std::string>& used) {
  std::string n = candidate;
  if (used.count(n)) n = std::string(kGenPrefix) + candidate;
  used.insert(n);
  return n;
}

// Merge all processes into one. No-op renaming for single-process programs.
inline Process merge_processes(ParamProgram& p) {
  if (p.processes.size() == 1) return std::move(p.processes[0]);

  std::set<std::string> used_vars;
  for (const auto& d : p.shared) used_vars.insert(d.name);
  std::set<std::string> used_procs;

  Process merged;
  merged.name = "all";
  std::vector<std::string> entry_points;
  for (auto& proc : p.processes) {
    std::map<std::string, std::string> var_ren, proc_ren;
    for (auto& g : proc.globals) {
      std::string nn = pick_name(proc.name + "_" + g.name, used_vars);
      var_ren[g.name] = nn;
      g.name = nn;
      merged.globals.push_back(g);
    }
    for (auto& f : proc.procs) {
      std::string nn = pick_name(proc.name + "_" + f.name, used_procs);
      proc_ren[f.name] = nn;
    }
    for (auto& f : proc.procs) {
      f.name = proc_ren[f.name];
      rename_in_stmts(f.body, var_ren, proc_ren);
      merged.procs.push_back(std::move(f));
    }
    entry_points.push_back(proc_ren["main"]);
  }

  // main: nondeterministic choice among the original entry points
  Procedure m;
  m.name = "main";
  auto call_to = [&](const std::string& f) {
    Stmt c;
    c.kind = StmtKind::Call;
    c.callee = f;
    c.pc = p.fresh_pc();
    return c;
  };
  std::vector<Stmt> tail{call_to(entry_points.back())};
  for (int i = static_cast<int>(entry_points.size()) - 2; i >= 0; --i) {
    Stmt branch;
    branch.kind = StmtKind::If;
    branch.pc = p.fresh_pc();
    branch.expr = Expr::nondet();
    branch.has_expr = true;
    branch.body.push_back(call_to(entry_points[i]));
    branch.else_body = std::move(tail);
    tail.clear();
    tail.push_back(std::move(branch));
  }
  m.body = std::move(tail);
  merged.procs.push_back(std::move(m));
  return merged;
}

// Rewrite one body for return-value elimination. 'ret_global' maps each
// value-returning procedure to its result variable.
inline void eliminate_returns(std::vector<Stmt>& body, ParamProgram& p,
                              const std::map<std::string, std::string>& ret_global,
                              const std::string& own_ret) {
  std::vector<Stmt> out;
  for (auto& s : body) {
    switch (s.kind) {
      case StmtKind::Return:
        if (s.has_expr) {
          Stmt store;
          store.kind = StmtKind::Assign;
          store.pc = s.pc;  // the store carries the original return's pc
          store.pos = s.pos;
          store.lhs = own_ret;
          store.expr = std::move(s.expr);
          store.has_expr = true;
          out.push_back(std::move(store));
          Stmt ret;
          ret.kind = StmtKind::Return;
          ret.pc = p.fresh_pc();
          ret.pos = s.pos;
          out.push_back(std::move(ret));
        } else {
          out.push_back(std::move(s));
        }
        break;
      case StmtKind::Call:
        if (!s.lhs.empty()) {
          std::string lhs = std::move(s.lhs);
          s.lhs.clear();
          std::string src = ret_global.at(s.callee);
          Pos pos = s.pos;
          out.push_back(std::move(s));
          Stmt copy;
          copy.kind = StmtKind::Assign;
          copy.pc = p.fresh_pc();
          copy.pos = pos;
          copy.lhs = std::move(lhs);
          copy.expr = Expr::var(src);
          copy.has_expr = true;
          out.push_back(std::move(copy));
        } else {
          out.push_back(std::move(s));
        }
        break;
      default:
        eliminate_returns(s.body, p, ret_global, own_ret);
        eliminate_returns(s.else_body, p, ret_global, own_ret);
        out.push_back(std::move(s));
        break;
    }
  }
  body = std::move(out);
}

}  // namespace detail

inline ParamProgram normalize(const ParamProgram& input) {
  ParamProgram p = input;
  Process proc = detail::merge_processes(p);

  std::map<std::string, std::string> ret_global;
  for (auto& f : proc.procs) {
    if (!f.ret) continue;
    std::string rg = std::string(kGenPrefix) + "ret_" + f.name;
    ret_global[f.name] = rg;
    VarDecl d;
    d.name = rg;
    d.type = *f.ret;
    proc.globals.push_back(std::move(d));
  }
  for (auto& f : proc.procs) {
    std::string own = f.ret ? ret_global[f.name] : std::string();
    detail::eliminate_returns(f.body, p, ret_global, own);
    f.ret.reset();
  }

  p.processes.clear();
  p.processes.push_back(std::move(proc));
  return p;
}

}  // namespace liseq

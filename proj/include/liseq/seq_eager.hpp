#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "liseq/ast.hpp"
#include "liseq/instrument.hpp"
#include "liseq/seq_build.hpp"

namespace liseq {

// Eager (guess-and-validate) sequentialization for k-round schedules, the
// baseline the lazy construction is measured against.
//
// The driver guesses the shared state at the start of every round up front
// (u_2..u_k), then runs one thread at a time to completion over all k
// rounds: c_1..c_k hold the running per-round values, a thread's interlined
// blocks store s into c_j and resume from c_{j+1}. After all threads, the
// guesses are validated: assume(c_j = u_{j+1}) stitches round ends to round
// starts. Assertion failures before validation are speculative — they may
// live in an infeasible guess — so a failing assert both raises a
// speculative violation immediately and records its pc for a validated
// re-check after stitching (Instrumentation::validated_map ties the final
// checks back to the source asserts).

namespace detail {

class EagerBuilder {
 public:
  EagerBuilder(const ParamProgram& src, int k) : src_(src), k_(k) {}

  EagerOutput build() {
    if (k_ < 1) throw std::invalid_argument("sequentialize_eager: k must be >= 1");
    if (src_.processes.size() != 1)
      throw std::invalid_argument("sequentialize_eager: input must be normalized (one process)");
    proc_ = &src_.processes[0];
    bool has_main = false;
    for (const auto& f : proc_->procs) {
      if (f.ret)
        throw std::invalid_argument(
            "sequentialize_eager: input must be normalized (void procedures)");
      if (f.name == "main") has_main = true;
    }
    if (!has_main) throw std::invalid_argument("sequentialize_eager: process has no main");

    collect_used();
    mint_names();
    out_.program.next_pc = src_.next_pc;
    build_globals();
    build_instr_static();
    for (const auto& f : proc_->procs) out_.program.procs.push_back(transform_proc(f));
    out_.program.procs.push_back(build_init());
    out_.program.procs.push_back(build_main());
    return std::move(out_);
  }

 private:
  void collect_used() {
    for (const auto& d : src_.shared) used_.insert(d.name);
    for (const auto& d : proc_->globals) used_.insert(d.name);
    for (const auto& f : proc_->procs) {
      used_.insert(f.name);
      for (const auto& d : f.params) used_.insert(d.name);
      for (const auto& d : f.locals) used_.insert(d.name);
    }
  }

  std::string mint(const std::string& base) {
    std::string n = std::string(kGenPrefix) + base;
    while (used_.count(n)) n += "x";
    used_.insert(n);
    return n;
  }

  void mint_names() {
    atomic_ = mint("atomic");
    done_ = mint("done");
    j_ = mint("j");
    spec_fail_ = mint("spec_fail");
    fail_pc_ = mint("fail_pc");
    thread_ = mint("thread");
    init_name_ = mint("init");
    for (int i = 1; i <= k_; ++i) {
      c_.emplace_back();
      for (const auto& d : src_.shared) c_.back().push_back(mint("c" + std::to_string(i) + "_" + d.name));
    }
    for (int i = 2; i <= k_; ++i) {
      u_.emplace_back();
      for (const auto& d : src_.shared) u_.back().push_back(mint("u" + std::to_string(i) + "_" + d.name));
    }
  }

  void build_globals() {
    auto& gl = out_.program.globals;
    for (const auto& d : src_.shared) gl.push_back(d);
    for (const auto& d : proc_->globals) gl.push_back(d);
    auto add = [&](const std::string& n, Type t) { gl.push_back({n, t, std::nullopt, {}}); };
    add(atomic_, Type::boolean());
    add(done_, Type::boolean());
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add(c_[i][v], src_.shared[v].type);
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add(u_[i][v], src_.shared[v].type);
    add(j_, Type::integer(1, k_));
    add(spec_fail_, Type::boolean());
    add(fail_pc_, Type::integer(0, src_.next_pc));
  }

  void build_instr_static() {
    Instrumentation& in = out_.instr;
    in.k = k_;
    for (const auto& d : src_.shared) in.shared_vars.push_back(d.name);
    for (const auto& d : proc_->globals)
      if (!is_generated_name(d.name)) in.global_vars.push_back(d.name);
    for (const auto& f : proc_->procs) collect_pcs(f.body);
  }

  void collect_pcs(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      out_.instr.stmt_map[s.pc] = s.pc;
      if (s.kind == StmtKind::Assert) assert_pcs_.push_back(s.pc);
      collect_pcs(s.body);
      collect_pcs(s.else_body);
    }
  }

  SeqProgram& prog() { return out_.program; }

  // if (j == jj) then c_jj := s fi, for all jj
  void store_round_value(std::vector<Stmt>& out) {
    for (int jj = 1; jj <= k_; ++jj) {
      std::vector<Stmt> stores;
      for (size_t v = 0; v < src_.shared.size(); ++v)
        stores.push_back(mk_assign(prog(), c_[jj - 1][v], vref(src_.shared[v].name)));
      if (!stores.empty())
        out.push_back(mk_if(prog(), eq(vref(j_), Expr::constant(jj)), std::move(stores)));
    }
  }

  // if (j == jj) then s := c_jj fi, for jj >= 2
  void load_round_value(std::vector<Stmt>& out) {
    for (int jj = 2; jj <= k_; ++jj) {
      std::vector<Stmt> loads;
      for (size_t v = 0; v < src_.shared.size(); ++v)
        loads.push_back(mk_assign(prog(), src_.shared[v].name, vref(c_[jj - 1][v])));
      if (!loads.empty())
        out.push_back(mk_if(prog(), eq(vref(j_), Expr::constant(jj)), std::move(loads)));
    }
  }

  // a context switch: latch the running round value; either the thread is
  // finished with the schedule or it resumes in a later round
  void emit_ic(std::vector<Stmt>& out) {
    out.push_back(mk_if(prog(), vref(done_), {mk_return(prog())}));
    std::vector<Stmt> body;
    store_round_value(body);
    std::vector<Stmt> fin;
    fin.push_back(mk_assign(prog(), done_, Expr::bool_const(true)));
    fin.push_back(mk_return(prog()));
    std::vector<Stmt> nxt;
    nxt.push_back(mk_assign(prog(), j_, Expr::bin(BinOp::Add, vref(j_), Expr::constant(1))));
    load_round_value(nxt);
    body.push_back(
        mk_if(prog(), eq(vref(j_), Expr::constant(k_)), std::move(fin), std::move(nxt)));
    std::vector<Stmt> loop{mk_while(prog(), Expr::nondet(), std::move(body))};
    out.push_back(mk_if(prog(), Expr::make_not(vref(atomic_)), std::move(loop)));
  }

  // assert(e) at pc p: report speculatively right away, and remember p so
  // the driver can re-raise it once the guesses have been validated
  void emit_assert(const Stmt& s, std::vector<Stmt>& out) {
    std::vector<Stmt> fail;
    fail.push_back(mk_if(prog(), Expr::nondet(), {mk_assert(prog(), Expr::bool_const(false))}));
    fail.push_back(mk_assign(prog(), spec_fail_, Expr::bool_const(true)));
    fail.push_back(mk_assign(prog(), fail_pc_, Expr::constant(s.pc)));
    store_round_value(fail);
    fail.push_back(mk_assign(prog(), done_, Expr::bool_const(true)));
    fail.push_back(mk_assign(prog(), atomic_, Expr::bool_const(false)));
    fail.push_back(mk_return(prog()));
    Stmt wrap;
    wrap.kind = StmtKind::If;
    wrap.pc = s.pc;  // carries the assert's pc
    wrap.pos = s.pos;
    wrap.expr = Expr::make_not(s.expr);
    wrap.has_expr = true;
    wrap.body = std::move(fail);
    out.push_back(std::move(wrap));
  }

  // inside atomic blocks: no switch points, but asserts still abort
  std::vector<Stmt> transform_atomic_body(const std::vector<Stmt>& body) {
    std::vector<Stmt> out;
    for (const auto& s : body) {
      if (s.kind == StmtKind::Assert) {
        emit_assert(s, out);
      } else if (s.kind == StmtKind::While || s.kind == StmtKind::If) {
        Stmt c = s;
        c.body = transform_atomic_body(s.body);
        c.else_body = transform_atomic_body(s.else_body);
        out.push_back(std::move(c));
      } else {
        out.push_back(s);
      }
    }
    return out;
  }

  std::vector<Stmt> interline(const std::vector<Stmt>& body) {
    std::vector<Stmt> out;
    for (const auto& s : body) {
      emit_ic(out);
      switch (s.kind) {
        case StmtKind::Assert:
          emit_assert(s, out);
          break;
        case StmtKind::Atomic: {
          Stmt on;
          on.kind = StmtKind::Assign;
          on.pc = s.pc;
          on.pos = s.pos;
          on.lhs = atomic_;
          on.expr = Expr::bool_const(true);
          on.has_expr = true;
          out.push_back(std::move(on));
          for (auto& inner : transform_atomic_body(s.body)) out.push_back(std::move(inner));
          out.push_back(mk_assign(prog(), atomic_, Expr::bool_const(false)));
          break;
        }
        case StmtKind::While: {
          Stmt w = s;
          w.body = interline(s.body);
          emit_ic(w.body);
          out.push_back(std::move(w));
          break;
        }
        case StmtKind::If: {
          Stmt i = s;
          i.body = interline(s.body);
          i.else_body = interline(s.else_body);
          out.push_back(std::move(i));
          break;
        }
        default:
          out.push_back(s);
          break;
      }
    }
    return out;
  }

  Procedure transform_proc(const Procedure& f) {
    Procedure out;
    out.name = f.name == "main" ? thread_ : f.name;
    out.params = f.params;
    out.locals = f.locals;
    out.body = interline(f.body);
    if (f.name == "main") emit_ic(out.body);  // the implicit return switches too
    if (out.body.empty()) {
      Stmt s;
      s.kind = StmtKind::Skip;
      s.pc = prog().fresh_pc();
      out.body.push_back(std::move(s));
    }
    return out;
  }

  Procedure build_init() {
    Procedure f;
    f.name = init_name_;
    f.body = src_.init_body;
    if (f.body.empty()) {
      Stmt s;
      s.kind = StmtKind::Skip;
      s.pc = prog().fresh_pc();
      f.body.push_back(std::move(s));
    }
    return f;
  }

  Procedure build_main() {
    Procedure m;
    m.name = "main";
    std::vector<Stmt>& b = m.body;
    b.push_back(mk_assign(prog(), atomic_, Expr::bool_const(false)));
    for (const auto& d : src_.shared) mk_havoc(prog(), d, b);
    b.push_back(mk_call(prog(), init_name_));
    for (size_t v = 0; v < src_.shared.size(); ++v)
      b.push_back(mk_assign(prog(), c_[0][v], vref(src_.shared[v].name)));
    // guess every later round's switch-in value up front
    for (int i = 0; i + 1 < k_; ++i) {
      for (size_t v = 0; v < src_.shared.size(); ++v) {
        VarDecl guess{u_[i][v], src_.shared[v].type, std::nullopt, {}};
        mk_havoc(prog(), guess, b);
        b.push_back(mk_assign(prog(), c_[i + 1][v], vref(u_[i][v])));
      }
    }

    std::vector<Stmt> loop;
    loop.push_back(mk_assign(prog(), done_, Expr::bool_const(false)));
    loop.push_back(mk_assign(prog(), j_, Expr::constant(1)));
    for (const auto& g : proc_->globals)
      loop.push_back(mk_assign(prog(), g.name, init_const(g)));
    for (size_t v = 0; v < src_.shared.size(); ++v)
      loop.push_back(mk_assign(prog(), src_.shared[v].name, vref(c_[0][v])));
    loop.push_back(mk_call(prog(), thread_));
    if (!src_.shared.empty()) {
      std::vector<Stmt> latch;
      store_round_value(latch);
      loop.push_back(mk_if(prog(), Expr::make_not(vref(done_)), std::move(latch)));
    }
    b.push_back(mk_while(prog(), Expr::nondet(), std::move(loop)));

    // validation: round ends must meet the guessed next-round starts
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        b.push_back(mk_assume(prog(), eq(vref(c_[i][v]), vref(u_[i][v]))));
    for (int pc : assert_pcs_) {
      Stmt check = mk_assert(prog(), Expr::bool_const(false));
      out_.instr.validated_map[check.pc] = pc;
      std::vector<Stmt> inner{std::move(check)};
      std::vector<Stmt> outer{
          mk_if(prog(), eq(vref(fail_pc_), Expr::constant(pc)), std::move(inner))};
      b.push_back(mk_if(prog(), vref(spec_fail_), std::move(outer)));
    }
    return m;
  }

  const ParamProgram& src_;
  int k_;
  const Process* proc_ = nullptr;
  EagerOutput out_;
  std::set<std::string> used_;
  std::vector<int> assert_pcs_;

  std::string atomic_, done_, j_, spec_fail_, fail_pc_, thread_, init_name_;
  std::vector<std::vector<std::string>> c_, u_;
};

}  // namespace detail

inline EagerOutput sequentialize_eager(const ParamProgram& normalized, int k) {
  return detail::EagerBuilder(normalized, k).build();
}

}  // namespace liseq

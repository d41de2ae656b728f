#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "liseq/ast.hpp"
#include "liseq/instrument.hpp"
#include "liseq/seq_build.hpp"

namespace liseq {

// Lazy sequentialization for k-round schedules.
//
// Threads of a round-robin block become a chain of recursive activations of
// one driver procedure, here called __liseq_linear_int. An activation
// simulates one thread across rounds 1..bound: its per-round switch-in
// values arrive as parameters q_1..q_k, the switch-in values claimed by the
// *next* thread as q'_1..q_{k-1}. At every point where the original thread
// could be preempted, an interlined block either does nothing, consumes the
// rest of the current round (advancing j and reloading the shared state from
// q_{j+1}), or spawns the next thread's activation with the current shared
// state as its q_j. Guessed values are validated with assume on return, so
// only consistent schedules survive — shared states are never invented, only
// recomputed, which is what makes the simulation lazy.
//
// Activation state (q, q', bound, j, last) lives in globals because the
// interlined blocks execute inside arbitrary user procedures; the call site
// saves and restores whatever a nested activation clobbers. Process globals
// are saved/restored the same way (the figure-level "save := g; g := save").
//
// Original statements keep their pc labels; everything generated gets fresh
// ones, so Instrumentation::stmt_map is the identity on source pcs.

namespace detail {

class LazyBuilder {
 public:
  LazyBuilder(const ParamProgram& src, int k) : src_(src), k_(k) {}

  LazyOutput build() {
    if (k_ < 1) throw std::invalid_argument("sequentialize_lazy: k must be >= 1");
    if (src_.processes.size() != 1)
      throw std::invalid_argument("sequentialize_lazy: input must be normalized (one process)");
    proc_ = &src_.processes[0];
    for (const auto& f : proc_->procs)
      if (f.ret)
        throw std::invalid_argument(
            "sequentialize_lazy: input must be normalized (void procedures)");
    if (!find_main()) throw std::invalid_argument("sequentialize_lazy: process has no main");

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
  bool find_main() const {
    for (const auto& f : proc_->procs)
      if (f.name == "main") return true;
    return false;
  }

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
    terminate_ = mint("terminate");
    bound_ = mint("bound");
    j_ = mint("j");
    last_ = mint("last");
    pbound_ = mint("pbound");
    sbound_ = mint("sbound");
    slast_ = mint("slast");
    sj_ = mint("sj");
    mi_ = mint("mi");
    li_name_ = mint("linear_int");
    init_name_ = mint("init");
    auto group = [&](const char* stem, int lo, int hi, std::vector<std::vector<std::string>>& out) {
      for (int i = lo; i <= hi; ++i) {
        out.emplace_back();
        for (const auto& d : src_.shared)
          out.back().push_back(mint(stem + std::to_string(i) + "_" + d.name));
      }
    };
    group("q", 1, k_, q_);
    group("qp", 1, k_ - 1, qp_);
    group("pq", 1, k_, pq_);
    group("pqp", 1, k_ - 1, pqp_);
    group("sq", 1, k_, sq_);
    group("mq", 1, k_, mq_);
    for (const auto& g : proc_->globals) save_.push_back(mint("save_" + g.name));
  }

  void build_globals() {
    auto& gl = out_.program.globals;
    for (const auto& d : src_.shared) gl.push_back(d);
    for (const auto& d : proc_->globals) gl.push_back(d);
    auto add = [&](const std::string& n, Type t) { gl.push_back({n, t, std::nullopt, {}}); };
    add(atomic_, Type::boolean());
    add(terminate_, Type::boolean());
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add(q_[i][v], src_.shared[v].type);
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add(qp_[i][v], src_.shared[v].type);
    add(bound_, Type::integer(1, k_));
    add(j_, Type::integer(1, k_));
    add(last_, Type::boolean());
  }

  void build_instr_static() {
    Instrumentation& in = out_.instr;
    in.k = k_;
    for (const auto& d : src_.shared) in.shared_vars.push_back(d.name);
    for (const auto& d : proc_->globals)
      if (!is_generated_name(d.name)) in.global_vars.push_back(d.name);
    in.linear_int = li_name_;
    in.q_params = pq_;
    in.qp_params = pqp_;
    in.bound_param = pbound_;
    for (const auto& f : proc_->procs) collect_pcs(f.body);
  }

  void collect_pcs(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      out_.instr.stmt_map[s.pc] = s.pc;
      collect_pcs(s.body);
      collect_pcs(s.else_body);
    }
  }

  SeqProgram& prog() { return out_.program; }

  // ---- interlined switch block -------------------------------------------

  // if (j == jj+1) then assume(qp_{jj+1} = s) fi, for every possible jj
  void assume_guess_matches(std::vector<Stmt>& out) {
    for (int jj = 0; jj + 1 < k_; ++jj) {
      std::vector<Stmt> checks;
      for (size_t v = 0; v < src_.shared.size(); ++v)
        checks.push_back(
            mk_assume(prog(), eq(vref(qp_[jj][v]), vref(src_.shared[v].name))));
      if (!checks.empty())
        out.push_back(mk_if(prog(), eq(vref(j_), Expr::constant(jj + 1)), std::move(checks)));
    }
  }

  // if (j == jj) then s := q_jj fi, for jj in [lo, k]
  void load_round_start(std::vector<Stmt>& out, int lo) {
    for (int jj = lo; jj <= k_; ++jj) {
      std::vector<Stmt> loads;
      for (size_t v = 0; v < src_.shared.size(); ++v)
        loads.push_back(mk_assign(prog(), src_.shared[v].name, vref(q_[jj - 1][v])));
      if (!loads.empty())
        out.push_back(mk_if(prog(), eq(vref(j_), Expr::constant(jj)), std::move(loads)));
    }
  }

  // if (j == jj) then q_jj := s fi, for all jj
  void store_round_value(std::vector<Stmt>& out) {
    for (int jj = 1; jj <= k_; ++jj) {
      std::vector<Stmt> stores;
      for (size_t v = 0; v < src_.shared.size(); ++v)
        stores.push_back(mk_assign(prog(), q_[jj - 1][v], vref(src_.shared[v].name)));
      if (!stores.empty())
        out.push_back(mk_if(prog(), eq(vref(j_), Expr::constant(jj)), std::move(stores)));
    }
  }

  std::vector<Stmt> ic_last_branch() {
    // schedule ends here: this is the last thread finishing its last round
    std::vector<Stmt> done;
    done.push_back(mk_assign(prog(), terminate_, Expr::bool_const(true)));
    done.push_back(mk_return(prog()));
    // otherwise the round ends against the next block's guessed start
    std::vector<Stmt> more;
    assume_guess_matches(more);
    more.push_back(mk_assign(prog(), j_, Expr::bin(BinOp::Add, vref(j_), Expr::constant(1))));
    load_round_start(more, 2);
    std::vector<Stmt> out;
    out.push_back(mk_if(prog(), eq(vref(j_), vref(bound_)), std::move(done), std::move(more)));
    return out;
  }

  std::vector<Stmt> ic_call_branch() {
    std::vector<Stmt> out;
    store_round_value(out);
    // save everything the nested activation clobbers
    for (size_t g = 0; g < proc_->globals.size(); ++g)
      out.push_back(mk_assign(prog(), save_[g], vref(proc_->globals[g].name)));
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        out.push_back(mk_assign(prog(), sq_[i][v], vref(q_[i][v])));
    out.push_back(mk_assign(prog(), sbound_, vref(bound_)));
    out.push_back(mk_assign(prog(), slast_, vref(last_)));
    out.push_back(mk_assign(prog(), sj_, vref(j_)));
    std::vector<Expr> args;
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) args.push_back(vref(q_[i][v]));
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) args.push_back(vref(qp_[i][v]));
    args.push_back(vref(j_));
    out.push_back(mk_call(prog(), li_name_, std::move(args)));
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        out.push_back(mk_assign(prog(), q_[i][v], vref(sq_[i][v])));
    out.push_back(mk_assign(prog(), bound_, vref(sbound_)));
    out.push_back(mk_assign(prog(), last_, vref(slast_)));
    out.push_back(mk_assign(prog(), j_, vref(sj_)));
    // the nested chain simulated all later threads up to round j; done here
    // if that was our last round, otherwise validate and resume in j+1
    std::vector<Stmt> done{mk_return(prog())};
    std::vector<Stmt> more;
    assume_guess_matches(more);
    for (size_t g = 0; g < proc_->globals.size(); ++g)
      more.push_back(mk_assign(prog(), proc_->globals[g].name, vref(save_[g])));
    more.push_back(mk_assign(prog(), terminate_, Expr::bool_const(false)));
    more.push_back(mk_assign(prog(), j_, Expr::bin(BinOp::Add, vref(j_), Expr::constant(1))));
    load_round_start(more, 2);
    out.push_back(mk_if(prog(), eq(vref(j_), vref(bound_)), std::move(done), std::move(more)));
    return out;
  }

  // One interlined block: a cascading terminate check, then (outside atomic
  // sections) any number of round hand-offs.
  void emit_ic(std::vector<Stmt>& out) {
    out.push_back(mk_if(prog(), vref(terminate_), {mk_return(prog())}));
    std::vector<Stmt> swtch{
        mk_if(prog(), vref(last_), ic_last_branch(), ic_call_branch())};
    std::vector<Stmt> loop{mk_while(prog(), Expr::nondet(), std::move(swtch))};
    out.push_back(mk_if(prog(), Expr::make_not(vref(atomic_)), std::move(loop)));
  }

  // ---- statement interlining ---------------------------------------------

  std::vector<Stmt> interline(const std::vector<Stmt>& body, bool in_linear) {
    std::vector<Stmt> out;
    for (const auto& s : body) {
      emit_ic(out);
      switch (s.kind) {
        case StmtKind::Return:
          if (in_linear) {
            // a thread may only finish through the interlined block; keep the
            // pc on an executable statement so localized states still match
            Stmt marker;
            marker.kind = StmtKind::Skip;
            marker.pc = s.pc;
            marker.pos = s.pos;
            out.push_back(std::move(marker));
            out.push_back(mk_assume(prog(), Expr::bool_const(false)));
            out.push_back(mk_return(prog()));
          } else {
            out.push_back(s);
          }
          break;
        case StmtKind::Atomic: {
          Stmt on;
          on.kind = StmtKind::Assign;
          on.pc = s.pc;  // carries the atomic block's pc
          on.pos = s.pos;
          on.lhs = atomic_;
          on.expr = Expr::bool_const(true);
          on.has_expr = true;
          out.push_back(std::move(on));
          for (const auto& inner : s.body) out.push_back(inner);  // no switches inside
          out.push_back(mk_assign(prog(), atomic_, Expr::bool_const(false)));
          break;
        }
        case StmtKind::While: {
          Stmt w = s;
          w.body = interline(s.body, in_linear);
          emit_ic(w.body);  // back edge is a switch point
          out.push_back(std::move(w));
          break;
        }
        case StmtKind::If: {
          Stmt i = s;
          i.body = interline(s.body, in_linear);
          i.else_body = interline(s.else_body, in_linear);
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

  // ---- procedures ---------------------------------------------------------

  void add_save_locals(Procedure& f) {
    auto add = [&](const std::string& n, Type t) { f.locals.push_back({n, t, std::nullopt, {}}); };
    for (size_t g = 0; g < proc_->globals.size(); ++g) add(save_[g], proc_->globals[g].type);
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add(sq_[i][v], src_.shared[v].type);
    add(sbound_, Type::integer(1, k_));
    add(slast_, Type::boolean());
    add(sj_, Type::integer(1, k_));
  }

  Procedure transform_proc(const Procedure& f) {
    Procedure out;
    out.params = f.params;
    out.locals = f.locals;
    add_save_locals(out);
    if (f.name != "main") {
      out.name = f.name;
      out.body = interline(f.body, /*in_linear=*/false);
      if (out.body.empty()) {
        Stmt s;
        s.kind = StmtKind::Skip;
        s.pc = prog().fresh_pc();
        out.body.push_back(std::move(s));
      }
      return out;
    }
    out.name = li_name_;
    auto add_param = [&](const std::string& n, Type t) {
      out.params.push_back({n, t, std::nullopt, {}});
    };
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add_param(pq_[i][v], src_.shared[v].type);
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) add_param(pqp_[i][v], src_.shared[v].type);
    add_param(pbound_, Type::integer(1, k_));

    std::vector<Stmt>& b = out.body;
    b.push_back(mk_assign(prog(), bound_, vref(pbound_)));
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        b.push_back(mk_assign(prog(), q_[i][v], vref(pq_[i][v])));
    for (int i = 0; i + 1 < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        b.push_back(mk_assign(prog(), qp_[i][v], vref(pqp_[i][v])));
    b.push_back(mk_assign(prog(), last_, Expr::nondet()));
    b.push_back(mk_assign(prog(), j_, Expr::constant(1)));
    // fresh thread: deterministic process-local state, shared loaded from q_1
    for (const auto& g : proc_->globals)
      b.push_back(mk_assign(prog(), g.name, init_const(g)));
    for (size_t v = 0; v < src_.shared.size(); ++v)
      b.push_back(mk_assign(prog(), src_.shared[v].name, vref(q_[0][v])));

    auto body = interline(f.body, /*in_linear=*/true);
    for (auto& s : body) b.push_back(std::move(s));
    emit_ic(b);  // the implicit return is a switch point too
    b.push_back(mk_assume(prog(), Expr::bool_const(false)));
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
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v)
        m.locals.push_back({mq_[i][v], src_.shared[v].type, std::nullopt, {}});
    m.locals.push_back({mi_, Type::integer(1, k_ + 1), std::nullopt, {}});

    std::vector<Stmt>& b = m.body;
    b.push_back(mk_assign(prog(), atomic_, Expr::bool_const(false)));
    // shared variables start arbitrary; init overwrites what it assigns
    for (const auto& d : src_.shared) mk_havoc(prog(), d, b);
    b.push_back(mk_call(prog(), init_name_));
    for (size_t v = 0; v < src_.shared.size(); ++v)
      b.push_back(mk_assign(prog(), mq_[0][v], vref(src_.shared[v].name)));
    b.push_back(mk_assign(prog(), mi_, Expr::constant(1)));

    std::vector<Stmt> loop;
    loop.push_back(mk_assign(prog(), terminate_, Expr::bool_const(false)));
    std::vector<Expr> args;
    for (int i = 0; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) args.push_back(vref(mq_[i][v]));
    for (int i = 1; i < k_; ++i)
      for (size_t v = 0; v < src_.shared.size(); ++v) args.push_back(vref(mq_[i][v]));
    args.push_back(vref(mi_));
    loop.push_back(mk_call(prog(), li_name_, std::move(args)));
    loop.push_back(mk_assign(prog(), mi_, Expr::bin(BinOp::Add, vref(mi_), Expr::constant(1))));
    if (k_ >= 2 && !src_.shared.empty()) {
      std::vector<Stmt> latch;
      for (int i = 2; i <= k_; ++i) {
        std::vector<Stmt> st;
        for (size_t v = 0; v < src_.shared.size(); ++v)
          st.push_back(mk_assign(prog(), mq_[i - 1][v], vref(src_.shared[v].name)));
        latch.push_back(mk_if(prog(), eq(vref(mi_), Expr::constant(i)), std::move(st)));
      }
      loop.push_back(
          mk_if(prog(), Expr::bin(BinOp::Le, vref(mi_), Expr::constant(k_)), std::move(latch)));
    }
    b.push_back(mk_while(prog(), Expr::bin(BinOp::Le, vref(mi_), Expr::constant(k_)),
                         std::move(loop)));
    return m;
  }

  const ParamProgram& src_;
  int k_;
  const Process* proc_ = nullptr;
  LazyOutput out_;
  std::set<std::string> used_;

  std::string atomic_, terminate_, bound_, j_, last_;
  std::string pbound_, sbound_, slast_, sj_, mi_;
  std::string li_name_, init_name_;
  std::vector<std::vector<std::string>> q_, qp_, pq_, pqp_, sq_, mq_;
  std::vector<std::string> save_;
};

}  // namespace detail

inline LazyOutput sequentialize_lazy(const ParamProgram& normalized, int k) {
  return detail::LazyBuilder(normalized, k).build();
}

}  // namespace liseq

#pragma once

#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "liseq/instrument.hpp"
#include "liseq/param_oracle.hpp"

namespace liseq {

// Exhaustive interpreter for sequentialized programs. It runs the generated
// program like any other sequential program, but uses the Instrumentation to
// report results in the source program's terms: localized states are keyed
// by original pcs and projected onto source variables, and every activation
// of the recursive driver is recorded so the simulation can be cross-checked
// against the interface semantics.

struct SeqBounds {
  int max_stack_depth = 8;    // frames per simulated thread (matches the oracle)
  int max_linear_depth = 3;   // driver activations == threads per block
  size_t max_states = 2000000;
  bool stop_on_violation = false;  // bail out once any violation is recorded
};

struct SeqTruncation {
  bool stack_depth = false;
  bool states = false;
  bool any() const { return stack_depth || states; }
};

// One activation of the recursive driver: switch-in values u (k rounds; only
// the first 'bound' are meaningful), the guessed next-thread values, and the
// shared state at the recorded moment (entry or return).
struct ActivationRecord {
  std::vector<Valuation> u;
  std::vector<Valuation> vguess;
  int bound = 0;
  bool top_level = false;
  Valuation shared;
  auto operator<=>(const ActivationRecord&) const = default;
};

struct ExplorerReport {
  std::set<LocalizedState> reachable;   // at original pcs
  std::set<LocalizedState> violations;
  std::set<RuntimeError> runtime_errors;
  std::set<ActivationRecord> entered;
  std::set<ActivationRecord> completed;
  std::set<Valuation> final_shared;     // source shared state when main returns
  SeqTruncation truncated;
  size_t state_count = 0;

  bool has_violation() const { return !violations.empty(); }
};

namespace detail {

class SeqSearch {
 public:
  SeqSearch(const CompiledUnit& unit, const Instrumentation& instr, const SeqBounds& bounds,
            ExplorerReport& report)
      : unit_(unit), instr_(instr), bounds_(bounds), report_(report) {
    if (unit_.main_index < 0) throw std::invalid_argument("explore_seq: program has no main");
    for (const auto& pr : instr_.stmt_map) orig_of_[pr.second] = pr.first;
    for (const auto& n : instr_.shared_vars) shared_idx_.push_back(global_index(n));
    for (const auto& n : instr_.global_vars) global_idx_.push_back(global_index(n));
    for (const auto& proc : unit_.procs) {
      local_proj_.emplace_back();
      for (size_t i = 0; i < proc.locals.size(); ++i)
        if (!is_generated_name(proc.locals[i].name)) local_proj_.back().push_back((int)i);
    }
    li_index_ = instr_.linear_int.empty() ? -1 : unit_.find_proc(instr_.linear_int);
    if (li_index_ >= 0) {
      const CompiledProc& li = unit_.procs[li_index_];
      auto local_of = [&](const std::string& n) {
        for (size_t i = 0; i < li.locals.size(); ++i)
          if (li.locals[i].name == n) return (int)i;
        throw std::invalid_argument("explore_seq: driver parameter not found: " + n);
      };
      for (const auto& grp : instr_.q_params) {
        q_idx_.emplace_back();
        for (const auto& n : grp) q_idx_.back().push_back(local_of(n));
      }
      for (const auto& grp : instr_.qp_params) {
        qp_idx_.emplace_back();
        for (const auto& n : grp) qp_idx_.back().push_back(local_of(n));
      }
      bound_idx_ = local_of(instr_.bound_param);
    }
  }

  void run() {
    Key st;
    st.globals = initial_valuation(unit_.globals);
    Frame f;
    f.proc = unit_.main_index;
    f.ip = 0;
    f.locals = initial_valuation(unit_.procs[f.proc].locals);
    resolve_jumps(unit_.procs[f.proc], f.ip);
    st.stack.push_back(std::move(f));
    enqueue(std::move(st));
    while (!work_.empty()) {
      if (bounds_.stop_on_violation && !report_.violations.empty()) break;
      Key cur = std::move(work_.front());
      work_.pop_front();
      step(cur);
    }
    report_.state_count = seen_.size();
  }

 private:
  struct Key {
    Valuation globals;
    std::vector<Frame> stack;
    auto operator<=>(const Key&) const = default;
  };

  int global_index(const std::string& n) const {
    for (size_t i = 0; i < unit_.globals.size(); ++i)
      if (unit_.globals[i].name == n) return (int)i;
    throw std::invalid_argument("explore_seq: instrumented variable not found: " + n);
  }

  void enqueue(Key st) {
    if (seen_.size() >= bounds_.max_states) {
      report_.truncated.states = true;
      return;
    }
    if (seen_.insert(st).second) work_.push_back(std::move(st));
  }

  Valuation shared_of(const Key& st) const {
    Valuation out;
    out.reserve(shared_idx_.size());
    for (int i : shared_idx_) out.push_back(st.globals[i]);
    return out;
  }

  LocalizedState localized(const Key& st, int orig_pc) const {
    const Frame& fr = st.stack.back();
    LocalizedState ls;
    ls.pc = orig_pc;
    for (int i : local_proj_[fr.proc]) ls.frame.push_back(fr.locals[i]);
    for (int i : global_idx_) ls.frame.push_back(st.globals[i]);
    ls.shared = shared_of(st);
    return ls;
  }

  ActivationRecord activation(const Key& st, const Frame& fr, bool top_level) const {
    ActivationRecord a;
    for (const auto& grp : q_idx_) {
      a.u.emplace_back();
      for (int i : grp) a.u.back().push_back(fr.locals[i]);
    }
    for (const auto& grp : qp_idx_) {
      a.vguess.emplace_back();
      for (int i : grp) a.vguess.back().push_back(fr.locals[i]);
    }
    a.bound = (int)fr.locals[bound_idx_];
    a.top_level = top_level;
    a.shared = shared_of(st);
    return a;
  }

  // frames belonging to the simulated thread the top frame is part of:
  // everything above (and including) the innermost recursive-driver frame,
  // or everything above the generated main. Comparable to the oracle's
  // per-thread stack size.
  int activation_frames(const Key& st) const {
    for (int i = (int)st.stack.size() - 1; i >= 0; --i)
      if (st.stack[i].proc == li_index_) return (int)st.stack.size() - i;
    return (int)st.stack.size() - 1;
  }

  const VarInfo& var_of(const CompiledProc& proc, VarRef r) const {
    return r.scope == VarScope::Local ? proc.locals[r.index] : unit_.globals[r.index];
  }

  void store(Key& st, VarRef r, std::int64_t v) const {
    if (r.scope == VarScope::Local)
      st.stack.back().locals[r.index] = v;
    else
      st.globals[r.index] = v;
  }

  void step(const Key& st) {
    const Frame& fr = st.stack.back();
    const CompiledProc& proc = unit_.procs[fr.proc];
    if (fr.ip >= (int)proc.code.size()) {
      do_return(st);
      return;
    }
    const Instr& ins = proc.code[fr.ip];
    auto mapped = orig_of_.find(ins.src_pc);
    if (mapped != orig_of_.end()) report_.reachable.insert(localized(st, mapped->second));

    EvalResult r;
    if (ins.has_expr) r = eval_expr(ins.expr, nullptr, &st.globals, &fr.locals);
    if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});

    auto succ_ip = [&](int ip) {
      Key nxt = st;
      Frame& f = nxt.stack.back();
      f.ip = ip;
      resolve_jumps(proc, f.ip);
      enqueue(std::move(nxt));
    };

    switch (ins.op) {
      case IOp::Nop:
      case IOp::AtomicBegin:
      case IOp::AtomicEnd:
        succ_ip(fr.ip + 1);
        break;
      case IOp::Assign:
        for (auto v : r.values) {
          if (!var_of(proc, ins.lhs).type.contains(v)) {
            report_.runtime_errors.insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
            continue;
          }
          Key nxt = st;
          store(nxt, ins.lhs, v);
          Frame& f = nxt.stack.back();
          f.ip = fr.ip + 1;
          resolve_jumps(proc, f.ip);
          enqueue(std::move(nxt));
        }
        break;
      case IOp::Assume:
        for (auto v : r.values)
          if (v) succ_ip(fr.ip + 1);
        break;
      case IOp::Assert:
        for (auto v : r.values) {
          if (v) {
            succ_ip(fr.ip + 1);
          } else {
            int pc = ins.src_pc;
            auto vm = instr_.validated_map.find(pc);
            if (vm != instr_.validated_map.end())
              pc = vm->second;
            else if (mapped != orig_of_.end())
              pc = mapped->second;
            report_.violations.insert(localized(st, pc));
          }
        }
        break;
      case IOp::Branch:
        for (auto v : r.values) succ_ip(v ? fr.ip + 1 : ins.target);
        break;
      case IOp::Jump:
        succ_ip(ins.target);
        break;
      case IOp::Call:
        do_call(st, ins);
        break;
      case IOp::Return:
        do_return(st);
        break;
    }
  }

  void do_call(const Key& st, const Instr& ins) {
    const CompiledProc& callee = unit_.procs[ins.callee];
    const Frame& fr = st.stack.back();
    if (ins.callee == li_index_) {
      int depth = 0;
      for (const auto& f : st.stack)
        if (f.proc == li_index_) ++depth;
      // the thread-count bound m, applied silently like the oracle's
      if (depth >= bounds_.max_linear_depth) return;
    } else if (activation_frames(st) >= bounds_.max_stack_depth) {
      report_.truncated.stack_depth = true;
      return;
    }
    std::vector<Valuation> arg_sets{{}};
    for (size_t ai = 0; ai < ins.args.size(); ++ai) {
      EvalResult ar = eval_expr(ins.args[ai], nullptr, &st.globals, &fr.locals);
      if (ar.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
      std::vector<Valuation> next_sets;
      for (const auto& prefix : arg_sets) {
        for (auto v : ar.values) {
          if (!callee.locals[ai].type.contains(v)) {
            report_.runtime_errors.insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
            continue;
          }
          Valuation p = prefix;
          p.push_back(v);
          next_sets.push_back(std::move(p));
        }
      }
      arg_sets = std::move(next_sets);
    }
    for (const auto& args : arg_sets) {
      Key nxt = st;
      Frame f;
      f.proc = ins.callee;
      f.ip = 0;
      f.locals = initial_valuation(callee.locals);
      for (size_t ai = 0; ai < args.size(); ++ai) f.locals[ai] = args[ai];
      resolve_jumps(callee, f.ip);
      if (ins.callee == li_index_)
        report_.entered.insert(activation(nxt, f, fr.proc == unit_.main_index));
      nxt.stack.push_back(std::move(f));
      enqueue(std::move(nxt));
    }
  }

  void do_return(const Key& st) {
    Key nxt = st;
    Frame popped = std::move(nxt.stack.back());
    nxt.stack.pop_back();
    if (nxt.stack.empty()) {
      report_.final_shared.insert(shared_of(st));
      return;
    }
    if (popped.proc == li_index_)
      report_.completed.insert(
          activation(st, popped, nxt.stack.back().proc == unit_.main_index));
    Frame& caller = nxt.stack.back();
    caller.ip += 1;
    resolve_jumps(unit_.procs[caller.proc], caller.ip);
    enqueue(std::move(nxt));
  }

  const CompiledUnit& unit_;
  const Instrumentation& instr_;
  const SeqBounds& bounds_;
  ExplorerReport& report_;

  std::map<int, int> orig_of_;  // generated pc -> original pc
  std::vector<int> shared_idx_, global_idx_;
  std::vector<std::vector<int>> local_proj_;
  int li_index_ = -1;
  std::vector<std::vector<int>> q_idx_, qp_idx_;
  int bound_idx_ = -1;

  std::set<Key> seen_;
  std::deque<Key> work_;
};

}  // namespace detail

inline ExplorerReport explore_seq(const CompiledUnit& unit, const Instrumentation& instr,
                                  const SeqBounds& bounds = {}) {
  ExplorerReport report;
  detail::SeqSearch search(unit, instr, bounds, report);
  search.run();
  return report;
}

inline ExplorerReport explore_seq(const SeqProgram& prog, const Instrumentation& instr,
                                  const SeqBounds& bounds = {}) {
  return explore_seq(compile_seq(prog), instr, bounds);
}

}  // namespace liseq

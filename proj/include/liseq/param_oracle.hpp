#pragma once

#include <compare>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "liseq/compile.hpp"

namespace liseq {

struct ExplorationBounds {
  int k = 2;                     // rounds
  int max_threads = 3;           // m ranges over 1..max_threads
  int max_segment_steps = 4096;  // local steps between two context switches
  int max_stack_depth = 8;       // call-stack frames per thread
};

// View of a state by the active thread: statement pc, frame variables
// (locals then process globals, generated names projected out), shared
// valuation. Comparable across the parameterized program and its
// sequentializations.
struct LocalizedState {
  int pc = -1;
  Valuation frame;
  Valuation shared;
  auto operator<=>(const LocalizedState&) const = default;
};

enum class RuntimeErrorKind { DivZero, RangeOverflow };

struct RuntimeError {
  RuntimeErrorKind kind;
  int pc;
  auto operator<=>(const RuntimeError&) const = default;
};

struct TruncationFlags {
  bool segment_steps = false;
  bool stack_depth = false;
  bool any() const { return segment_steps || stack_depth; }
};

struct OracleReport {
  std::set<LocalizedState> reachable;  // localized states on which statements execute
  std::set<LocalizedState> violations;
  std::set<RuntimeError> runtime_errors;
  TruncationFlags truncated;
  size_t state_count = 0;

  bool has_violation() const { return !violations.empty(); }
};

// Pair of k-tuples of shared valuations (switch-in / switch-out per round).
struct LinearInterface {
  std::vector<Valuation> u;
  std::vector<Valuation> v;
  auto operator<=>(const LinearInterface&) const = default;
  int length() const { return static_cast<int>(u.size()); }
};

namespace detail {

struct Frame {
  int proc = 0;
  int ip = 0;
  Valuation locals;
  auto operator<=>(const Frame&) const = default;
};

struct ThreadState {
  Valuation globals;
  std::vector<Frame> stack;  // empty == terminated
  int atomic_depth = 0;
  auto operator<=>(const ThreadState&) const = default;
};

struct ParamKey {
  int active = 0;
  int round = 1;
  Valuation shared;
  std::vector<ThreadState> threads;
  auto operator<=>(const ParamKey&) const = default;
};

// Per-(process,proc) projection of frame variables: indices of
// non-generated locals followed by non-generated process globals.
struct FrameProjection {
  std::vector<int> local_idx;
  std::vector<int> global_idx;
};

inline FrameProjection make_projection(const CompiledUnit& unit, const CompiledProc& proc) {
  FrameProjection p;
  for (size_t i = 0; i < proc.locals.size(); ++i)
    if (!is_generated_name(proc.locals[i].name)) p.local_idx.push_back(static_cast<int>(i));
  for (size_t i = 0; i < unit.globals.size(); ++i)
    if (!is_generated_name(unit.globals[i].name)) p.global_idx.push_back(static_cast<int>(i));
  return p;
}

inline Valuation project_frame(const FrameProjection& p, const Valuation& locals,
                               const Valuation& globals) {
  Valuation out;
  out.reserve(p.local_idx.size() + p.global_idx.size());
  for (int i : p.local_idx) out.push_back(locals[i]);
  for (int i : p.global_idx) out.push_back(globals[i]);
  return out;
}

// Resolve synthetic jump chains so states never sit on a Jump instruction.
inline void resolve_jumps(const CompiledProc& proc, int& ip) {
  while (ip < static_cast<int>(proc.code.size()) && proc.code[ip].op == IOp::Jump)
    ip = proc.code[ip].target;
}

// Nondeterministic run of straight-line-or-looping code over the shared
// valuation only (the init block). Returns all terminal shared valuations.
inline std::set<Valuation> run_init(const CompiledParam& prog, const Valuation& start,
                                    std::set<RuntimeError>* errors) {
  struct K {
    int ip;
    Valuation shared;
    auto operator<=>(const K&) const = default;
  };
  std::set<Valuation> out;
  std::set<K> seen;
  std::deque<K> work;
  int ip0 = 0;
  CompiledProc dummy;
  dummy.code = prog.init_code;
  resolve_jumps(dummy, ip0);
  work.push_back({ip0, start});
  seen.insert(work.back());
  Valuation no_locals, no_globals;
  while (!work.empty()) {
    K cur = work.front();
    work.pop_front();
    if (cur.ip >= static_cast<int>(prog.init_code.size())) {
      out.insert(cur.shared);
      continue;
    }
    const Instr& ins = prog.init_code[cur.ip];
    auto push = [&](int ip, Valuation sh) {
      CompiledProc d;
      d.code = prog.init_code;
      resolve_jumps(d, ip);
      K nxt{ip, std::move(sh)};
      if (seen.insert(nxt).second) work.push_back(nxt);
    };
    switch (ins.op) {
      case IOp::Nop:
        push(cur.ip + 1, cur.shared);
        break;
      case IOp::Assign: {
        EvalResult r = eval_expr(ins.expr, &cur.shared, &no_globals, &no_locals);
        if (r.div_zero && errors)
          errors->insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values) {
          const VarInfo& vi = prog.shared[ins.lhs.index];
          if (!vi.type.contains(v)) {
            if (errors) errors->insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
            continue;
          }
          Valuation sh = cur.shared;
          sh[ins.lhs.index] = v;
          push(cur.ip + 1, std::move(sh));
        }
        break;
      }
      case IOp::Assume:
      case IOp::Assert: {
        EvalResult r = eval_expr(ins.expr, &cur.shared, &no_globals, &no_locals);
        if (r.div_zero && errors)
          errors->insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values)
          if (v) push(cur.ip + 1, cur.shared);
        break;
      }
      case IOp::Branch: {
        EvalResult r = eval_expr(ins.expr, &cur.shared, &no_globals, &no_locals);
        if (r.div_zero && errors)
          errors->insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values) push(v ? cur.ip + 1 : ins.target, cur.shared);
        break;
      }
      default:
        // calls/atomic/return are rejected by the checker for init
        push(cur.ip + 1, cur.shared);
        break;
    }
  }
  return out;
}

// All domain valuations of a variable list (shared variables start arbitrary).
inline void enumerate_valuations(const std::vector<VarInfo>& vars, size_t i, Valuation& cur,
                                 std::vector<Valuation>& out) {
  if (i == vars.size()) {
    out.push_back(cur);
    return;
  }
  const Type& t = vars[i].type;
  std::int64_t lo = t.is_bool ? 0 : t.lo;
  std::int64_t hi = t.is_bool ? 1 : t.hi;
  for (std::int64_t v = lo; v <= hi; ++v) {
    cur[i] = v;
    enumerate_valuations(vars, i + 1, cur, out);
  }
}

inline std::vector<Valuation> all_valuations(const std::vector<VarInfo>& vars) {
  std::vector<Valuation> out;
  Valuation cur(vars.size());
  enumerate_valuations(vars, 0, cur, out);
  return out;
}

}  // namespace detail

// Shared valuations producible by init (shared variables start arbitrary,
// init then overwrites what it assigns).
inline std::set<Valuation> init_outcomes(const CompiledParam& prog,
                                         std::set<RuntimeError>* errors = nullptr) {
  std::set<Valuation> out;
  for (const auto& start : detail::all_valuations(prog.shared)) {
    auto o = detail::run_init(prog, start, errors);
    out.insert(o.begin(), o.end());
  }
  return out;
}

namespace detail {

// Explicit-state search over the interleaved k-round semantics for one
// fixed thread-to-process assignment.
class ParamSearch {
 public:
  ParamSearch(const CompiledParam& prog, const std::vector<int>& map,
              const ExplorationBounds& bounds, OracleReport& report)
      : prog_(prog), map_(map), bounds_(bounds), report_(report) {
    for (const auto& unit : prog_.processes) {
      projections_.emplace_back();
      for (const auto& proc : unit.procs)
        projections_.back().push_back(make_projection(unit, proc));
    }
  }

  // Optional conformance constraint: fixes round switch-in/out shared values.
  void set_interface(const LinearInterface* li) { interface_ = li; }
  // Optional collector of padded wrapped-initial interfaces, one per
  // reachable boundary prefix.
  void collect_interfaces(std::set<LinearInterface>* out) { observed_ = out; }

  bool found_conforming() const { return conforming_; }

  void run(const std::set<Valuation>& initial_shared) {
    for (const auto& sh : initial_shared) {
      if (interface_ && sh != interface_->u[0]) continue;
      ParamKey st;
      st.active = 0;
      st.round = 1;
      st.shared = sh;
      for (int p : map_) {
        ThreadState t;
        const CompiledUnit& unit = prog_.processes[p];
        t.globals = initial_valuation(unit.globals);
        Frame f;
        f.proc = unit.main_index;
        f.ip = 0;
        f.locals = initial_valuation(unit.procs[f.proc].locals);
        resolve_jumps(unit.procs[f.proc], f.ip);
        t.stack.push_back(std::move(f));
        st.threads.push_back(std::move(t));
      }
      Boundary b;
      if (observed_) b.u.push_back(sh);
      enqueue(std::move(st), 0, std::move(b));
    }
    while (!work_.empty()) {
      auto [st, steps, boundary] = std::move(work_.front());
      work_.pop_front();
      expand(st, steps, boundary);
    }
    report_.state_count += seen_.size();
  }

 private:
  struct Boundary {
    std::vector<Valuation> u;  // round switch-in values seen so far
    std::vector<Valuation> v;  // round switch-out values seen so far
    auto operator<=>(const Boundary&) const = default;
  };

  void enqueue(ParamKey st, int steps, Boundary b) {
    // pad the prefix with zero-step rounds to a full wrapped interface;
    // not legal while the active thread is mid-atomic
    if (observed_ && st.threads[st.active].atomic_depth == 0) {
      LinearInterface li;
      li.u = b.u;
      li.v = b.v;
      while (static_cast<int>(li.u.size()) < bounds_.k) li.u.push_back(st.shared);
      while (static_cast<int>(li.v.size()) < bounds_.k) li.v.push_back(st.shared);
      observed_->insert(std::move(li));
    }
    std::pair<ParamKey, Boundary> key{std::move(st), std::move(b)};
    auto it = seen_.find(key);
    if (it != seen_.end() && it->second <= steps) return;
    seen_[key] = steps;
    work_.push_back({key.first, steps, key.second});
  }

  void expand(const ParamKey& st, int steps, const Boundary& boundary) {
    ThreadState& t = const_cast<ParamKey&>(st).threads[st.active];  // read-mostly
    // context switch: allowed outside atomic sections, zero-step included
    if (t.atomic_depth == 0) switch_from(st, boundary);
    if (t.stack.empty()) return;  // terminated thread: only scheduling moves
    if (steps >= bounds_.max_segment_steps) {
      report_.truncated.segment_steps = true;
      return;
    }
    step_thread(st, steps, boundary);
  }

  void switch_from(const ParamKey& st, const Boundary& boundary) {
    int m = static_cast<int>(map_.size());
    ParamKey nxt = st;
    Boundary b = boundary;
    if (st.active + 1 < m) {
      nxt.active = st.active + 1;
    } else {
      if (st.round >= bounds_.k) {
        // end of the schedule; final switch-out closes the interface
        if (interface_ && st.shared == interface_->v[bounds_.k - 1]) conforming_ = true;
        return;
      }
      if (interface_ && st.shared != interface_->v[st.round - 1]) return;
      nxt.active = 0;
      nxt.round = st.round + 1;
      if (interface_ && st.shared != interface_->u[nxt.round - 1]) return;
      if (observed_) {
        b.v.push_back(st.shared);
        b.u.push_back(st.shared);
      }
    }
    enqueue(std::move(nxt), 0, std::move(b));
  }

  void step_thread(const ParamKey& st, int steps, const Boundary& boundary) {
    const ThreadState& t = st.threads[st.active];
    const CompiledUnit& unit = prog_.processes[map_[st.active]];
    const Frame& fr = t.stack.back();
    const CompiledProc& proc = unit.procs[fr.proc];

    if (fr.ip >= static_cast<int>(proc.code.size())) {
      do_return(st, steps, boundary, /*has_value=*/false, 0);
      return;
    }
    const Instr& ins = proc.code[fr.ip];
    if (ins.src_pc >= 0) {
      report_.reachable.insert(localized(st));
    }
    EvalResult r;
    if (ins.has_expr) r = eval_expr(ins.expr, &st.shared, &t.globals, &fr.locals);

    auto succ_ip = [&](const ParamKey& base, int ip) {
      ParamKey nxt = base;
      Frame& f = nxt.threads[nxt.active].stack.back();
      f.ip = ip;
      resolve_jumps(proc, f.ip);
      enqueue(std::move(nxt), steps + 1, boundary);
    };

    switch (ins.op) {
      case IOp::Nop:
        succ_ip(st, fr.ip + 1);
        break;
      case IOp::Assign: {
        if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values) {
          const VarInfo& vi = var_of(unit, proc, ins.lhs);
          if (!vi.type.contains(v)) {
            report_.runtime_errors.insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
            continue;
          }
          ParamKey nxt = st;
          store(nxt, ins.lhs, v);
          Frame& f = nxt.threads[nxt.active].stack.back();
          f.ip = fr.ip + 1;
          resolve_jumps(proc, f.ip);
          enqueue(std::move(nxt), steps + 1, boundary);
        }
        break;
      }
      case IOp::Assume:
        if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values)
          if (v) succ_ip(st, fr.ip + 1);
        break;
      case IOp::Assert: {
        if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values) {
          if (v)
            succ_ip(st, fr.ip + 1);
          else
            report_.violations.insert(localized(st));
        }
        break;
      }
      case IOp::Branch:
        if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
        for (auto v : r.values) succ_ip(st, v ? fr.ip + 1 : ins.target);
        break;
      case IOp::Call: {
        if (static_cast<int>(t.stack.size()) >= bounds_.max_stack_depth) {
          report_.truncated.stack_depth = true;
          break;
        }
        const CompiledProc& callee = unit.procs[ins.callee];
        std::vector<Valuation> arg_sets{{}};
        bool err = false;
        for (size_t ai = 0; ai < ins.args.size(); ++ai) {
          EvalResult ar = eval_expr(ins.args[ai], &st.shared, &t.globals, &fr.locals);
          if (ar.div_zero) {
            report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
            err = true;
          }
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
        (void)err;
        for (const auto& args : arg_sets) {
          ParamKey nxt = st;
          Frame f;
          f.proc = ins.callee;
          f.ip = 0;
          f.locals = initial_valuation(callee.locals);
          for (size_t ai = 0; ai < args.size(); ++ai) f.locals[ai] = args[ai];
          resolve_jumps(callee, f.ip);
          nxt.threads[nxt.active].stack.push_back(std::move(f));
          enqueue(std::move(nxt), steps + 1, boundary);
        }
        break;
      }
      case IOp::Return: {
        if (r.div_zero) report_.runtime_errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
        if (ins.has_expr) {
          for (auto v : r.values) do_return(st, steps, boundary, true, v);
        } else {
          do_return(st, steps, boundary, false, 0);
        }
        break;
      }
      case IOp::AtomicBegin: {
        ParamKey nxt = st;
        nxt.threads[nxt.active].atomic_depth = 1;
        Frame& f = nxt.threads[nxt.active].stack.back();
        f.ip = fr.ip + 1;
        resolve_jumps(proc, f.ip);
        enqueue(std::move(nxt), steps + 1, boundary);
        break;
      }
      case IOp::AtomicEnd: {
        ParamKey nxt = st;
        nxt.threads[nxt.active].atomic_depth = 0;
        Frame& f = nxt.threads[nxt.active].stack.back();
        f.ip = fr.ip + 1;
        resolve_jumps(proc, f.ip);
        enqueue(std::move(nxt), steps + 1, boundary);
        break;
      }
      case IOp::Jump:
        succ_ip(st, ins.target);
        break;
    }
  }

  void do_return(const ParamKey& st, int steps, const Boundary& boundary, bool has_value,
                 std::int64_t value) {
    const ThreadState& t = st.threads[st.active];
    const CompiledUnit& unit = prog_.processes[map_[st.active]];
    ParamKey nxt = st;
    ThreadState& nt = nxt.threads[nxt.active];
    nt.stack.pop_back();
    if (nt.stack.empty()) {
      // main returned; thread terminated
      enqueue(std::move(nxt), steps + 1, boundary);
      return;
    }
    Frame& caller = nt.stack.back();
    const CompiledProc& cproc = unit.procs[caller.proc];
    const Instr& call_ins = cproc.code[caller.ip];
    if (call_ins.has_lhs && has_value) {
      const VarInfo& vi = var_of(unit, cproc, call_ins.lhs);
      if (!vi.type.contains(value)) {
        report_.runtime_errors.insert({RuntimeErrorKind::RangeOverflow, call_ins.src_pc});
        return;
      }
      store(nxt, call_ins.lhs, value);
    }
    Frame& caller2 = nxt.threads[nxt.active].stack.back();
    caller2.ip += 1;
    resolve_jumps(cproc, caller2.ip);
    enqueue(std::move(nxt), steps + 1, boundary);
  }

  const VarInfo& var_of(const CompiledUnit& unit, const CompiledProc& proc, VarRef r) const {
    switch (r.scope) {
      case VarScope::Shared: return prog_.shared[r.index];
      case VarScope::Global: return unit.globals[r.index];
      case VarScope::Local: return proc.locals[r.index];
    }
    return prog_.shared[r.index];
  }

  void store(ParamKey& st, VarRef r, std::int64_t v) const {
    switch (r.scope) {
      case VarScope::Shared:
        st.shared[r.index] = v;
        break;
      case VarScope::Global:
        st.threads[st.active].globals[r.index] = v;
        break;
      case VarScope::Local:
        st.threads[st.active].stack.back().locals[r.index] = v;
        break;
    }
  }

  LocalizedState localized(const ParamKey& st) const {
    const ThreadState& t = st.threads[st.active];
    const Frame& fr = t.stack.back();
    const CompiledUnit& unit = prog_.processes[map_[st.active]];
    const CompiledProc& proc = unit.procs[fr.proc];
    const FrameProjection& p = projections_[map_[st.active]][fr.proc];
    LocalizedState ls;
    ls.pc = proc.code[fr.ip].src_pc;
    ls.frame = project_frame(p, fr.locals, t.globals);
    ls.shared = st.shared;
    return ls;
  }

  const CompiledParam& prog_;
  std::vector<int> map_;
  const ExplorationBounds& bounds_;
  OracleReport& report_;
  std::vector<std::vector<FrameProjection>> projections_;
  const LinearInterface* interface_ = nullptr;
  std::set<LinearInterface>* observed_ = nullptr;
  bool conforming_ = false;

  std::map<std::pair<ParamKey, Boundary>, int> seen_;
  std::deque<std::tuple<ParamKey, int, Boundary>> work_;
};

inline std::vector<std::vector<int>> all_maps(int num_processes, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(m, 0);
  for (;;) {
    out.push_back(cur);
    int i = m - 1;
    while (i >= 0 && cur[i] == num_processes - 1) cur[i--] = 0;
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

}  // namespace detail

// Ground-truth exploration of all k-round executions for every thread count
// m <= bounds.max_threads and every thread-to-process assignment.
inline OracleReport explore(const CompiledParam& prog, const ExplorationBounds& bounds) {
  OracleReport report;
  auto initial = init_outcomes(prog, &report.runtime_errors);
  int n = static_cast<int>(prog.processes.size());
  for (int m = 1; m <= bounds.max_threads; ++m) {
    for (const auto& map : detail::all_maps(n, m)) {
      detail::ParamSearch search(prog, map, bounds, report);
      search.run(initial);
    }
  }
  return report;
}

inline OracleReport explore(const ParamProgram& prog, const ExplorationBounds& bounds) {
  return explore(compile_param(prog), bounds);
}

// True iff some bounded k-round execution conforms to the interface
// (switch-in shared value u_i at the start of round i, switch-out v_i at its
// end). Sets *truncated when a bound was hit before a witness was found.
inline bool executions_conforming(const CompiledParam& prog, const LinearInterface& li,
                                  const ExplorationBounds& bounds, bool* truncated = nullptr) {
  if (li.length() != bounds.k) return false;
  OracleReport scratch;
  auto initial = init_outcomes(prog);
  if (!initial.count(li.u[0])) return false;  // initial interface required of executions
  int n = static_cast<int>(prog.processes.size());
  for (int m = 1; m <= bounds.max_threads; ++m) {
    for (const auto& map : detail::all_maps(n, m)) {
      detail::ParamSearch search(prog, map, bounds, scratch);
      search.set_interface(&li);
      search.run(initial);
      if (search.found_conforming()) return true;
    }
  }
  if (truncated) *truncated = scratch.truncated.any();
  return false;
}

inline bool executions_conforming(const ParamProgram& prog, const LinearInterface& li,
                                  const ExplorationBounds& bounds, bool* truncated = nullptr) {
  return executions_conforming(compile_param(prog), li, bounds, truncated);
}

// The wrapped initial interfaces of all bounded k-round executions (each
// execution padded with zero-step rounds to length k). Used by the
// Lemma-1-style cross-checks; exponential in the boundary prefix, so keep
// inputs small.
inline std::set<LinearInterface> observed_interfaces(const CompiledParam& prog,
                                                     const ExplorationBounds& bounds) {
  std::set<LinearInterface> out;
  OracleReport scratch;
  auto initial = init_outcomes(prog);
  int n = static_cast<int>(prog.processes.size());
  for (int m = 1; m <= bounds.max_threads; ++m) {
    for (const auto& map : detail::all_maps(n, m)) {
      detail::ParamSearch search(prog, map, bounds, scratch);
      search.collect_interfaces(&out);
      search.run(initial);
    }
  }
  return out;
}

}  // namespace liseq

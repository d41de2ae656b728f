#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "liseq/param_oracle.hpp"

namespace liseq {

// A witness that (u̅,v̅) is a linear interface: a chain of k-tuples of shared
// valuations x̅_1 .. x̅_{m+1} where x̅_1 = u̅, x̅_{m+1} = v̅, and consecutive
// tuples are connected by one thread running k round segments with its local
// state carried across rounds. Thread i's round-j segment runs from shared
// value chain[i-1][j-1] to chain[i][j-1].
struct InterfaceWitness {
  int m = 0;
  std::vector<std::vector<Valuation>> chain;  // m+1 entries of k valuations
};

inline bool is_wrapped(const LinearInterface& li) {
  for (int i = 0; i + 1 < li.length(); ++i)
    if (li.v[i] != li.u[i + 1]) return false;
  return true;
}

inline bool is_initial(const LinearInterface& li, const CompiledParam& prog) {
  return li.length() > 0 && init_outcomes(prog).count(li.u[0]) > 0;
}

namespace detail {

// Thread-local stepping and segment-closure memoization shared by
// check/enumerate. A "segment" is any number of local steps of one thread
// (zero included) that does not stop inside an atomic section.
class InterfaceEngine {
 public:
  InterfaceEngine(const CompiledParam& prog, const ExplorationBounds& bounds)
      : prog_(prog), bounds_(bounds) {}

  bool truncated() const { return truncated_; }

  // All b̅ such that one thread (of any process) scheduled k times with
  // switch-in values x̅ can produce switch-out values b̅.
  const std::set<std::vector<Valuation>>& thread_effects(const std::vector<Valuation>& x) {
    auto it = effects_memo_.find(x);
    if (it != effects_memo_.end()) return it->second;
    std::set<std::vector<Valuation>> out;
    for (int p = 0; p < static_cast<int>(prog_.processes.size()); ++p) {
      ThreadState init;
      init.globals = initial_valuation(prog_.processes[p].globals);
      Frame f;
      f.proc = prog_.processes[p].main_index;
      f.ip = 0;
      f.locals = initial_valuation(prog_.processes[p].procs[f.proc].locals);
      resolve_jumps(prog_.processes[p].procs[f.proc], f.ip);
      init.stack.push_back(std::move(f));
      std::vector<Valuation> b;
      rounds(p, init, x, 0, b, out);
    }
    return effects_memo_.emplace(x, std::move(out)).first->second;
  }

  std::optional<InterfaceWitness> check(const LinearInterface& li, int m_max) {
    // BFS over k-tuple chains of length up to m_max
    std::map<std::vector<Valuation>, std::vector<Valuation>> parent;
    std::deque<std::vector<Valuation>> work{li.u};
    // the start tuple itself is not a witness endpoint: m = 0 is excluded
    for (int depth = 1; depth <= m_max && !work.empty(); ++depth) {
      std::deque<std::vector<Valuation>> next;
      for (const auto& x : work) {
        for (const auto& b : thread_effects(x)) {
          if (!parent.count(b)) {
            parent[b] = x;
            next.push_back(b);
          }
          if (b == li.v) {
            InterfaceWitness w;
            w.chain.push_back(b);
            const std::vector<Valuation>* cur = &x;
            while (*cur != li.u) {
              w.chain.push_back(*cur);
              cur = &parent.at(*cur);
            }
            w.chain.push_back(li.u);
            std::reverse(w.chain.begin(), w.chain.end());
            w.m = static_cast<int>(w.chain.size()) - 1;
            return w;
          }
        }
      }
      work = std::move(next);
    }
    return std::nullopt;
  }

  std::set<std::vector<Valuation>> reachable_from(const std::vector<Valuation>& u, int m_max) {
    std::set<std::vector<Valuation>> seen;
    std::deque<std::vector<Valuation>> work{u};
    for (int depth = 1; depth <= m_max && !work.empty(); ++depth) {
      std::deque<std::vector<Valuation>> next;
      for (const auto& x : work) {
        for (const auto& b : thread_effects(x)) {
          if (seen.insert(b).second) next.push_back(b);
        }
      }
      work = std::move(next);
    }
    return seen;
  }

 private:
  using Segment = std::set<std::pair<Valuation, ThreadState>>;

  void rounds(int process, const ThreadState& sigma, const std::vector<Valuation>& x, size_t j,
              std::vector<Valuation>& b, std::set<std::vector<Valuation>>& out) {
    if (j == x.size()) {
      out.insert(b);
      return;
    }
    for (const auto& [bj, sigma2] : closure(process, sigma, x[j])) {
      b.push_back(bj);
      rounds(process, sigma2, x, j + 1, b, out);
      b.pop_back();
    }
  }

  // Everything one scheduled segment can reach from (sigma, shared=a),
  // stopping anywhere outside an atomic section.
  const Segment& closure(int process, const ThreadState& sigma, const Valuation& a) {
    auto key = std::make_tuple(process, sigma, a);
    auto it = closure_memo_.find(key);
    if (it != closure_memo_.end()) return it->second;

    Segment out;
    std::set<std::pair<ThreadState, Valuation>> seen;
    std::deque<std::pair<ThreadState, Valuation>> work;
    work.push_back({sigma, a});
    seen.insert(work.back());
    int steps = 0;
    while (!work.empty()) {
      auto [t, sh] = std::move(work.front());
      work.pop_front();
      if (t.atomic_depth == 0) out.insert({sh, t});
      if (t.stack.empty()) continue;
      if (++steps > bounds_.max_segment_steps) {
        truncated_ = true;
        break;
      }
      step(process, t, sh, [&](ThreadState nt, Valuation nsh) {
        auto key2 = std::make_pair(std::move(nt), std::move(nsh));
        if (seen.insert(key2).second) work.push_back(std::move(key2));
      });
    }
    return closure_memo_.emplace(std::move(key), std::move(out)).first->second;
  }

  template <class Emit>
  void step(int process, const ThreadState& t, const Valuation& shared, Emit emit) {
    const CompiledUnit& unit = prog_.processes[process];
    const Frame& fr = t.stack.back();
    const CompiledProc& proc = unit.procs[fr.proc];

    auto ret = [&](bool has_value, std::int64_t value) {
      ThreadState nt = t;
      nt.stack.pop_back();
      if (nt.stack.empty()) {
        emit(std::move(nt), shared);
        return;
      }
      Frame& caller = nt.stack.back();
      const CompiledProc& cproc = unit.procs[caller.proc];
      const Instr& call_ins = cproc.code[caller.ip];
      if (call_ins.has_lhs && has_value) {
        const VarInfo* vi = nullptr;
        switch (call_ins.lhs.scope) {
          case VarScope::Shared: vi = &prog_.shared[call_ins.lhs.index]; break;
          case VarScope::Global: vi = &unit.globals[call_ins.lhs.index]; break;
          case VarScope::Local: vi = &cproc.locals[call_ins.lhs.index]; break;
        }
        if (!vi->type.contains(value)) return;  // error outcome: execution stops
        Valuation nsh = shared;
        store(nt, nsh, call_ins.lhs, value);
        caller.ip += 1;
        resolve_jumps(cproc, caller.ip);
        emit(std::move(nt), std::move(nsh));
        return;
      }
      caller.ip += 1;
      resolve_jumps(cproc, caller.ip);
      emit(std::move(nt), shared);
    };

    if (fr.ip >= static_cast<int>(proc.code.size())) {
      ret(false, 0);
      return;
    }
    const Instr& ins = proc.code[fr.ip];
    EvalResult r;
    if (ins.has_expr) r = eval_expr(ins.expr, &shared, &t.globals, &fr.locals);

    auto advance = [&](int ip, const Valuation& sh) {
      ThreadState nt = t;
      Frame& f = nt.stack.back();
      f.ip = ip;
      resolve_jumps(proc, f.ip);
      emit(std::move(nt), sh);
    };

    switch (ins.op) {
      case IOp::Nop:
        advance(fr.ip + 1, shared);
        break;
      case IOp::Assign:
        for (auto v : r.values) {
          const VarInfo* vi = nullptr;
          switch (ins.lhs.scope) {
            case VarScope::Shared: vi = &prog_.shared[ins.lhs.index]; break;
            case VarScope::Global: vi = &unit.globals[ins.lhs.index]; break;
            case VarScope::Local: vi = &proc.locals[ins.lhs.index]; break;
          }
          if (!vi->type.contains(v)) continue;
          ThreadState nt = t;
          Valuation nsh = shared;
          store(nt, nsh, ins.lhs, v);
          Frame& f = nt.stack.back();
          f.ip = fr.ip + 1;
          resolve_jumps(proc, f.ip);
          emit(std::move(nt), std::move(nsh));
        }
        break;
      case IOp::Assume:
      case IOp::Assert:
        // failed assertions halt; for interface purposes both prune
        for (auto v : r.values)
          if (v) advance(fr.ip + 1, shared);
        break;
      case IOp::Branch:
        for (auto v : r.values) advance(v ? fr.ip + 1 : ins.target, shared);
        break;
      case IOp::Call: {
        if (static_cast<int>(t.stack.size()) >= bounds_.max_stack_depth) {
          truncated_ = true;
          break;
        }
        const CompiledProc& callee = unit.procs[ins.callee];
        std::vector<Valuation> arg_sets{{}};
        for (const auto& a : ins.args) {
          EvalResult ar = eval_expr(a, &shared, &t.globals, &fr.locals);
          std::vector<Valuation> next_sets;
          for (const auto& prefix : arg_sets) {
            for (auto v : ar.values) {
              if (!callee.locals[prefix.size()].type.contains(v)) continue;
              Valuation p2 = prefix;
              p2.push_back(v);
              next_sets.push_back(std::move(p2));
            }
          }
          arg_sets = std::move(next_sets);
        }
        for (const auto& args : arg_sets) {
          ThreadState nt = t;
          Frame f;
          f.proc = ins.callee;
          f.ip = 0;
          f.locals = initial_valuation(callee.locals);
          for (size_t ai = 0; ai < args.size(); ++ai) f.locals[ai] = args[ai];
          resolve_jumps(callee, f.ip);
          nt.stack.push_back(std::move(f));
          emit(std::move(nt), shared);
        }
        break;
      }
      case IOp::Return:
        if (ins.has_expr) {
          for (auto v : r.values) ret(true, v);
        } else {
          ret(false, 0);
        }
        break;
      case IOp::AtomicBegin: {
        ThreadState nt = t;
        nt.atomic_depth = 1;
        Frame& f = nt.stack.back();
        f.ip = fr.ip + 1;
        resolve_jumps(proc, f.ip);
        emit(std::move(nt), shared);
        break;
      }
      case IOp::AtomicEnd: {
        ThreadState nt = t;
        nt.atomic_depth = 0;
        Frame& f = nt.stack.back();
        f.ip = fr.ip + 1;
        resolve_jumps(proc, f.ip);
        emit(std::move(nt), shared);
        break;
      }
      case IOp::Jump:
        advance(ins.target, shared);
        break;
    }
  }

  static void store(ThreadState& t, Valuation& shared, VarRef r, std::int64_t v) {
    switch (r.scope) {
      case VarScope::Shared: shared[r.index] = v; break;
      case VarScope::Global: t.globals[r.index] = v; break;
      case VarScope::Local: t.stack.back().locals[r.index] = v; break;
    }
  }

  const CompiledParam& prog_;
  const ExplorationBounds& bounds_;
  bool truncated_ = false;
  std::map<std::tuple<int, ThreadState, Valuation>, Segment> closure_memo_;
  std::map<std::vector<Valuation>, std::set<std::vector<Valuation>>> effects_memo_;
};

inline void tuple_space(const std::vector<Valuation>& states, int k, size_t j,
                        std::vector<Valuation>& cur, std::vector<std::vector<Valuation>>& out) {
  if (static_cast<int>(j) == k) {
    out.push_back(cur);
    return;
  }
  for (const auto& s : states) {
    cur.push_back(s);
    tuple_space(states, k, j + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

// Reusable engine when many queries hit the same program (segment closures
// are memoized across calls).
class InterfaceOracle {
 public:
  InterfaceOracle(const CompiledParam& prog, const ExplorationBounds& bounds)
      : prog_(prog), bounds_(bounds), engine_(prog_, bounds_) {}

  std::optional<InterfaceWitness> check_interface(const LinearInterface& li) {
    if (li.length() == 0 || li.u.size() != li.v.size()) return std::nullopt;
    return engine_.check(li, bounds_.max_threads);
  }

  // Exactly the (u̅,v̅) with a block witness of 1..max_threads threads,
  // over every u̅ in the shared-state tuple space.
  std::set<LinearInterface> enumerate_interfaces(int k) {
    std::set<LinearInterface> out;
    auto states = detail::all_valuations(prog_.shared);
    std::vector<std::vector<Valuation>> us;
    std::vector<Valuation> cur;
    detail::tuple_space(states, k, 0, cur, us);
    for (const auto& u : us) {
      for (const auto& v : engine_.reachable_from(u, bounds_.max_threads)) {
        LinearInterface li;
        li.u = u;
        li.v = v;
        out.insert(std::move(li));
      }
    }
    return out;
  }

  bool truncated() const { return engine_.truncated(); }
  const CompiledParam& prog() const { return prog_; }

 private:
  CompiledParam prog_;
  ExplorationBounds bounds_;
  detail::InterfaceEngine engine_;
};

inline std::optional<InterfaceWitness> check_interface(const CompiledParam& prog,
                                                       const LinearInterface& li,
                                                       const ExplorationBounds& bounds,
                                                       bool* truncated = nullptr) {
  InterfaceOracle o(prog, bounds);
  auto w = o.check_interface(li);
  if (truncated) *truncated = o.truncated();
  return w;
}

inline std::set<LinearInterface> enumerate_interfaces(const CompiledParam& prog, int k,
                                                      const ExplorationBounds& bounds,
                                                      bool* truncated = nullptr) {
  InterfaceOracle o(prog, bounds);
  auto out = o.enumerate_interfaces(k);
  if (truncated) *truncated = o.truncated();
  return out;
}

}  // namespace liseq

#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "liseq/param_oracle.hpp"
#include "liseq/seq_lazy.hpp"

namespace liseq {

// Pushdown backend. A normalized program over finite domains is lowered to
// a parameterized multi-stack pushdown view (shared locations S, one
// component automaton per process with control locations factoring as
// S x L_i). Round-bounded reachability then reduces to reachability in a
// single ordinary pushdown system A_k, which we obtain by specializing the
// lazy sequentialization to the finite domains and compiling it to pushdown
// rules, so the size bounds are measured on the real transformer's output.

struct PmpdsComponent {
  std::string name;
  long long num_locals = 0;   // |L_i|: process-global valuations
  long long transitions = 0;  // rules of the component automaton
  long long internal = 0;
  long long pushes = 0;
  long long pops = 0;
};

struct Pmpds {
  ParamProgram program;  // normalized source, kept for build_ak
  CompiledParam compiled;
  long long num_shared = 0;      // |S|
  std::set<Valuation> initial;   // S0: shared states producible by init
  std::vector<PmpdsComponent> components;
  long long ell = 0;  // sum of |L_i|
  long long d = 0;    // total component transition count
};

// A plain pushdown system. Push means <from, sym> -> <to, sym1 sym2> with
// sym1 the new top; internal rewrites the top to sym1; pop removes it.
struct Pds {
  enum class RuleKind { Internal, Push, Pop };
  struct Rule {
    int from = 0;
    int sym = 0;
    RuleKind kind = RuleKind::Internal;
    int to = 0;
    int sym1 = -1;
    int sym2 = -1;
    auto operator<=>(const Rule&) const = default;
  };
  int num_locations = 0;
  int num_symbols = 0;
  // generated-globals valuation behind each location (empty for sinks);
  // only filled by build_ak, handmade systems may leave it empty
  std::vector<Valuation> location_vals;
  std::vector<Rule> rules;
  std::vector<std::pair<int, int>> start;  // (location, single stack symbol)
  std::set<int> targets;                   // violation locations
};

struct AkPrediction {
  long long locations = 0;    // ell * k^2 * |S|^(2k)
  long long transitions = 0;  // ell * d * k^3 * |S|^(2k-1)
};

namespace detail {

inline long long sat_mul(long long a, long long b) {
  const long long cap = std::numeric_limits<long long>::max();
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap;
  return a * b;
}

inline long long domain_size(const Type& t) {
  if (t.is_bool) return 2;
  return static_cast<long long>(t.hi - t.lo + 1);
}

inline long long valuation_count(const std::vector<VarInfo>& vars) {
  long long n = 1;
  for (const auto& v : vars) n = sat_mul(n, domain_size(v.type));
  return n;
}

// Count the syntactic rules of one component automaton by enumerating every
// control/stack-top combination and the successors of its instruction.
inline void count_component(const CompiledParam& cp, const CompiledUnit& unit,
                            PmpdsComponent& out, long long budget) {
  auto shared_vals = all_valuations(cp.shared);
  auto global_vals = all_valuations(unit.globals);
  long long combos = 0;
  for (const auto& proc : unit.procs)
    combos += sat_mul((long long)proc.code.size() + 1, valuation_count(proc.locals));
  combos = sat_mul(combos, sat_mul((long long)shared_vals.size(), (long long)global_vals.size()));
  if (combos > budget)
    throw std::length_error("lower: component enumeration needs " + std::to_string(combos) +
                            " combinations, budget is " + std::to_string(budget));

  for (const auto& sh : shared_vals) {
    for (const auto& gl : global_vals) {
      for (size_t pi = 0; pi < unit.procs.size(); ++pi) {
        const auto& proc = unit.procs[pi];
        // returning from main terminates the thread rather than popping
        bool is_main = (int)pi == unit.main_index;
        for (const auto& locals : all_valuations(proc.locals)) {
          for (size_t ip = 0; ip <= proc.code.size(); ++ip) {
            if (ip == proc.code.size()) {
              if (!is_main) out.pops++;  // implicit return
              continue;
            }
            const Instr& ins = proc.code[ip];
            EvalResult r;
            if (ins.has_expr) r = eval_expr(ins.expr, &sh, &gl, &locals);
            switch (ins.op) {
              case IOp::Nop:
              case IOp::AtomicBegin:
              case IOp::AtomicEnd:
                out.internal++;
                break;
              case IOp::Jump:
                break;  // synthetic, collapsed by jump resolution
              case IOp::Assign: {
                const VarInfo* vi = nullptr;
                switch (ins.lhs.scope) {
                  case VarScope::Shared: vi = &cp.shared[ins.lhs.index]; break;
                  case VarScope::Global: vi = &unit.globals[ins.lhs.index]; break;
                  case VarScope::Local: vi = &proc.locals[ins.lhs.index]; break;
                }
                for (auto v : r.values)
                  if (vi->type.contains(v)) out.internal++;
                break;
              }
              case IOp::Assume:
                for (auto v : r.values)
                  if (v) out.internal++;
                break;
              case IOp::Assert: {
                bool t = false, f = false;
                for (auto v : r.values) (v ? t : f) = true;
                out.internal += (t ? 1 : 0) + (f ? 1 : 0);
                break;
              }
              case IOp::Branch: {
                bool t = false, f = false;
                for (auto v : r.values) (v ? t : f) = true;
                out.internal += (t ? 1 : 0) + (f ? 1 : 0);
                break;
              }
              case IOp::Return:
                if (!is_main) out.pops++;
                break;
              case IOp::Call: {
                const CompiledProc& callee = unit.procs[ins.callee];
                long long tuples = 1;
                for (size_t ai = 0; ai < ins.args.size(); ++ai) {
                  EvalResult ar = eval_expr(ins.args[ai], &sh, &gl, &locals);
                  long long ok = 0;
                  for (auto v : ar.values)
                    if (callee.locals[ai].type.contains(v)) ok++;
                  tuples = sat_mul(tuples, ok);
                }
                out.pushes += tuples;
                break;
              }
            }
          }
        }
      }
    }
  }
  out.transitions = out.internal + out.pushes + out.pops;
}

}  // namespace detail

inline Pmpds lower(const ParamProgram& normalized, long long budget = 200000000) {
  if (normalized.processes.size() != 1)
    throw std::invalid_argument("lower: expected a normalized (single-process) program");
  Pmpds p;
  p.program = normalized;
  p.compiled = compile_param(normalized);
  p.num_shared = detail::valuation_count(p.compiled.shared);
  p.initial = init_outcomes(p.compiled);
  for (size_t i = 0; i < p.compiled.processes.size(); ++i) {
    PmpdsComponent c;
    c.name = p.compiled.process_names[i];
    c.num_locals = detail::valuation_count(p.compiled.processes[i].globals);
    detail::count_component(p.compiled, p.compiled.processes[i], c, budget);
    p.ell += c.num_locals;
    p.d += c.transitions;
    p.components.push_back(std::move(c));
  }
  return p;
}

inline AkPrediction predict_ak(const Pmpds& p, int k) {
  using detail::sat_mul;
  AkPrediction pr;
  long long s2k = 1;
  for (int i = 0; i < 2 * k; ++i) s2k = sat_mul(s2k, p.num_shared);
  long long s2k1 = 1;
  for (int i = 0; i < 2 * k - 1; ++i) s2k1 = sat_mul(s2k1, p.num_shared);
  pr.locations = sat_mul(p.ell, sat_mul((long long)k * k, s2k));
  pr.transitions = sat_mul(p.ell, sat_mul(p.d, sat_mul((long long)k * k * k, s2k1)));
  return pr;
}

namespace detail {

// On-the-fly forward saturation over the compiled lazy output. Control
// locations are valuations of the generated program's globals (which carry
// the q/q' tuples, round index, and flags), stack symbols are frames
// (procedure, resolved ip, locals). Rules are generated on demand for the
// control/top pairs the saturation actually reaches, so recursion needs no
// depth bound.
class AkBuilder {
 public:
  AkBuilder(const CompiledUnit& unit, long long budget) : unit_(unit), budget_(budget) {
    pds_.num_locations = 1;  // location 0 is the violation sink
    pds_.targets.insert(kViolation);
  }

  Pds build() {
    int c0 = control_id(initial_valuation(unit_.globals));
    const CompiledProc& mainp = unit_.procs[unit_.main_index];
    int s0 = sym_at(unit_.main_index, 0, initial_valuation(mainp.locals));
    pds_.start.push_back({c0, s0});
    add_trans(astate_of_control(c0), s0, kFinal);
    while (!work_.empty()) {
      auto [a, sym, b] = work_.front();
      work_.pop_front();
      process(a, sym, b);
    }
    pds_.num_symbols = (int)symbols_.size();
    control_vals_.resize(pds_.num_locations);
    pds_.location_vals = std::move(control_vals_);
    return std::move(pds_);
  }

 private:
  static constexpr int kViolation = 0;
  static constexpr int kFinal = 0;  // automaton state 0 is the accepting state
  static constexpr int kEps = -1;

  struct SymKey {
    int proc;
    int ip;
    Valuation locals;
    auto operator<=>(const SymKey&) const = default;
  };

  int control_id(const Valuation& g) {
    auto it = control_ids_.find(g);
    if (it != control_ids_.end()) return it->second;
    int id = pds_.num_locations++;
    check_budget();
    control_ids_.emplace(g, id);
    control_vals_.resize(id + 1);
    control_vals_[id] = g;
    return id;
  }

  int sym_at(int proc, int ip, Valuation locals) {
    resolve_jumps(unit_.procs[proc], ip);
    SymKey key{proc, ip, std::move(locals)};
    auto it = symbol_ids_.find(key);
    if (it != symbol_ids_.end()) return it->second;
    int id = (int)symbols_.size();
    check_budget();
    symbol_ids_.emplace(key, id);
    symbols_.push_back(symbol_ids_.find(key)->first);
    return id;
  }

  int astate_of_control(int ctrl) {
    if ((int)control_astate_.size() <= ctrl) control_astate_.resize(ctrl + 1, -1);
    if (control_astate_[ctrl] < 0) {
      control_astate_[ctrl] = new_astate();
      astate_control_[control_astate_[ctrl]] = ctrl;
    }
    return control_astate_[ctrl];
  }

  int mid_state(int to, int sym1) {
    auto [it, fresh] = mid_ids_.try_emplace({to, sym1}, 0);
    if (fresh) it->second = new_astate();
    return it->second;
  }

  int new_astate() {
    int id = num_astates_++;
    rel_out_.emplace_back();
    eps_in_.emplace_back();
    return id;
  }

  void check_budget() const {
    if (pds_.num_locations + (long long)symbols_.size() + (long long)pds_.rules.size() > budget_)
      throw std::length_error("build_ak: materialized size exceeds budget " +
                              std::to_string(budget_));
  }

  void add_trans(int a, int sym, int b) {
    if (!rel_.insert({a, sym, b}).second) return;
    rel_out_[a].push_back({sym, b});
    if (sym == kEps) eps_in_[b].push_back(a);
    work_.push_back({a, sym, b});
  }

  void add_rule(Pds::Rule r) {
    pds_.rules.push_back(r);
    check_budget();
  }

  // Pushdown rules for one control/stack-top pair, generated by interpreting
  // the instruction the top symbol points at under the control's globals.
  void expand(int ctrl, int sym) {
    std::vector<Pds::Rule>& out = rules_by_[{ctrl, sym}];
    if (ctrl == kViolation) return;  // sink
    const Valuation& globals = control_vals_[ctrl];
    SymKey top = symbols_[sym];  // copy: symbols_ may grow below
    const CompiledProc& proc = unit_.procs[top.proc];
    auto emit = [&](Pds::Rule r) {
      out.push_back(r);
      add_rule(r);
    };
    auto internal_to = [&](Valuation g, int ip, Valuation locals) {
      Pds::Rule r;
      r.from = ctrl;
      r.sym = sym;
      r.kind = Pds::RuleKind::Internal;
      r.to = control_id(g);
      r.sym1 = sym_at(top.proc, ip, std::move(locals));
      emit(r);
    };
    if (top.ip >= (int)proc.code.size()) {
      emit({ctrl, sym, Pds::RuleKind::Pop, ctrl, -1, -1});
      return;
    }
    const Instr& ins = proc.code[top.ip];
    EvalResult r;
    if (ins.has_expr) r = eval_expr(ins.expr, nullptr, &globals, &top.locals);
    switch (ins.op) {
      case IOp::Nop:
      case IOp::AtomicBegin:
      case IOp::AtomicEnd:
        internal_to(globals, top.ip + 1, top.locals);
        break;
      case IOp::Jump:
        internal_to(globals, ins.target, top.locals);
        break;
      case IOp::Assign:
        for (auto v : r.values) {
          const VarInfo& vi = ins.lhs.scope == VarScope::Local ? proc.locals[ins.lhs.index]
                                                               : unit_.globals[ins.lhs.index];
          if (!vi.type.contains(v)) continue;  // error path, pruned
          Valuation g = globals;
          Valuation l = top.locals;
          (ins.lhs.scope == VarScope::Local ? l[ins.lhs.index] : g[ins.lhs.index]) = v;
          internal_to(std::move(g), top.ip + 1, std::move(l));
        }
        break;
      case IOp::Assume:
        for (auto v : r.values)
          if (v) internal_to(globals, top.ip + 1, top.locals);
        break;
      case IOp::Assert: {
        bool t = false, f = false;
        for (auto v : r.values) (v ? t : f) = true;
        if (t) internal_to(globals, top.ip + 1, top.locals);
        if (f) emit({ctrl, sym, Pds::RuleKind::Internal, kViolation, sym, -1});
        break;
      }
      case IOp::Branch: {
        bool t = false, f = false;
        for (auto v : r.values) (v ? t : f) = true;
        if (t) internal_to(globals, top.ip + 1, top.locals);
        if (f) internal_to(globals, ins.target, top.locals);
        break;
      }
      case IOp::Return:
        emit({ctrl, sym, Pds::RuleKind::Pop, ctrl, -1, -1});
        break;
      case IOp::Call: {
        const CompiledProc& callee = unit_.procs[ins.callee];
        std::vector<Valuation> arg_sets{{}};
        for (size_t ai = 0; ai < ins.args.size(); ++ai) {
          EvalResult ar = eval_expr(ins.args[ai], nullptr, &globals, &top.locals);
          std::vector<Valuation> next;
          for (const auto& prefix : arg_sets) {
            for (auto v : ar.values) {
              if (!callee.locals[ai].type.contains(v)) continue;
              Valuation p = prefix;
              p.push_back(v);
              next.push_back(std::move(p));
            }
          }
          arg_sets = std::move(next);
        }
        int ret_sym = sym_at(top.proc, top.ip + 1, top.locals);
        for (const auto& args : arg_sets) {
          Valuation l = initial_valuation(callee.locals);
          for (size_t ai = 0; ai < args.size(); ++ai) l[ai] = args[ai];
          Pds::Rule rule;
          rule.from = ctrl;
          rule.sym = sym;
          rule.kind = Pds::RuleKind::Push;
          rule.to = ctrl;
          rule.sym1 = sym_at(ins.callee, 0, std::move(l));
          rule.sym2 = ret_sym;
          emit(rule);
        }
        break;
      }
    }
  }

  void process(int a, int sym, int b) {
    if (sym == kEps) {
      // combine with everything leaving the target (index loop: may grow)
      for (size_t i = 0; i < rel_out_[b].size(); ++i) {
        auto [s2, b2] = rel_out_[b][i];
        add_trans(a, s2, b2);
      }
      return;
    }
    auto ac = astate_control_.find(a);
    if (ac == astate_control_.end()) return;  // mid-state source: no rules fire
    int ctrl = ac->second;
    if (!expanded_.insert({ctrl, sym}).second) {
      apply_rules(ctrl, sym, b);
      return;
    }
    expand(ctrl, sym);
    apply_rules(ctrl, sym, b);
  }

  void apply_rules(int ctrl, int sym, int b) {
    const auto& rules = rules_by_[{ctrl, sym}];
    for (const auto& r : rules) {
      switch (r.kind) {
        case Pds::RuleKind::Internal:
          add_trans(astate_of_control(r.to), r.sym1, b);
          break;
        case Pds::RuleKind::Pop:
          add_trans(astate_of_control(r.to), kEps, b);
          break;
        case Pds::RuleKind::Push: {
          int qm = mid_state(r.to, r.sym1);
          add_trans(astate_of_control(r.to), r.sym1, qm);
          add_trans(qm, r.sym2, b);
          for (size_t i = 0; i < eps_in_[qm].size(); ++i)
            add_trans(eps_in_[qm][i], r.sym2, b);
          break;
        }
      }
    }
  }

  const CompiledUnit& unit_;
  long long budget_;
  Pds pds_;

  std::map<Valuation, int> control_ids_;
  std::vector<Valuation> control_vals_;
  std::map<SymKey, int> symbol_ids_;
  std::vector<SymKey> symbols_;

  int num_astates_ = 1;  // state 0 is the accepting state
  std::vector<int> control_astate_;
  std::map<int, int> astate_control_;
  std::map<std::pair<int, int>, int> mid_ids_;

  std::set<std::tuple<int, int, int>> rel_;
  std::vector<std::vector<std::pair<int, int>>> rel_out_{{}};
  std::vector<std::vector<int>> eps_in_{{}};
  std::deque<std::tuple<int, int, int>> work_;

  std::set<std::pair<int, int>> expanded_;
  std::map<std::pair<int, int>, std::vector<Pds::Rule>> rules_by_;
};

}  // namespace detail

inline Pds build_ak(const Pmpds& p, int k, long long budget = 1000000000) {
  if (k < 1) throw std::invalid_argument("build_ak: k must be >= 1");
  AkPrediction pred = predict_ak(p, k);
  if (pred.locations > budget || pred.transitions > budget)
    throw std::length_error("build_ak: predicted " + std::to_string(pred.locations) +
                            " locations and " + std::to_string(pred.transitions) +
                            " transitions exceed budget " + std::to_string(budget));
  LazyOutput lazy = sequentialize_lazy(p.program, k);
  CompiledUnit unit = compile_seq(lazy.program);
  detail::AkBuilder builder(unit, budget);
  return builder.build();
}

// Exact reachability of control locations via forward post* saturation.
inline std::set<int> pds_reach(const Pds& p) {
  constexpr int kEps = -1;
  int num_astates = p.num_locations + 1;  // controls, then the accepting state
  const int fin = p.num_locations;
  auto mid_ids = std::map<std::pair<int, int>, int>{};
  std::map<std::pair<int, int>, std::vector<const Pds::Rule*>> rules_by;
  for (const auto& r : p.rules) rules_by[{r.from, r.sym}].push_back(&r);

  std::set<std::tuple<int, int, int>> rel;
  std::vector<std::vector<std::pair<int, int>>> rel_out(num_astates);
  std::vector<std::vector<int>> eps_in(num_astates);
  std::deque<std::tuple<int, int, int>> work;
  auto add = [&](int a, int sym, int b) {
    if (!rel.insert({a, sym, b}).second) return;
    rel_out[a].push_back({sym, b});
    if (sym == kEps) eps_in[b].push_back(a);
    work.push_back({a, sym, b});
  };
  auto mid = [&](int to, int sym1) {
    auto [it, fresh] = mid_ids.try_emplace({to, sym1}, 0);
    if (fresh) {
      it->second = num_astates++;
      rel_out.emplace_back();
      eps_in.emplace_back();
    }
    return it->second;
  };

  for (const auto& [loc, sym] : p.start) add(loc, sym, fin);
  while (!work.empty()) {
    auto [a, sym, b] = work.front();
    work.pop_front();
    if (sym == kEps) {
      for (size_t i = 0; i < rel_out[b].size(); ++i) {
        auto [s2, b2] = rel_out[b][i];
        add(a, s2, b2);
      }
      continue;
    }
    if (a >= p.num_locations) continue;  // rules fire from control sources only
    auto it = rules_by.find({a, sym});
    if (it == rules_by.end()) continue;
    for (const Pds::Rule* r : it->second) {
      switch (r->kind) {
        case Pds::RuleKind::Internal:
          add(r->to, r->sym1, b);
          break;
        case Pds::RuleKind::Pop:
          add(r->to, kEps, b);
          break;
        case Pds::RuleKind::Push: {
          int qm = mid(r->to, r->sym1);
          add(r->to, r->sym1, qm);
          add(qm, r->sym2, b);
          for (size_t i = 0; i < eps_in[qm].size(); ++i) add(eps_in[qm][i], r->sym2, b);
          break;
        }
      }
    }
  }

  // a location is reachable iff it accepts some stack content: any path
  // (possibly all-epsilon) to the accepting state
  std::vector<std::vector<int>> radj(num_astates);
  for (const auto& [a, sym, b] : rel) radj[b].push_back(a);
  std::vector<char> seen(num_astates, 0);
  std::deque<int> bfs{fin};
  seen[fin] = 1;
  while (!bfs.empty()) {
    int x = bfs.front();
    bfs.pop_front();
    for (int y : radj[x])
      if (!seen[y]) {
        seen[y] = 1;
        bfs.push_back(y);
      }
  }
  std::set<int> out;
  for (int c = 0; c < p.num_locations; ++c)
    if (seen[c]) out.insert(c);
  return out;
}

inline bool pds_hits_target(const Pds& p) {
  auto reach = pds_reach(p);
  for (int t : p.targets)
    if (reach.count(t)) return true;
  return false;
}

}  // namespace liseq

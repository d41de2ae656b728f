#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "liseq/check.hpp"
#include "liseq/normalize.hpp"
#include "liseq/param_oracle.hpp"
#include "liseq/parser.hpp"
#include "liseq/seq_explorer.hpp"
#include "liseq/seq_lazy.hpp"

using namespace liseq;
using liseq::detail::Frame;
using liseq::detail::resolve_jumps;

namespace {

SeqProgram parse_seq_ok(const std::string& src) {
  auto r = parse_seq(src);
  INFO(r.diags.render("<test>"));
  REQUIRE(r.program.has_value());
  return std::move(*r.program);
}

ParamProgram parse_param_ok(const std::string& src) {
  auto r = parse_param(src);
  INFO(r.diags.render("<test>"));
  REQUIRE(r.program.has_value());
  return std::move(*r.program);
}

// identity instrumentation: record a localized state at every statement,
// expose the globals as the "shared" projection
Instrumentation identity_instr(const SeqProgram& p) {
  Instrumentation in;
  for (int pc : all_pcs(p)) in.stmt_map[pc] = pc;
  for (const auto& g : p.globals) in.shared_vars.push_back(g.name);
  return in;
}

// Reference interpreter: plain recursive depth-first enumeration, written
// independently of the worklist explorer, for the self-check oracle.
struct RefReport {
  std::set<LocalizedState> reachable;
  std::set<LocalizedState> violations;
  std::set<RuntimeError> errors;
  std::set<Valuation> finals;
};

class RefDfs {
 public:
  explicit RefDfs(const CompiledUnit& unit) : unit_(unit) {}

  RefReport run() {
    Frame f;
    f.proc = unit_.main_index;
    f.ip = 0;
    f.locals = initial_valuation(unit_.procs[f.proc].locals);
    resolve_jumps(unit_.procs[f.proc], f.ip);
    State s{initial_valuation(unit_.globals), {f}};
    visit(s);
    return std::move(out_);
  }

 private:
  struct State {
    Valuation globals;
    std::vector<Frame> stack;
    auto operator<=>(const State&) const = default;
  };

  LocalizedState localized(const State& s, int pc) const {
    LocalizedState ls;
    ls.pc = pc;
    ls.frame = s.stack.back().locals;
    ls.shared = s.globals;
    return ls;
  }

  void advance(State s, int ip) {
    Frame& f = s.stack.back();
    f.ip = ip;
    resolve_jumps(unit_.procs[f.proc], f.ip);
    visit(s);
  }

  void ret(State s) {
    State popped = s;
    popped.stack.pop_back();
    if (popped.stack.empty()) {
      out_.finals.insert(s.globals);
      return;
    }
    Frame& caller = popped.stack.back();
    caller.ip += 1;
    resolve_jumps(unit_.procs[caller.proc], caller.ip);
    visit(popped);
  }

  void visit(const State& s) {
    if (!seen_.insert(s).second) return;
    REQUIRE(seen_.size() <= 20000);  // self-check stays at desk scale
    const Frame& fr = s.stack.back();
    const CompiledProc& proc = unit_.procs[fr.proc];
    if (fr.ip >= (int)proc.code.size()) {
      ret(s);
      return;
    }
    const Instr& ins = proc.code[fr.ip];
    if (ins.src_pc >= 0) out_.reachable.insert(localized(s, ins.src_pc));
    EvalResult r;
    if (ins.has_expr) r = eval_expr(ins.expr, nullptr, &s.globals, &fr.locals);
    if (r.div_zero) out_.errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
    switch (ins.op) {
      case IOp::Nop:
      case IOp::AtomicBegin:
      case IOp::AtomicEnd:
        advance(s, fr.ip + 1);
        break;
      case IOp::Jump:
        advance(s, ins.target);
        break;
      case IOp::Assign:
        for (auto v : r.values) {
          const VarInfo& vi = ins.lhs.scope == VarScope::Local ? proc.locals[ins.lhs.index]
                                                               : unit_.globals[ins.lhs.index];
          if (!vi.type.contains(v)) {
            out_.errors.insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
            continue;
          }
          State nxt = s;
          (ins.lhs.scope == VarScope::Local ? nxt.stack.back().locals[ins.lhs.index]
                                            : nxt.globals[ins.lhs.index]) = v;
          advance(std::move(nxt), fr.ip + 1);
        }
        break;
      case IOp::Assume:
        for (auto v : r.values)
          if (v) advance(s, fr.ip + 1);
        break;
      case IOp::Assert:
        for (auto v : r.values) {
          if (v)
            advance(s, fr.ip + 1);
          else
            out_.violations.insert(localized(s, ins.src_pc));
        }
        break;
      case IOp::Branch:
        for (auto v : r.values) advance(s, v ? fr.ip + 1 : ins.target);
        break;
      case IOp::Return:
        ret(s);
        break;
      case IOp::Call: {
        const CompiledProc& callee = unit_.procs[ins.callee];
        std::vector<Valuation> tuples{{}};
        for (size_t ai = 0; ai < ins.args.size(); ++ai) {
          EvalResult ar = eval_expr(ins.args[ai], nullptr, &s.globals, &fr.locals);
          if (ar.div_zero) out_.errors.insert({RuntimeErrorKind::DivZero, ins.src_pc});
          std::vector<Valuation> next;
          for (const auto& pre : tuples)
            for (auto v : ar.values) {
              if (!callee.locals[ai].type.contains(v)) {
                out_.errors.insert({RuntimeErrorKind::RangeOverflow, ins.src_pc});
                continue;
              }
              Valuation t = pre;
              t.push_back(v);
              next.push_back(std::move(t));
            }
          tuples = std::move(next);
        }
        for (const auto& args : tuples) {
          State nxt = s;
          Frame f;
          f.proc = ins.callee;
          f.ip = 0;
          f.locals = initial_valuation(callee.locals);
          for (size_t ai = 0; ai < args.size(); ++ai) f.locals[ai] = args[ai];
          resolve_jumps(callee, f.ip);
          nxt.stack.push_back(std::move(f));
          visit(nxt);
        }
        break;
      }
    }
  }

  const CompiledUnit& unit_;
  RefReport out_;
  std::set<State> seen_;
};

void check_against_dfs(const std::string& src) {
  SeqProgram p = parse_seq_ok(src);
  Instrumentation in = identity_instr(p);
  ExplorerReport rep = explore_seq(p, in);
  INFO(src);
  REQUIRE(!rep.truncated.any());
  RefReport ref = RefDfs(compile_seq(p)).run();
  CHECK(rep.reachable == ref.reachable);
  CHECK(rep.violations == ref.violations);
  CHECK(rep.runtime_errors == ref.errors);
  CHECK(rep.final_shared == ref.finals);
}

}  // namespace

TEST_CASE("single failing assert yields one violation") {
  SeqProgram p = parse_seq_ok(R"(
void main() begin
  assert(F);
end
)");
  int pc = p.procs[0].body[0].pc;
  ExplorerReport rep = explore_seq(p, Instrumentation{});
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations.begin()->pc == pc);
  CHECK(rep.reachable.empty());  // nothing instrumented
  CHECK(!rep.truncated.any());
}

TEST_CASE("agrees with a reference depth-first enumeration") {
  SECTION("counter loop") {
    check_against_dfs(R"(
int[0,7] x := 0;
void main() begin
  while (x < 7) do
    x := x + 1;
  od
end
)");
  }
  SECTION("nondet branching with calls") {
    check_against_dfs(R"(
bool a, b;
void flip() begin
  a := !a;
end
void main() begin
  while (*) do
    call flip();
    if (*) then
      b := !b;
    fi
  od
end
)");
  }
  SECTION("violations and runtime errors") {
    check_against_dfs(R"(
int[0,3] x := 2, y := 0;
void main() begin
  if (*) then
    assert(x == 0);
  fi
  x := x + 3;
  x := x / y;
end
)");
  }
  SECTION("bounded recursion with parameters") {
    check_against_dfs(R"(
int[0,3] d := 0;
void rec(int[0,3] n) begin
  if (n < 3) then
    call rec(n + 1);
  fi
  d := n;
end
void main() begin
  call rec(0);
end
)");
  }
}

TEST_CASE("reports are deterministic across runs") {
  ParamProgram normalized = normalize(parse_param_ok(R"(
bool b;
int[0,3] x := 0;
init:
  b := F;
process P:
  main() begin
    if (b) then
      x := 1;
    fi
    assert(x == 0);
  end
process Q:
  main() begin
    b := T;
  end
)"));
  LazyOutput lazy = sequentialize_lazy(normalized, 2);
  ExplorerReport a = explore_seq(lazy.program, lazy.instr);
  ExplorerReport b = explore_seq(lazy.program, lazy.instr);
  CHECK(a.reachable == b.reachable);
  CHECK(a.violations == b.violations);
  CHECK(a.runtime_errors == b.runtime_errors);
  CHECK(a.entered == b.entered);
  CHECK(a.completed == b.completed);
  CHECK(a.final_shared == b.final_shared);
  CHECK(a.state_count == b.state_count);
}

TEST_CASE("raising the driver depth bound never loses states") {
  ParamProgram normalized = normalize(parse_param_ok(R"(
int[0,3] x := 0;
init:
  x := 0;
process P:
  main() begin
    x := x + 1;
  end
)"));
  LazyOutput lazy = sequentialize_lazy(normalized, 2);
  std::set<LocalizedState> prev;
  for (int depth = 1; depth <= 4; ++depth) {
    SeqBounds sb;
    sb.max_linear_depth = depth;
    ExplorerReport rep = explore_seq(lazy.program, lazy.instr, sb);
    for (const auto& ls : prev) CHECK(rep.reachable.count(ls) == 1);
    prev = rep.reachable;
  }
  // more simulated threads reach strictly more here: each one bumps x
  SeqBounds one, three;
  one.max_linear_depth = 1;
  three.max_linear_depth = 3;
  CHECK(explore_seq(lazy.program, lazy.instr, one).reachable.size() <
        explore_seq(lazy.program, lazy.instr, three).reachable.size());
}

TEST_CASE("truncation flags identify the saturated mechanism") {
  SECTION("user recursion exhausts the stack bound") {
    SeqProgram p = parse_seq_ok(R"(
void r() begin
  call r();
end
void main() begin
  call r();
end
)");
    ExplorerReport rep = explore_seq(p, Instrumentation{});
    CHECK(rep.truncated.stack_depth);
    CHECK(!rep.truncated.states);
  }
  SECTION("state budget") {
    SeqProgram p = parse_seq_ok(R"(
int[0,7] x := 0;
void main() begin
  while (x < 7) do
    x := x + 1;
  od
end
)");
    SeqBounds sb;
    sb.max_states = 3;
    ExplorerReport rep = explore_seq(p, Instrumentation{}, sb);
    CHECK(rep.truncated.states);
    CHECK(!rep.truncated.stack_depth);
  }
}

TEST_CASE("final shared states equal the oracle's last-round values") {
  ParamProgram normalized = normalize(parse_param_ok(R"(
int[0,3] x := 0;
init:
  x := 0;
process P:
  main() begin
    x := x + 1;
  end
)"));
  int k = 3, m = 2;
  LazyOutput lazy = sequentialize_lazy(normalized, k);
  SeqBounds sb;
  sb.max_linear_depth = m;
  ExplorerReport rep = explore_seq(lazy.program, lazy.instr, sb);
  REQUIRE(!rep.truncated.any());

  ExplorationBounds ob;
  ob.k = k;
  ob.max_threads = m;
  std::set<Valuation> vk;
  for (const auto& li : observed_interfaces(compile_param(normalized), ob))
    vk.insert(li.v.back());
  CHECK(rep.final_shared == vk);
}

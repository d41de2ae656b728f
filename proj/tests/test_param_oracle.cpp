#include <catch2/catch_amalgamated.hpp>

#include "liseq/param_oracle.hpp"
#include "liseq/parser.hpp"

using namespace liseq;

namespace {

ParamProgram parse_ok(const std::string& src, ParseOptions opts = {}) {
  auto r = parse_param(src, opts);
  INFO(r.diags.render("<test>"));
  REQUIRE(r.program.has_value());
  return std::move(*r.program);
}

const char* kFig2 = R"(
bool blocked := T;
int[0,15] x := 0, y := 0;

process P1:
  main() begin
    while (blocked) do skip; od
    assert(y != 0);
    x := x / y;
  end

process P2:
  main() begin
    x := 12;
    y := 2;
    blocked := F;
  end
)";

}  // namespace

TEST_CASE("spin loop with release: no violation, no division by zero") {
  ParamProgram p = parse_ok(kFig2);
  ExplorationBounds b;
  b.k = 2;
  b.max_threads = 2;
  OracleReport r = explore(p, b);
  CHECK(!r.truncated.any());
  CHECK(r.violations.empty());
  CHECK(r.runtime_errors.empty());

  // the assert runs on the released state blocked=F, x=12, y=2
  int assert_pc = p.processes[0].procs[0].body[1].pc;
  LocalizedState want;
  want.pc = assert_pc;
  want.shared = {0, 12, 2};
  CHECK(r.reachable.count(want) == 1);

  // reports are deterministic
  OracleReport r2 = explore(p, b);
  CHECK(r.reachable == r2.reachable);
  CHECK(r.violations == r2.violations);
  CHECK(r.state_count == r2.state_count);
}

TEST_CASE("rounds bound the increment count") {
  ParamProgram p = parse_ok(R"(
int[0,3] x := 0;
process P:
  main() begin
    while (*) do
      x := x + 1;
    od
  end
)");
  ExplorationBounds b;
  b.k = 3;
  b.max_threads = 1;
  OracleReport r = explore(p, b);
  CHECK(r.violations.empty());
  std::set<std::int64_t> xs;
  for (const auto& ls : r.reachable) xs.insert(ls.shared[0]);
  CHECK(xs == std::set<std::int64_t>{0, 1, 2, 3});
  // a fourth increment overflows int[0,3]; recorded, path pruned
  int inc_pc = p.processes[0].procs[0].body[0].body[0].pc;
  CHECK(r.runtime_errors.count({RuntimeErrorKind::RangeOverflow, inc_pc}) == 1);
}

TEST_CASE("exact localized-state set of a two-statement thread") {
  ParamProgram p = parse_ok(R"(
int[0,3] x := 0;
process P:
  int[0,3] c := 0;
  main() begin
    c := x + 1;
    x := c;
  end
)");
  ExplorationBounds b;
  b.k = 1;
  b.max_threads = 1;
  OracleReport r = explore(p, b);
  int pc1 = p.processes[0].procs[0].body[0].pc;
  int pc2 = p.processes[0].procs[0].body[1].pc;
  std::set<LocalizedState> want{
      {pc1, {0}, {0}},  // frame = process global c, shared = x
      {pc2, {1}, {0}},
  };
  CHECK(r.reachable == want);
}

TEST_CASE("arbitrary pre-init shared state") {
  // init assigns the flag: assertion holds
  ParamProgram with_init = parse_ok(R"(
bool f;
init:
  f := T;
process P:
  main() begin
    assert(f);
  end
)");
  ExplorationBounds b;
  b.k = 1;
  b.max_threads = 1;
  CHECK(explore(with_init, b).violations.empty());

  // without init the flag starts arbitrary: violation exists
  ParamProgram no_init = parse_ok(R"(
bool f;
process P:
  main() begin
    assert(f);
  end
)");
  CHECK(!explore(no_init, b).violations.empty());

  auto outs = init_outcomes(compile_param(with_init));
  CHECK(outs == std::set<Valuation>{{1}});
  auto outs2 = init_outcomes(compile_param(no_init));
  CHECK(outs2 == std::set<Valuation>{{0}, {1}});
}

TEST_CASE("assume prunes, assert records") {
  ParamProgram p = parse_ok(R"(
bool f;
process P:
  main() begin
    assume(F);
    assert(F);
  end
)");
  ExplorationBounds b;
  b.k = 1;
  OracleReport r = explore(p, b);
  CHECK(r.violations.empty());
  // only the assume itself was reached (once per arbitrary start value of f)
  REQUIRE(!r.reachable.empty());
  for (const auto& ls : r.reachable) CHECK(ls.pc == p.processes[0].procs[0].body[0].pc);
}

TEST_CASE("division by zero is an error outcome, not a successor") {
  ParamProgram p = parse_ok(R"(
int[0,3] x := 1, y := 0;
process P:
  main() begin
    x := x / y;
    x := 2;
  end
)");
  ExplorationBounds b;
  b.k = 1;
  OracleReport r = explore(p, b);
  int div_pc = p.processes[0].procs[0].body[0].pc;
  int next_pc = p.processes[0].procs[0].body[1].pc;
  CHECK(r.runtime_errors.count({RuntimeErrorKind::DivZero, div_pc}) == 1);
  for (const auto& ls : r.reachable) CHECK(ls.pc != next_pc);
  CHECK(r.violations.empty());
}

TEST_CASE("atomic blocks exclude interleavings") {
  const char* body = R"(
int[0,7] x := 0;
process P:
  main() begin
    %s
  end

process Q:
  main() begin
    assert(x == 0);
  end
)";
  auto make = [&](const char* stmts) {
    std::string src(body);
    src.replace(src.find("%s"), 2, stmts);
    return parse_ok(src);
  };
  ExplorationBounds b;
  b.k = 2;
  b.max_threads = 2;
  // the intermediate x=1 is invisible under atomic
  OracleReport atomic_r = explore(make("atomic begin x := x + 1; x := x - 1; end"), b);
  CHECK(atomic_r.violations.empty());
  // without atomic, Q can observe x=1
  OracleReport plain_r = explore(make("x := x + 1; x := x - 1;"), b);
  CHECK(!plain_r.violations.empty());
}

TEST_CASE("calls, returns, and recursion depth truncation") {
  ParamProgram p = parse_ok(R"(
int[0,7] n := 0;
process P:
  int[0,7] down(int[0,7] v) begin
    if (v > 0) then
      n := down(v - 1);
    fi
    return v;
  end
  main() begin
    n := down(3);
  end
)");
  ExplorationBounds b;
  b.k = 1;
  b.max_threads = 1;
  OracleReport r = explore(p, b);
  CHECK(!r.truncated.stack_depth);
  std::set<std::int64_t> ns;
  for (const auto& ls : r.reachable) ns.insert(ls.shared[0]);
  // unwinding stores 0,1,2 into n before each outer return executes; the
  // final n=3 has no following statement so it appears in no localized state
  CHECK(ns == std::set<std::int64_t>{0, 1, 2});

  b.max_stack_depth = 2;  // main + one call; recursion now truncates
  OracleReport tr = explore(p, b);
  CHECK(tr.truncated.stack_depth);
}

TEST_CASE("executions_conforming checks round boundary values") {
  ParamProgram p = parse_ok(R"(
bool b;
init:
  b := F;
process P:
  main() begin
    b := T;
  end
)");
  CompiledParam cp = compile_param(p);
  ExplorationBounds b1;
  b1.k = 1;
  b1.max_threads = 2;
  CHECK(executions_conforming(cp, {{{0}}, {{1}}}, b1));   // flip in round 1
  CHECK(executions_conforming(cp, {{{0}}, {{0}}}, b1));   // zero-step round
  CHECK(!executions_conforming(cp, {{{1}}, {{1}}}, b1));  // u1 not init-producible

  ExplorationBounds b2;
  b2.k = 2;
  b2.max_threads = 2;
  // wrapped: flip in round 1, idle in round 2
  CHECK(executions_conforming(cp, {{{0}, {1}}, {{1}, {1}}}, b2));
  // not wrapped: v1 != u2 can never be realized by an execution
  CHECK(!executions_conforming(cp, {{{0}, {0}}, {{1}, {0}}}, b2));
  // flip claimed in round 2 instead
  CHECK(executions_conforming(cp, {{{0}, {0}}, {{0}, {1}}}, b2));
}

TEST_CASE("observed interfaces are wrapped, initial, and complete") {
  ParamProgram p = parse_ok(R"(
bool b;
init:
  b := F;
process P:
  main() begin
    b := T;
  end
)");
  CompiledParam cp = compile_param(p);
  ExplorationBounds b;
  b.k = 2;
  b.max_threads = 2;
  auto obs = observed_interfaces(cp, b);
  auto init = init_outcomes(cp);
  for (const auto& li : obs) {
    REQUIRE(li.length() == 2);
    CHECK(li.v[0] == li.u[1]);          // wrapped
    CHECK(init.count(li.u[0]) == 1);    // initial
    bool trunc = false;
    CHECK(executions_conforming(cp, li, b, &trunc));  // self-witness
  }
  // the flip can happen in round 1 or round 2, or never
  CHECK(obs.count({{{0}, {1}}, {{1}, {1}}}) == 1);
  CHECK(obs.count({{{0}, {0}}, {{0}, {1}}}) == 1);
  CHECK(obs.count({{{0}, {0}}, {{0}, {0}}}) == 1);
}

TEST_CASE("segment step budget truncation") {
  ParamProgram p = parse_ok(R"(
int[0,7] x := 0;
process P:
  int[0,7] spin := 0;
  main() begin
    while (x < 6) do
      x := x + 1;
    od
  end
)");
  ExplorationBounds b;
  b.k = 1;
  b.max_threads = 1;
  b.max_segment_steps = 3;
  OracleReport r = explore(p, b);
  CHECK(r.truncated.segment_steps);
  ExplorationBounds wide = b;
  wide.max_segment_steps = 4096;
  CHECK(!explore(p, wide).truncated.segment_steps);
}

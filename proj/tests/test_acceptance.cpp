#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "liseq/interfaces.hpp"
#include "liseq/normalize.hpp"
#include "liseq/param_oracle.hpp"
#include "liseq/parser.hpp"
#include "liseq/pmpds.hpp"
#include "liseq/printer.hpp"
#include "liseq/report.hpp"
#include "liseq/seq_eager.hpp"
#include "liseq/seq_explorer.hpp"
#include "liseq/seq_lazy.hpp"
#include "support/randprog.hpp"

namespace fs = std::filesystem;
using namespace liseq;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict_line(int n, const std::string& what, bool ok) {
  std::cout << "criterion " << n << " (" << what << "): " << (ok ? "pass" : "FAIL") << std::endl;
  CHECK(ok);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CorpusEntry {
  fs::path path;
  std::string name;
  nlohmann::json expect;
  ParamProgram normalized;
  bool small = false;       // flagged for the pushdown backend (|S| <= 16)
  bool wide_range = false;  // int ranges beyond [0,7]
};

ParamProgram parse_ok(const std::string& src) {
  auto r = parse_param(src);
  INFO(r.diags.render("<corpus>"));
  REQUIRE(r.program.has_value());
  return std::move(*r.program);
}

std::vector<CorpusEntry>& corpus() {
  static std::vector<CorpusEntry> entries = [] {
    std::vector<CorpusEntry> out;
    for (const auto& e : fs::directory_iterator(LISEQ_CORPUS_DIR)) {
      if (e.path().extension() != ".pp") continue;
      CorpusEntry c;
      c.path = e.path();
      c.name = e.path().filename().string();
      fs::path side = e.path();
      side.replace_extension(".expected.json");
      REQUIRE(fs::exists(side));
      c.expect = nlohmann::json::parse(read_file(side));
      ParamProgram p = parse_ok(read_file(e.path()));
      for (const auto& d : p.shared)
        if (!d.type.is_bool && d.type.hi - d.type.lo > 7) c.wide_range = true;
      c.normalized = normalize(std::move(p));
      c.small = c.expect.value("pds", false);
      out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(),
              [](const CorpusEntry& a, const CorpusEntry& b) { return a.name < b.name; });
    return out;
  }();
  return entries;
}

std::set<int> validated_pcs(const ExplorerReport& rep, const Instrumentation& in) {
  std::set<int> originals, out;
  for (const auto& [gen, orig] : in.validated_map) originals.insert(orig);
  for (const auto& v : rep.violations)
    if (originals.count(v.pc)) out.insert(v.pc);
  return out;
}

const char* kFig2NoAssert = R"(
bool blocked := T;
int[0,15] x := 0, y := 0;

process P1:
  main() begin
    while (blocked) do skip; od
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

TEST_CASE("criterion 1: figure-2 separation") {
  auto t0 = Clock::now();
  ParamProgram fig2;
  for (const auto& c : corpus())
    if (c.name == "fig2.pp") fig2 = c.normalized;
  REQUIRE(!fig2.processes.empty());
  int k = 2, m = 2;

  ExplorationBounds ob;
  ob.k = k;
  ob.max_threads = m;
  OracleReport oracle = explore(fig2, ob);
  bool oracle_clean =
      !oracle.truncated.any() && oracle.violations.empty() && oracle.runtime_errors.empty();

  LazyOutput lazy = sequentialize_lazy(fig2, k);
  SeqBounds lb;
  lb.max_linear_depth = m;
  ExplorerReport lrep = explore_seq(lazy.program, lazy.instr, lb);
  bool lazy_clean = !lrep.truncated.any() && lrep.violations.empty() && lrep.runtime_errors.empty();

  // eager: a speculative violation of the y != 0 assert surfaces quickly
  EagerOutput eager = sequentialize_eager(fig2, k);
  SeqBounds eb;
  eb.max_linear_depth = m;
  eb.stop_on_violation = true;
  ExplorerReport erep = explore_seq(eager.program, eager.instr, eb);
  // fig2 has a single assert, so any non-validated violation is a
  // speculative violation of exactly that assert
  bool eager_speculates = !erep.violations.empty();
  bool nothing_validated = validated_pcs(erep, eager.instr).empty();

  // with the assert removed the eager program divides by a guessed zero
  ParamProgram noassert = normalize(parse_ok(kFig2NoAssert));
  EagerOutput eager2 = sequentialize_eager(noassert, k);
  SeqBounds eb2;
  eb2.max_linear_depth = m;
  eb2.max_states = 200000;  // an early speculative prefix suffices
  ExplorerReport erep2 = explore_seq(eager2.program, eager2.instr, eb2);
  bool eager_div_zero = false;
  for (const auto& e : erep2.runtime_errors)
    if (e.kind == RuntimeErrorKind::DivZero) eager_div_zero = true;
  // the ground truth has no division by zero at all
  OracleReport oracle2 = explore(noassert, ob);
  bool div_zero_speculative = oracle2.runtime_errors.empty() && !oracle2.truncated.any();

  double secs = seconds_since(t0);
  verdict_line(1, "figure-2 separation",
               oracle_clean && lazy_clean && eager_speculates && nothing_validated &&
                   eager_div_zero && div_zero_speculative && secs < 10.0);
  std::cout << "  (" << secs << " s)\n";
}

namespace {

struct SweepResult {
  int programs = 0;
  int instances = 0;
  int untruncated = 0;
  bool verdicts_agree = true;
  bool lazy_subset = true;
  double secs = 0;
};

SweepResult& sweep() {
  static SweepResult r = [] {
    SweepResult out;
    auto t0 = Clock::now();
    for (const auto& c : corpus()) {
      if (c.wide_range) continue;  // the sweep corpus stays within int[0,7]
      ++out.programs;
      for (int k : {1, 2, 3}) {
        ++out.instances;
        ExplorationBounds ob;
        ob.k = k;
        ob.max_threads = 3;
        OracleReport oracle = explore(c.normalized, ob);
        LazyOutput lazy = sequentialize_lazy(c.normalized, k);
        SeqBounds sb;
        sb.max_linear_depth = 3;
        ExplorerReport rep = explore_seq(lazy.program, lazy.instr, sb);
        if (oracle.truncated.any() || rep.truncated.any()) continue;
        ++out.untruncated;
        if (rep.has_violation() != !oracle.violations.empty()) out.verdicts_agree = false;
        for (const auto& ls : rep.reachable)
          if (!oracle.reachable.count(ls)) out.lazy_subset = false;
      }
    }
    out.secs = seconds_since(t0);
    return out;
  }();
  return r;
}

}  // namespace

TEST_CASE("criterion 2: equivalence of violation verdicts over the corpus") {
  const SweepResult& r = sweep();
  INFO("programs=" << r.programs << " instances=" << r.instances
                   << " untruncated=" << r.untruncated << " secs=" << r.secs);
  verdict_line(2, "verdict equivalence on corpus",
               r.programs >= 20 && r.verdicts_agree && r.untruncated * 2 >= r.instances &&
                   r.secs < 300.0);
  std::cout << "  (" << r.programs << " programs, " << r.untruncated << "/" << r.instances
            << " untruncated instances, " << r.secs << " s)\n";
}

TEST_CASE("criterion 3: laziness") {
  // lazy stays inside the truth on the whole sweep ...
  const SweepResult& r = sweep();

  // ... while eager on figure 2 visits states the oracle never reaches
  ParamProgram fig2;
  for (const auto& c : corpus())
    if (c.name == "fig2.pp") fig2 = c.normalized;
  int k = 2, m = 2;
  ExplorationBounds ob;
  ob.k = k;
  ob.max_threads = m;
  OracleReport oracle = explore(fig2, ob);
  EagerOutput eager = sequentialize_eager(fig2, k);
  SeqBounds eb;
  eb.max_linear_depth = m;
  eb.max_states = 200000;  // a truncated prefix already exhibits the gap
  ExplorerReport erep = explore_seq(eager.program, eager.instr, eb);
  bool gap = false;
  for (const auto& ls : erep.reachable)
    if (!oracle.reachable.count(ls)) gap = true;

  verdict_line(3, "laziness", r.lazy_subset && gap);
}

TEST_CASE("criterion 4: linear_int records validate as interfaces") {
  size_t records = 0;
  bool all_valid = true;
  for (const auto& c : corpus()) {
    if (c.wide_range) continue;
    CompiledParam cp = compile_param(c.normalized);
    for (int k : {1, 2}) {
      int m = 2;
      LazyOutput lazy = sequentialize_lazy(c.normalized, k);
      SeqBounds sb;
      sb.max_linear_depth = m;
      ExplorerReport rep = explore_seq(lazy.program, lazy.instr, sb);
      ExplorationBounds ib;
      ib.k = k;
      ib.max_threads = m;
      InterfaceOracle io(cp, ib);
      for (const auto& a : rep.completed) {
        LinearInterface li;
        for (int i = 0; i < a.bound; ++i) li.u.push_back(a.u[i]);
        for (int i = 0; i + 1 < a.bound; ++i) li.v.push_back(a.vguess[i]);
        li.v.push_back(a.shared);
        ++records;
        if (!io.check_interface(li).has_value()) {
          all_valid = false;
          UNSCOPED_INFO(c.name << " k=" << k << " bound=" << a.bound);
        }
      }
    }
  }
  verdict_line(4, "linear_int records are linear interfaces", records > 0 && all_valid);
  std::cout << "  (" << records << " records)\n";
}

TEST_CASE("criterion 5: executions versus wrapped initial interfaces") {
  bool fwd_ok = true;   // execution -> enumerated interface, all corpus programs
  bool back_ok = true;  // wrapped initial interface -> conforming execution, small domains
  for (const auto& c : corpus()) {
    if (c.wide_range) continue;
    CompiledParam cp = compile_param(c.normalized);
    for (int k : {1, 2}) {
      ExplorationBounds b;
      b.k = k;
      b.max_threads = 2;
      InterfaceOracle io(cp, b);
      auto observed = observed_interfaces(cp, b);
      for (const auto& li : observed)
        if (!is_wrapped(li) || !is_initial(li, cp) || !io.check_interface(li).has_value()) {
          fwd_ok = false;
          UNSCOPED_INFO("forward: " << c.name << " k=" << k);
        }
      if (!c.small) continue;  // the converse enumerates the shared tuple space
      for (const auto& li : io.enumerate_interfaces(k)) {
        if (!is_wrapped(li) || !is_initial(li, cp)) continue;
        bool trunc = false;
        if (!executions_conforming(cp, li, b, &trunc) && !trunc) {
          back_ok = false;
          UNSCOPED_INFO("backward: " << c.name << " k=" << k);
        }
      }
    }
  }
  verdict_line(5, "bounded Lemma-1 conformance", fwd_ok && back_ok);
}

TEST_CASE("criterion 6: pushdown triangle and size envelopes") {
  int programs = 0;
  bool verdicts_ok = true;
  double c_measured = 0;
  for (const auto& c : corpus()) {
    if (!c.small) continue;
    ++programs;
    Pmpds p = lower(c.normalized);
    for (int k : {1, 2}) {
      ExplorationBounds ob;
      ob.k = k;
      ob.max_threads = 3;
      OracleReport oracle = explore(c.normalized, ob);
      Pds ak = build_ak(p, k);
      if (pds_hits_target(ak) != !oracle.violations.empty()) {
        verdicts_ok = false;
        UNSCOPED_INFO(c.name << " k=" << k);
      }
      AkPrediction pred = predict_ak(p, k);
      c_measured = std::max(c_measured, (double)ak.num_locations / (double)pred.locations);
      c_measured = std::max(c_measured, (double)ak.rules.size() / (double)pred.transitions);
    }
  }
  verdict_line(6, "pushdown triangle and size envelopes",
               programs >= 5 && verdicts_ok && c_measured <= 64.0);
  std::cout << "  (" << programs << " programs, measured C = " << c_measured << ")\n";
}

TEST_CASE("criterion 7: round trips and byte-stable reports") {
  bool roundtrip_ok = true;
  for (const auto& c : corpus()) {
    ParamProgram p = parse_ok(read_file(c.path));
    std::string once = pretty_print(p);
    auto r = parse_param(once);
    if (!r.program || !equal_mod_pc(p, *r.program) || pretty_print(*r.program) != once)
      roundtrip_ok = false;
  }
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    randprog::Gen gen(seed);
    ParamProgram p = gen.param_program();
    std::string text = pretty_print(p);
    auto r = parse_param(text);
    if (!r.program || !equal_mod_pc(p, *r.program) || pretty_print(*r.program) != text)
      roundtrip_ok = false;
    SeqProgram q = gen.seq_program();
    std::string qtext = pretty_print(q);
    auto rq = parse_seq(qtext);
    if (!rq.program || !equal_mod_pc(q, *rq.program) || pretty_print(*rq.program) != qtext)
      roundtrip_ok = false;
  }

  // identical configurations must serialize to identical bytes
  bool stable = true;
  int checked = 0;
  for (const auto& c : corpus()) {
    if (!c.small || checked >= 5) continue;
    ++checked;
    ExplorationBounds ob;
    ob.k = 2;
    ob.max_threads = 2;
    std::string o1 = json_of(explore(c.normalized, ob)).dump(2);
    std::string o2 = json_of(explore(c.normalized, ob)).dump(2);
    LazyOutput lazy = sequentialize_lazy(c.normalized, 2);
    std::string e1 = json_of(explore_seq(lazy.program, lazy.instr)).dump(2);
    std::string e2 = json_of(explore_seq(lazy.program, lazy.instr)).dump(2);
    if (o1 != o2 || e1 != e2) stable = false;
  }
  verdict_line(7, "round-trip and determinism", roundtrip_ok && checked == 5 && stable);
}

// liseq: parse, transform, explore, and cross-check the toy concurrent
// language. One subcommand per pipeline stage; JSON for machine-readable
// output, plain tables on stdout.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "liseq/check.hpp"
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

namespace fs = std::filesystem;
using namespace liseq;

namespace {

// exit codes: 0 properties hold / plain success, 1 property mismatch,
// 2 usage or parse error, 3 inconclusive because a bound truncated
constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;
constexpr int kInconclusive = 3;

struct Fail {
  int code;
  std::string msg;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Fail{kUsage, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Fail{kUsage, "cannot write " + path};
  out << text;
}

struct Options {
  std::string input;
  int k = 2;
  int max_threads = 3;
  int max_steps = 4096;
  int max_depth = 8;
  long long max_states = 30000000;
  long long budget = 1000000000;
  std::string int_range;
  std::string json_path;
  std::string out_path;
  std::string map_path;
  bool with_pds = false;
  bool stats = false;
};

ParseOptions parse_opts(const Options& o) {
  ParseOptions po;
  if (!o.int_range.empty()) {
    long long lo, hi;
    if (std::sscanf(o.int_range.c_str(), "%lld:%lld", &lo, &hi) != 2 || lo > hi)
      throw Fail{kUsage, "bad --int-range, expected lo:hi"};
    po.default_int_lo = lo;
    po.default_int_hi = hi;
  }
  return po;
}

ParamProgram load_param(const Options& o) {
  auto r = parse_param(read_file(o.input), parse_opts(o));
  if (!r.program) throw Fail{kUsage, r.diags.render(o.input)};
  return std::move(*r.program);
}

SeqProgram load_seq(const Options& o) {
  auto r = parse_seq(read_file(o.input), parse_opts(o));
  if (!r.program) throw Fail{kUsage, r.diags.render(o.input)};
  return std::move(*r.program);
}

ExplorationBounds oracle_bounds(const Options& o) {
  ExplorationBounds b;
  b.k = o.k;
  b.max_threads = o.max_threads;
  b.max_segment_steps = o.max_steps;
  b.max_stack_depth = o.max_depth;
  return b;
}

SeqBounds seq_bounds(const Options& o) {
  SeqBounds b;
  b.max_stack_depth = o.max_depth;
  b.max_linear_depth = o.max_threads;
  b.max_states = (size_t)o.max_states;
  return b;
}

void emit_json(const Options& o, const Json& j) {
  std::string text = j.dump(2) + "\n";
  if (!o.json_path.empty())
    write_file(o.json_path, text);
  else
    std::cout << text;
}

std::set<int> validated_pcs(const ExplorerReport& rep, const Instrumentation& in) {
  std::set<int> originals, out;
  for (const auto& [gen, orig] : in.validated_map) originals.insert(orig);
  for (const auto& v : rep.violations)
    if (originals.count(v.pc)) out.insert(v.pc);
  return out;
}

std::set<int> violation_pcs(const OracleReport& r) {
  std::set<int> out;
  for (const auto& v : r.violations) out.insert(v.pc);
  return out;
}

int cmd_transform(const Options& o, bool lazy) {
  ParamProgram normalized = normalize(load_param(o));
  SeqProgram prog;
  Instrumentation instr;
  if (lazy) {
    LazyOutput out = sequentialize_lazy(normalized, o.k);
    prog = std::move(out.program);
    instr = std::move(out.instr);
  } else {
    EagerOutput out = sequentialize_eager(normalized, o.k);
    prog = std::move(out.program);
    instr = std::move(out.instr);
  }
  std::string text = pretty_print(prog);
  if (!o.out_path.empty())
    write_file(o.out_path, text);
  else
    std::cout << text;
  if (!o.map_path.empty()) write_file(o.map_path, json_of(instr).dump(2) + "\n");
  return kOk;
}

int cmd_run(const Options& o) {
  SeqProgram prog = load_seq(o);
  Instrumentation instr;
  if (!o.map_path.empty()) instr = instrumentation_from_json(Json::parse(read_file(o.map_path)));
  ExplorerReport rep = explore_seq(prog, instr, seq_bounds(o));
  emit_json(o, json_of(rep));
  return rep.truncated.any() ? kInconclusive : kOk;
}

int cmd_oracle(const Options& o) {
  ParamProgram normalized = normalize(load_param(o));
  OracleReport rep = explore(normalized, oracle_bounds(o));
  emit_json(o, json_of(rep));
  return rep.truncated.any() ? kInconclusive : kOk;
}

int cmd_interfaces(const Options& o) {
  ParamProgram normalized = normalize(load_param(o));
  auto ifs = observed_interfaces(compile_param(normalized), oracle_bounds(o));
  emit_json(o, json_list(ifs));
  return kOk;
}

int cmd_pds(const Options& o) {
  ParamProgram normalized = normalize(load_param(o));
  Pmpds p = lower(normalized, o.budget);
  AkPrediction pred = predict_ak(p, o.k);
  Json j = json_of(p);
  j["k"] = o.k;
  j["predicted"] = Json{{"locations", pred.locations}, {"transitions", pred.transitions}};
  try {
    Pds ak = build_ak(p, o.k, o.budget);
    j["locations"] = ak.num_locations;
    j["transitions"] = ak.rules.size();
    j["symbols"] = ak.num_symbols;
    j["violation_reachable"] = pds_hits_target(ak);
  } catch (const std::length_error& e) {
    j["refused"] = e.what();
    emit_json(o, j);
    return kInconclusive;
  }
  if (o.stats)
    std::cout << "locations=" << j["locations"] << " transitions=" << j["transitions"]
              << " violation=" << (j["violation_reachable"].get<bool>() ? "reachable" : "unreachable")
              << "\n";
  emit_json(o, j);
  return kOk;
}

int cmd_compare(const Options& o) {
  ParamProgram normalized = normalize(load_param(o));

  OracleReport oracle = explore(normalized, oracle_bounds(o));
  bool oracle_violation = !oracle.violations.empty();

  LazyOutput lazy = sequentialize_lazy(normalized, o.k);
  ExplorerReport lrep = explore_seq(lazy.program, lazy.instr, seq_bounds(o));

  EagerOutput eager = sequentialize_eager(normalized, o.k);
  // the eager run only demonstrates the speculation gap; its state space
  // can dwarf the truth, so keep it on a tight budget
  SeqBounds eb = seq_bounds(o);
  eb.max_states = std::min(eb.max_states, (size_t)200000);
  ExplorerReport erep = explore_seq(eager.program, eager.instr, eb);

  bool inconclusive = oracle.truncated.any() || lrep.truncated.any();
  bool equivalent = lrep.reachable == oracle.reachable && lrep.violations == oracle.violations &&
                    lrep.runtime_errors == oracle.runtime_errors;
  bool lazy_subset = true;
  for (const auto& ls : lrep.reachable)
    if (!oracle.reachable.count(ls)) lazy_subset = false;
  bool eager_gap = false;
  for (const auto& ls : erep.reachable)
    if (!oracle.reachable.count(ls)) eager_gap = true;
  std::set<int> eager_verdict = validated_pcs(erep, eager.instr);
  bool eager_matches = erep.truncated.any() || eager_verdict == violation_pcs(oracle);
  bool eager_speculative = erep.violations.size() > eager_verdict.size();

  Json j;
  j["k"] = o.k;
  j["max_threads"] = o.max_threads;
  j["oracle"] = Json{{"violation", oracle_violation},
                     {"reachable", oracle.reachable.size()},
                     {"truncated", oracle.truncated.any()}};
  j["lazy"] = Json{{"violation", lrep.has_violation()},
                   {"reachable", lrep.reachable.size()},
                   {"equivalent", equivalent},
                   {"subset_of_oracle", lazy_subset},
                   {"truncated", lrep.truncated.any()}};
  j["eager"] = Json{{"validated_violation", !eager_verdict.empty()},
                    {"speculative_violation", eager_speculative},
                    {"verdict_matches", eager_matches},
                    {"laziness_gap", eager_gap},
                    {"truncated", erep.truncated.any()}};

  bool pds_checked = false, pds_matches = true;
  if (o.with_pds) {
    try {
      Pmpds p = lower(normalized, o.budget);
      Pds ak = build_ak(p, o.k, o.budget);
      bool v = pds_hits_target(ak);
      pds_checked = true;
      pds_matches = v == oracle_violation;
      j["pds"] = Json{{"violation", v}, {"matches_oracle", pds_matches}};
    } catch (const std::length_error& e) {
      j["pds"] = Json{{"refused", e.what()}};
    }
  }

  auto verdict = [](bool b) { return b ? "violation" : "no-violation"; };
  std::cout << "oracle=" << verdict(oracle_violation) << " lazy=" << verdict(lrep.has_violation())
            << " eager="
            << (!eager_verdict.empty()
                    ? "validated-violation"
                    : (eager_speculative ? "speculative-violation" : "no-violation"))
            << " laziness-gap=" << (eager_gap ? "present" : "absent");
  if (pds_checked) std::cout << " pds=" << verdict(j["pds"]["violation"].get<bool>());
  std::cout << "\n";

  bool ok = equivalent && lazy_subset && eager_matches && pds_matches;
  j["ok"] = ok;
  j["inconclusive"] = inconclusive;
  if (!o.json_path.empty()) write_file(o.json_path, j.dump(2) + "\n");
  if (inconclusive) return kInconclusive;
  return ok ? kOk : kMismatch;
}

int cmd_corpus(const Options& o) {
  std::string dir = o.input;
  if (dir.empty()) {
    const char* env = std::getenv("LISEQ_CORPUS");
    dir = env ? env : "corpus";
  }
  std::vector<fs::path> programs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".pp") programs.push_back(e.path());
  std::sort(programs.begin(), programs.end());
  if (programs.empty()) throw Fail{kUsage, "no .pp programs under " + dir};

  int mismatches = 0, truncations = 0;
  Json results = Json::object();
  for (const auto& path : programs) {
    fs::path sidecar = path;
    sidecar.replace_extension(".expected.json");
    if (!fs::exists(sidecar)) {
      std::cout << path.filename().string() << ": no expectations, skipped\n";
      continue;
    }
    Json expect = Json::parse(read_file(sidecar.string()));
    Options po = o;
    po.input = path.string();
    po.max_threads = expect.value("max_threads", 3);
    ParamProgram normalized = normalize(load_param(po));
    Json row = Json::object();
    for (const auto& [ks, want] : expect.at("violation").items()) {
      po.k = std::stoi(ks);
      OracleReport oracle = explore(normalized, oracle_bounds(po));
      LazyOutput lazy = sequentialize_lazy(normalized, po.k);
      ExplorerReport rep = explore_seq(lazy.program, lazy.instr, seq_bounds(po));
      bool ov = !oracle.violations.empty();
      bool lv = rep.has_violation();
      bool trunc = oracle.truncated.any() || rep.truncated.any();
      bool ok = !trunc && ov == lv && ov == want.get<bool>();
      row[ks] = Json{{"oracle", ov}, {"lazy", lv}, {"expected", want}, {"truncated", trunc}};
      if (trunc)
        ++truncations;
      else if (!ok)
        ++mismatches;
      std::cout << path.filename().string() << " k=" << ks << ": oracle="
                << (ov ? "violation" : "none") << " lazy=" << (lv ? "violation" : "none")
                << " expected=" << (want.get<bool>() ? "violation" : "none")
                << (trunc ? " [truncated]" : ok ? " ok" : " MISMATCH") << "\n";
    }
    results[path.filename().string()] = row;
  }
  if (!o.json_path.empty()) write_file(o.json_path, results.dump(2) + "\n");
  if (mismatches) return kMismatch;
  if (truncations) return kInconclusive;
  return kOk;
}

void add_common(CLI::App* cmd, Options& o, bool needs_input = true) {
  if (needs_input) cmd->add_option("input", o.input, "input program")->required();
  cmd->add_option("-k", o.k, "rounds");
  cmd->add_option("--max-threads", o.max_threads, "thread-count bound m");
  cmd->add_option("--max-steps", o.max_steps, "steps per execution segment");
  cmd->add_option("--max-depth", o.max_depth, "call-stack depth per thread");
  cmd->add_option("--max-states", o.max_states, "explored-state budget");
  cmd->add_option("--budget", o.budget, "pushdown size budget");
  cmd->add_option("--int-range", o.int_range, "default range for bare int, as lo:hi");
  cmd->add_option("--json", o.json_path, "write the JSON report here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequentialization toolkit for round-bounded concurrent programs"};
  app.require_subcommand(1);
  Options o;

  CLI::App* lazy = app.add_subcommand("lazy", "emit the lazy sequentialization");
  add_common(lazy, o);
  lazy->add_option("-o", o.out_path, "output .sp file");
  lazy->add_option("--map", o.map_path, "write the instrumentation map here");

  CLI::App* eager = app.add_subcommand("eager", "emit the eager sequentialization");
  add_common(eager, o);
  eager->add_option("-o", o.out_path, "output .sp file");
  eager->add_option("--map", o.map_path, "write the instrumentation map here");

  CLI::App* run = app.add_subcommand("run", "explore a sequential program");
  add_common(run, o);
  run->add_option("--map", o.map_path, "instrumentation map from the transform step");

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force the parameterized program");
  add_common(oracle, o);

  CLI::App* interfaces = app.add_subcommand("interfaces", "wrapped initial linear interfaces");
  add_common(interfaces, o);

  CLI::App* pds = app.add_subcommand("pds", "pushdown construction and reachability");
  add_common(pds, o);
  pds->add_flag("--stats", o.stats, "print size counts");

  CLI::App* compare = app.add_subcommand("compare", "differential check of all pipelines");
  add_common(compare, o);
  compare->add_flag("--pds", o.with_pds, "also run the pushdown backend");

  CLI::App* corpus = app.add_subcommand("corpus", "regression sweep over the corpus");
  corpus->add_option("input", o.input, "corpus directory (default: $LISEQ_CORPUS or ./corpus)");
  corpus->add_option("--json", o.json_path, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (lazy->parsed()) return cmd_transform(o, true);
    if (eager->parsed()) return cmd_transform(o, false);
    if (run->parsed()) return cmd_run(o);
    if (oracle->parsed()) return cmd_oracle(o);
    if (interfaces->parsed()) return cmd_interfaces(o);
    if (pds->parsed()) return cmd_pds(o);
    if (compare->parsed()) return cmd_compare(o);
    if (corpus->parsed()) return cmd_corpus(o);
  } catch (const Fail& f) {
    std::cerr << f.msg << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

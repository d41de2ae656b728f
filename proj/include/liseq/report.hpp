#pragma once

#include <json.hpp>
#include <string>

#include "liseq/instrument.hpp"
#include "liseq/param_oracle.hpp"
#include "liseq/pmpds.hpp"
#include "liseq/seq_explorer.hpp"

namespace liseq {

// JSON views of the analysis results. nlohmann::json keeps object keys
// sorted and every container here is an ordered set, so dumps are
// byte-stable across runs.

using Json = nlohmann::json;

inline Json json_of(const Valuation& v) { return Json(v); }

inline Json json_of(const LocalizedState& ls) {
  return Json{{"pc", ls.pc}, {"frame", ls.frame}, {"shared", ls.shared}};
}

inline Json json_of(const RuntimeError& e) {
  return Json{{"kind", e.kind == RuntimeErrorKind::DivZero ? "div_zero" : "range_overflow"},
              {"pc", e.pc}};
}

inline Json json_of(const LinearInterface& li) {
  Json j;
  j["u"] = li.u;
  j["v"] = li.v;
  return j;
}

inline Json json_of(const ActivationRecord& a) {
  Json j;
  j["u"] = a.u;
  j["vguess"] = a.vguess;
  j["bound"] = a.bound;
  j["top_level"] = a.top_level;
  j["shared"] = a.shared;
  return j;
}

template <typename Set>
Json json_list(const Set& items) {
  Json arr = Json::array();
  for (const auto& it : items) arr.push_back(json_of(it));
  return arr;
}

inline Json json_of(const OracleReport& r) {
  Json j;
  j["reachable"] = json_list(r.reachable);
  j["violations"] = json_list(r.violations);
  j["runtime_errors"] = json_list(r.runtime_errors);
  j["truncated"] =
      Json{{"segment_steps", r.truncated.segment_steps}, {"stack_depth", r.truncated.stack_depth}};
  return j;
}

inline Json json_of(const ExplorerReport& r) {
  Json j;
  j["reachable"] = json_list(r.reachable);
  j["violations"] = json_list(r.violations);
  j["runtime_errors"] = json_list(r.runtime_errors);
  j["entered"] = json_list(r.entered);
  j["completed"] = json_list(r.completed);
  j["final_shared"] = Json(std::vector<Valuation>(r.final_shared.begin(), r.final_shared.end()));
  j["truncated"] = Json{{"stack_depth", r.truncated.stack_depth}, {"states", r.truncated.states}};
  j["state_count"] = r.state_count;
  return j;
}

inline Json json_of(const Instrumentation& in) {
  Json j;
  j["k"] = in.k;
  j["stmt_map"] = Json::object();
  for (const auto& [o, g] : in.stmt_map) j["stmt_map"][std::to_string(o)] = g;
  j["shared_vars"] = in.shared_vars;
  j["global_vars"] = in.global_vars;
  j["linear_int"] = in.linear_int;
  j["q_params"] = in.q_params;
  j["qp_params"] = in.qp_params;
  j["bound_param"] = in.bound_param;
  j["validated_map"] = Json::object();
  for (const auto& [g, o] : in.validated_map) j["validated_map"][std::to_string(g)] = o;
  return j;
}

inline Instrumentation instrumentation_from_json(const Json& j) {
  Instrumentation in;
  in.k = j.value("k", 0);
  for (const auto& [key, val] : j.at("stmt_map").items())
    in.stmt_map[std::stoi(key)] = val.get<int>();
  in.shared_vars = j.value("shared_vars", std::vector<std::string>{});
  in.global_vars = j.value("global_vars", std::vector<std::string>{});
  in.linear_int = j.value("linear_int", std::string{});
  if (j.contains("q_params")) in.q_params = j["q_params"].get<std::vector<std::vector<std::string>>>();
  if (j.contains("qp_params"))
    in.qp_params = j["qp_params"].get<std::vector<std::vector<std::string>>>();
  in.bound_param = j.value("bound_param", std::string{});
  if (j.contains("validated_map"))
    for (const auto& [key, val] : j["validated_map"].items())
      in.validated_map[std::stoi(key)] = val.get<int>();
  return in;
}

inline Json json_of(const Pmpds& p) {
  Json j;
  j["num_shared"] = p.num_shared;
  j["num_initial"] = p.initial.size();
  j["ell"] = p.ell;
  j["d"] = p.d;
  Json comps = Json::array();
  for (const auto& c : p.components)
    comps.push_back(Json{{"name", c.name},
                         {"num_locals", c.num_locals},
                         {"transitions", c.transitions},
                         {"internal", c.internal},
                         {"pushes", c.pushes},
                         {"pops", c.pops}});
  j["components"] = comps;
  return j;
}

}  // namespace liseq

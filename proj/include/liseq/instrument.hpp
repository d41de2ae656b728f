#pragma once

#include <map>
#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace liseq {

// What a sequentialization hands to the explorer so it can (a) tell which
// generated statements simulate original ones, (b) snapshot driver-procedure
// calls, and (c) project generated state back onto source variables.
struct Instrumentation {
  int k = 0;

  // original pc -> pc of its copy in the generated program
  std::map<int, int> stmt_map;

  // variable layout of the source program, in declaration order
  std::vector<std::string> shared_vars;
  std::vector<std::string> global_vars;  // user process globals

  // lazy only: the recursive driver and its parameter grouping
  std::string linear_int;                            // procedure name, "" if absent
  std::vector<std::vector<std::string>> q_params;    // k groups, one name per shared var
  std::vector<std::vector<std::string>> qp_params;   // k-1 groups
  std::string bound_param;

  // eager only: pc of a generated validated-violation check -> original assert pc
  std::map<int, int> validated_map;
};

struct LazyOutput {
  SeqProgram program;
  Instrumentation instr;
};

struct EagerOutput {
  SeqProgram program;
  Instrumentation instr;
};

}  // namespace liseq

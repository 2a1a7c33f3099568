#pragma once

// Independent brute-force references used only by tests and the acceptance
// suite. They deliberately share no search/selection code with the solver
// paths they certify.

#include <string>
#include <vector>

#include "boundlab/bnb.hpp"
#include "boundlab/milp.hpp"

namespace boundlab::oracle {

struct EnumerationResult {
  bool feasible = false;
  double optimal_objective = 0.0;
  std::vector<double> assignment;
  long feasible_count = 0;
};

// Exhaustive enumeration over all integer assignments; instances with
// continuous variables complete each assignment with an LP. Integer
// variables must be binary. Refuses more than max_binaries integers.
EnumerationResult enumerate_binary_optimum(const MilpInstance& inst, int max_binaries = 20);

struct VertexEnumResult {
  bool feasible = false;
  double objective = 0.0;
};

// LP optimum by enumerating all basic points: every choice of num_vars
// linearly independent active constraints among rows and bounds.
VertexEnumResult vertex_enumeration_lp(const MilpInstance& inst,
                                       const std::vector<double>& lb,
                                       const std::vector<double>& ub);

// Pop sequence of a finished run, from its selected events.
std::vector<int> selected_sequence(const RunRecord& run);

// Recomputes every pop from the logged queue contents with a from-scratch
// reading of the selection rules. Certifies the pop-max invariant when it
// matches the live sequence.
std::vector<int> replay_selection_oracle(const RunRecord& run, const std::string& selector);

// Stack-discipline replay of a DFS run: siblings pushed less-preferred
// first, queued prunes removed in place.
std::vector<int> stack_dfs_oracle(const RunRecord& run);

// Distance metric recomputed with brute-force diff and substring scans.
long distance_reference(const BranchHistory& h_i, const BranchHistory& h_opt);

}  // namespace boundlab::oracle

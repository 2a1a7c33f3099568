#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "boundlab/lp.hpp"
#include "boundlab/milp.hpp"

namespace boundlab {



enum class BranchDir { down, up };

struct BranchDecision {
  int var = -1;
  BranchDir dir = BranchDir::down;
  double bound = 0.0;  // the imposed bound value (floor/ceil of the parent LP value)
};

// Creation decisions only, one per depth level (root excluded).
using BranchHistory = std::vector<BranchDecision>;

enum class NodeType { child, sibling, other_leaf };

struct PseudocostTable {
  std::vector<double> sum_down, sum_up;
  std::vector<int> cnt_down, cnt_up;

  explicit PseudocostTable(int num_vars = 0)
      : sum_down(num_vars, 0.0), sum_up(num_vars, 0.0),
        cnt_down(num_vars, 0), cnt_up(num_vars, 0) {}

  double get(int var, BranchDir dir) const {
    int c = dir == BranchDir::down ? cnt_down[var] : cnt_up[var];
    if (c == 0) return 1.0;
    double s = dir == BranchDir::down ? sum_down[var] : sum_up[var];
    return s / c;
  }
};

// Adds the per-unit gain objective_gain / (dir==down ? frac : 1-frac).
void update_pseudocosts(PseudocostTable& table, int var, BranchDir dir,
                        double objective_gain, double frac);

struct BnbNode {
  int id = 0;
  int parent_id = -1;
  int sibling_id = -1;
  int depth = 0;
  BranchDecision branch;    // how this node was created; branch.var < 0 at the root
  double branch_frac = 0.0; // fractional part of branch.var at the parent LP
  // Bound changes applied in-place by FSB when one probe side was infeasible.
  // They are not part of the branching history.
  std::vector<BranchDecision> tightenings;
  LpResult lp;              // from the FSB probe at the parent (root: own solve)
  double lower_bound = -kInf;
  double estimate = -kInf;
  double pair_score = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::array<double, 14>> creation_features;  // learned runs only
  std::optional<bool> is_oracle;
};

// lower_bound + sum over fractional integer vars of min(psi_down*f, psi_up*(1-f))
double node_estimate(const BnbNode& node, const MilpInstance& inst,
                     const PseudocostTable& table);

// Materializes the node's local bound box by replaying ancestor decisions and
// tightenings from the root box.
void node_bounds(const std::vector<BnbNode>& tree, int id, const MilpInstance& inst,
                 std::vector<double>& lb, std::vector<double>& ub);

BranchHistory node_history(const std::vector<BnbNode>& tree, int id);

enum class EventKind { node_solved, incumbent, pruned, branched, selected };

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::selected;
  int node_id = -1;
  double pb = kInf;   // +inf until the first incumbent
  double db = -kInf;
  int depth = 0;
  // extras for tree/queue reconstruction
  int branch_var = -1;
  int child_down = -1;
  int child_up = -1;
  double value = 0.0;  // incumbent objective / node bound, depending on kind
};

const char* event_kind_name(EventKind k);

enum class SolveStatus { optimal, node_limit, time_limit, error };

const char* solve_status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::optimal;
  std::optional<std::vector<double>> incumbent;
  double incumbent_objective = kInf;
  double global_dual_bound = -kInf;
  long nodes_processed = 0;
  int bpb_node = -1;
  long bpb_nodes = 0;
  double bpb_time = 0.0;
  double solve_time = 0.0;
  std::vector<Event> event_log;
};

struct SolveLimits {
  double time_limit = 3600.0;
  long node_limit = std::numeric_limits<long>::max();
  bool wall_clock = false;  // default: deterministic work-proxy clock
};

// Deterministic time source: accumulated simplex work scaled to seconds.
// One "second" is kWorkUnitsPerSecond units; an LP solve costs
// (iterations + 3) * (m + 1) units.
constexpr double kWorkUnitsPerSecond = 2.0e6;

class Selector;

// Full tree plus summary; the tree outlives the solve for replay, labeling
// and evaluation.
struct RunRecord {
  SolveResult result;
  std::vector<BnbNode> tree;
  double root_objective = 0.0;  // db at the root LP
  uint64_t rng_seed = 0;
};

// Snapshot handed to the before-select hook: everything Algorithm-style data
// collection needs about the current queue state.
struct QueueStateView {
  const std::vector<BnbNode>* tree = nullptr;
  const std::vector<int>* open_ids = nullptr;
  int focus_id = -1;  // node processed in the previous iteration (-1 before the first)
  double pb = kInf;
  double db = -kInf;
  double db_root = 0.0;
  int max_depth_seen = 0;
  const PseudocostTable* table = nullptr;
  const MilpInstance* inst = nullptr;
  long selections_so_far = 0;
};

struct SolveHooks {
  std::function<void(const QueueStateView&)> before_select;
};

RunRecord solve(const MilpInstance& inst, Selector& selector, const SolveLimits& limits,
                uint64_t rng_seed = 0, const SolveHooks* hooks = nullptr);

// --- full strong branching, exposed for direct testing ---

enum class FsbOutcome { branched, prunable, tightened };

struct FsbProbe {
  LpResult down, up;
  double gain_down = 0.0, gain_up = 0.0;  // +inf when the side is infeasible
  double score = 0.0;
};

struct FsbResult {
  FsbOutcome outcome = FsbOutcome::branched;
  int chosen_var = -1;
  LpResult down_lp, up_lp;
  // tightened: the surviving side's probe becomes the node's new LP
  BranchDecision tightening;
  LpResult tightened_lp;
  std::vector<FsbProbe> probes;  // aligned with candidates
};

// Probes both children of every candidate against the given box. Probe LPs
// are independent and run under an OpenMP loop; results are collected by
// candidate index so the outcome is identical for any thread count.
FsbResult branch_full_strong(const MilpInstance& inst, const LpResult& node_lp,
                             std::span<const double> lb, std::span<const double> ub,
                             const std::vector<int>& candidates);

namespace ref {
// Serial reference for the probe loop, kept for tests and kernel_bench.
FsbResult branch_full_strong_serial(const MilpInstance& inst, const LpResult& node_lp,
                                    std::span<const double> lb, std::span<const double> ub,
                                    const std::vector<int>& candidates);
}  // namespace ref

// Removes every open node with lower_bound >= incumbent_objective - 1e-9.
// Returns ids of pruned nodes in ascending order.
std::vector<int> bound_and_prune(const std::vector<BnbNode>& tree, std::vector<int>& open_ids,
                                 double incumbent_objective);

// Fractional integer variables of an optimal LP result, ascending.
std::vector<int> fractional_candidates(const MilpInstance& inst, const LpResult& lp);

NodeType classify_node_type(const BnbNode& node, int focus_id, const std::vector<BnbNode>& tree);

// External event log serialization: one JSON object per line with fields
// {t, kind, node_id, pb, db, depth} (pb null until an incumbent exists).
std::string event_log_to_jsonl(const std::vector<Event>& events);

}  // namespace boundlab

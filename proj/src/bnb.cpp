#include "boundlab/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "boundlab/features.hpp"
#include "boundlab/selectors.hpp"

namespace boundlab {

void update_pseudocosts(PseudocostTable& table, int var, BranchDir dir, double objective_gain,
                        double frac) {
  double denom = dir == BranchDir::down ? frac : 1.0 - frac;
  double unit = objective_gain / denom;
  if (dir == BranchDir::down) {
    table.sum_down[var] += unit;
    ++table.cnt_down[var];
  } else {
    table.sum_up[var] += unit;
    ++table.cnt_up[var];
  }
}

double node_estimate(const BnbNode& node, const MilpInstance& inst,
                     const PseudocostTable& table) {
  double est = node.lower_bound;
  if (node.lp.status != LpStatus::optimal) return est;
  for (int j = 0; j < inst.num_vars; ++j) {
    if (!inst.is_integer[j]) continue;
    double x = node.lp.x[j];
    if (frac_dist(x) <= kTol.integrality) continue;
    double f = x - std::floor(x);
    est += std::min(table.get(j, BranchDir::down) * f, table.get(j, BranchDir::up) * (1.0 - f));
  }
  return est;
}

void node_bounds(const std::vector<BnbNode>& tree, int id, const MilpInstance& inst,
                 std::vector<double>& lb, std::vector<double>& ub) {
  lb.assign(inst.var_lb.begin(), inst.var_lb.end());
  ub.assign(inst.var_ub.begin(), inst.var_ub.end());
  std::vector<int> chain;
  for (int cur = id; cur >= 0; cur = tree[cur].parent_id) chain.push_back(cur);
  std::reverse(chain.begin(), chain.end());
  auto apply = [&](const BranchDecision& d) {
    if (d.dir == BranchDir::down)
      ub[d.var] = std::min(ub[d.var], d.bound);
    else
      lb[d.var] = std::max(lb[d.var], d.bound);
  };
  for (int cur : chain) {
    const BnbNode& n = tree[cur];
    if (n.branch.var >= 0) apply(n.branch);
    for (const BranchDecision& d : n.tightenings) apply(d);
  }
}

BranchHistory node_history(const std::vector<BnbNode>& tree, int id) {
  BranchHistory h;
  for (int cur = id; cur >= 0; cur = tree[cur].parent_id)
    if (tree[cur].branch.var >= 0) h.push_back(tree[cur].branch);
  std::reverse(h.begin(), h.end());
  return h;
}

NodeType classify_node_type(const BnbNode& node, int focus_id,
                            const std::vector<BnbNode>& tree) {
  if (focus_id < 0) return NodeType::other_leaf;
  if (node.parent_id == focus_id) return NodeType::child;
  if (node.parent_id >= 0 && node.parent_id == tree[focus_id].parent_id &&
      node.id != focus_id)
    return NodeType::sibling;
  return NodeType::other_leaf;
}

std::vector<int> fractional_candidates(const MilpInstance& inst, const LpResult& lp) {
  std::vector<int> cands;
  for (int j = 0; j < inst.num_vars; ++j)
    if (inst.is_integer[j] && frac_dist(lp.x[j]) > kTol.integrality) cands.push_back(j);
  return cands;
}

std::vector<int> bound_and_prune(const std::vector<BnbNode>& tree, std::vector<int>& open_ids,
                                 double incumbent_objective) {
  std::vector<int> pruned;
  std::vector<int> kept;
  kept.reserve(open_ids.size());
  for (int id : open_ids) {
    if (tree[id].lower_bound >= incumbent_objective - 1e-9)
      pruned.push_back(id);
    else
      kept.push_back(id);
  }
  open_ids = std::move(kept);
  return pruned;
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::node_solved: return "node_solved";
    case EventKind::incumbent: return "incumbent";
    case EventKind::pruned: return "pruned";
    case EventKind::branched: return "branched";
    case EventKind::selected: return "selected";
  }
  return "?";
}

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::node_limit: return "node-limit";
    case SolveStatus::time_limit: return "time-limit";
    case SolveStatus::error: return "error";
  }
  return "?";
}

std::string event_log_to_jsonl(const std::vector<Event>& events) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) -> std::string {
    if (!std::isfinite(v)) return "null";
    snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  };
  for (const Event& e : events) {
    out << "{\"t\":" << num(e.t) << ",\"kind\":\"" << event_kind_name(e.kind)
        << "\",\"node_id\":" << e.node_id << ",\"pb\":" << num(e.pb) << ",\"db\":" << num(e.db)
        << ",\"depth\":" << e.depth << "}\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// full strong branching

namespace {

struct ProbeTask {
  LpResult result;
  bool stalled = false;
};

LpResult run_probe(const MilpInstance& inst, std::span<const double> lb,
                   std::span<const double> ub, int var, double x, bool down) {
  std::vector<double> plb(lb.begin(), lb.end());
  std::vector<double> pub(ub.begin(), ub.end());
  if (down)
    pub[var] = std::floor(x);
  else
    plb[var] = std::ceil(x);
  if (plb[var] > pub[var]) {
    LpResult r;
    r.status = LpStatus::infeasible;
    return r;
  }
  return solve_lp(inst, plb, pub);
}

// shared scoring tail: gains, prunable / tightened detection, product rule
FsbResult score_probes(const LpResult& node_lp, const std::vector<int>& candidates,
                       std::vector<FsbProbe> probes) {
  constexpr double kEps = 1e-6;
  FsbResult out;
  for (size_t c = 0; c < candidates.size(); ++c) {
    FsbProbe& p = probes[c];
    p.gain_down = p.down.status == LpStatus::optimal ? p.down.objective - node_lp.objective : kInf;
    p.gain_up = p.up.status == LpStatus::optimal ? p.up.objective - node_lp.objective : kInf;
    p.score = std::max(p.gain_down, kEps) * std::max(p.gain_up, kEps);
  }
  for (size_t c = 0; c < candidates.size(); ++c)
    if (probes[c].down.status != LpStatus::optimal && probes[c].up.status != LpStatus::optimal) {
      out.outcome = FsbOutcome::prunable;
      out.probes = std::move(probes);
      return out;
    }
  for (size_t c = 0; c < candidates.size(); ++c) {
    const FsbProbe& p = probes[c];
    bool down_ok = p.down.status == LpStatus::optimal;
    bool up_ok = p.up.status == LpStatus::optimal;
    if (down_ok && up_ok) continue;
    int var = candidates[c];
    out.outcome = FsbOutcome::tightened;
    if (down_ok) {
      // up child infeasible: the variable can only go down
      out.tightening = {var, BranchDir::down, std::floor(node_lp.x[var])};
      out.tightened_lp = p.down;
    } else {
      out.tightening = {var, BranchDir::up, std::ceil(node_lp.x[var])};
      out.tightened_lp = p.up;
    }
    out.probes = std::move(probes);
    return out;
  }
  int best = 0;
  for (size_t c = 1; c < candidates.size(); ++c)
    if (probes[c].score > probes[best].score) best = static_cast<int>(c);
  out.outcome = FsbOutcome::branched;
  out.chosen_var = candidates[best];
  out.down_lp = probes[best].down;
  out.up_lp = probes[best].up;
  out.probes = std::move(probes);
  return out;
}

}  // namespace

FsbResult branch_full_strong(const MilpInstance& inst, const LpResult& node_lp,
                             std::span<const double> lb, std::span<const double> ub,
                             const std::vector<int>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("branch_full_strong: no candidates");
  int ncand = static_cast<int>(candidates.size());
  std::vector<ProbeTask> tasks(2 * ncand);
  bool any_stalled = false;

#pragma omp parallel for schedule(dynamic) reduction(|| : any_stalled)
  for (int t = 0; t < 2 * ncand; ++t) {
    int c = t / 2;
    bool down = (t % 2) == 0;
    int var = candidates[c];
    try {
      tasks[t].result = run_probe(inst, lb, ub, var, node_lp.x[var], down);
    } catch (const lp_stalled_error&) {
      tasks[t].stalled = true;
      any_stalled = true;
    }
  }
  if (any_stalled) throw lp_stalled_error("lp stalled during a strong-branching probe");

  std::vector<FsbProbe> probes(ncand);
  for (int c = 0; c < ncand; ++c) {
    probes[c].down = std::move(tasks[2 * c].result);
    probes[c].up = std::move(tasks[2 * c + 1].result);
  }
  return score_probes(node_lp, candidates, std::move(probes));
}

namespace ref {

FsbResult branch_full_strong_serial(const MilpInstance& inst, const LpResult& node_lp,
                                    std::span<const double> lb, std::span<const double> ub,
                                    const std::vector<int>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("branch_full_strong: no candidates");
  std::vector<FsbProbe> probes(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c) {
    int var = candidates[c];
    probes[c].down = run_probe(inst, lb, ub, var, node_lp.x[var], true);
    probes[c].up = run_probe(inst, lb, ub, var, node_lp.x[var], false);
  }
  return score_probes(node_lp, candidates, std::move(probes));
}

}  // namespace ref

// ---------------------------------------------------------------------------
// solve loop

namespace {

class Clock {
 public:
  explicit Clock(bool wall) : wall_(wall), start_(std::chrono::steady_clock::now()) {}
  void add_lp(const LpResult& r, int m) { units_ += (r.iterations + 3.0) * (m + 1); }
  double seconds() const {
    if (wall_)
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return units_ / kWorkUnitsPerSecond;
  }

 private:
  bool wall_;
  double units_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

RunRecord solve(const MilpInstance& inst, Selector& selector, const SolveLimits& limits,
                uint64_t rng_seed, const SolveHooks* hooks) {
  inst.validate();
  RunRecord rec;
  rec.rng_seed = rng_seed;
  SolveResult& res = rec.result;
  std::vector<BnbNode>& tree = rec.tree;
  Clock clock(limits.wall_clock);

  LpResult root_lp = solve_lp(inst, inst.var_lb, inst.var_ub);
  clock.add_lp(root_lp, inst.num_cons);
  if (root_lp.status == LpStatus::unbounded)
    throw std::runtime_error("solve: root LP relaxation is unbounded");
  if (root_lp.status == LpStatus::infeasible) {
    res.status = SolveStatus::optimal;  // proven infeasible; search is complete
    res.global_dual_bound = kInf;
    res.solve_time = clock.seconds();
    return rec;
  }

  PseudocostTable table(inst.num_vars);
  BnbNode root;
  root.id = 0;
  root.lp = std::move(root_lp);
  root.lower_bound = root.lp.objective;
  root.estimate = node_estimate(root, inst, table);
  tree.push_back(std::move(root));
  rec.root_objective = tree[0].lower_bound;

  std::vector<int> open{0};
  double pb = kInf;
  std::vector<double> incumbent;
  PlungeState plunge;
  int max_depth_seen = 0;
  long selections = 0;
  int processing = -1;

  auto current_db = [&]() {
    double db = pb;
    if (processing >= 0) db = std::min(db, tree[processing].lower_bound);
    for (int id : open) db = std::min(db, tree[id].lower_bound);
    return db;
  };
  auto log = [&](EventKind kind, int node_id, double value = 0.0, int branch_var = -1,
                 int cd = -1, int cu = -1) {
    Event e;
    e.t = clock.seconds();
    e.kind = kind;
    e.node_id = node_id;
    e.pb = pb;
    e.db = current_db();
    e.depth = node_id >= 0 ? tree[node_id].depth : 0;
    e.value = value;
    e.branch_var = branch_var;
    e.child_down = cd;
    e.child_up = cu;
    res.event_log.push_back(e);
  };
  auto on_incumbent = [&](const BnbNode& node, double obj) {
    if (obj < pb) {
      pb = obj;
      incumbent = node.lp.x;
      res.bpb_node = node.id;
      res.bpb_time = clock.seconds();
      res.bpb_nodes = res.nodes_processed;
      log(EventKind::incumbent, node.id, obj);
      for (int id : bound_and_prune(tree, open, pb)) log(EventKind::pruned, id);
    }
  };

  std::vector<double> lb, ub;
  while (true) {
    if (open.empty()) {
      res.status = SolveStatus::optimal;
      break;
    }
    if (res.nodes_processed >= limits.node_limit) {
      res.status = SolveStatus::node_limit;
      break;
    }
    if (clock.seconds() >= limits.time_limit) {
      res.status = SolveStatus::time_limit;
      break;
    }

    if (hooks && hooks->before_select) {
      QueueStateView view;
      view.tree = &tree;
      view.open_ids = &open;
      view.focus_id = plunge.focus_id;
      view.pb = pb;
      view.db = current_db();
      view.db_root = rec.root_objective;
      view.max_depth_seen = max_depth_seen;
      view.table = &table;
      view.inst = &inst;
      view.selections_so_far = selections;
      hooks->before_select(view);
    }

    GlobalBounds gb{pb, current_db()};
    size_t best_pos = 0;
    SelectorPriority best = selector.priority(tree[open[0]], plunge, gb);
    for (size_t k = 1; k < open.size(); ++k) {
      SelectorPriority p = selector.priority(tree[open[k]], plunge, gb);
      if (p.better_than(best)) {
        best = p;
        best_pos = k;
      }
    }
    int nid = open[best_pos];
    ++selections;
    processing = nid;
    log(EventKind::selected, nid);
    open.erase(open.begin() + static_cast<long>(best_pos));

    if (plunge.focus_id >= 0 && tree[nid].parent_id == plunge.focus_id)
      ++plunge.plunge_depth;
    else
      plunge.plunge_depth = 0;
    plunge.focus_id = nid;
    ++res.nodes_processed;
    log(EventKind::node_solved, nid, tree[nid].lower_bound);

    if (tree[nid].lower_bound >= pb - 1e-9) {
      log(EventKind::pruned, nid);
      processing = -1;
      continue;
    }

    if (tree[nid].lp.num_fractional == 0) {
      on_incumbent(tree[nid], tree[nid].lp.objective);
      processing = -1;
      continue;
    }

    node_bounds(tree, nid, inst, lb, ub);
    while (true) {
      std::vector<int> cands = fractional_candidates(inst, tree[nid].lp);
      if (cands.empty()) {
        on_incumbent(tree[nid], tree[nid].lp.objective);
        break;
      }
      FsbResult fsb = branch_full_strong(inst, tree[nid].lp, lb, ub, cands);
      for (const FsbProbe& p : fsb.probes) {
        clock.add_lp(p.down, inst.num_cons);
        clock.add_lp(p.up, inst.num_cons);
      }
      if (fsb.outcome == FsbOutcome::prunable) {
        log(EventKind::pruned, nid);
        break;
      }
      if (fsb.outcome == FsbOutcome::tightened) {
        BnbNode& n = tree[nid];
        n.tightenings.push_back(fsb.tightening);
        if (fsb.tightening.dir == BranchDir::down)
          ub[fsb.tightening.var] = std::min(ub[fsb.tightening.var], fsb.tightening.bound);
        else
          lb[fsb.tightening.var] = std::max(lb[fsb.tightening.var], fsb.tightening.bound);
        n.lp = fsb.tightened_lp;
        n.lower_bound = std::max(n.lower_bound, n.lp.objective);
        n.estimate = node_estimate(n, inst, table);
        if (n.lower_bound >= pb - 1e-9) {
          log(EventKind::pruned, nid);
          break;
        }
        continue;
      }

      int var = fsb.chosen_var;
      double x = tree[nid].lp.x[var];
      double f = x - std::floor(x);
      double gd = std::max(0.0, fsb.down_lp.objective - tree[nid].lp.objective);
      double gu = std::max(0.0, fsb.up_lp.objective - tree[nid].lp.objective);
      update_pseudocosts(table, var, BranchDir::down, gd, f);
      update_pseudocosts(table, var, BranchDir::up, gu, f);

      int down_id = static_cast<int>(tree.size());
      int up_id = down_id + 1;
      for (int side = 0; side < 2; ++side) {
        BnbNode child;
        child.id = side == 0 ? down_id : up_id;
        child.parent_id = nid;
        child.sibling_id = side == 0 ? up_id : down_id;
        child.depth = tree[nid].depth + 1;
        child.branch.var = var;
        child.branch.dir = side == 0 ? BranchDir::down : BranchDir::up;
        child.branch.bound = side == 0 ? std::floor(x) : std::ceil(x);
        child.branch_frac = f;
        child.lp = side == 0 ? fsb.down_lp : fsb.up_lp;
        child.lower_bound = std::max(child.lp.objective, tree[nid].lower_bound);
        child.estimate = node_estimate(child, inst, table);
        tree.push_back(std::move(child));
      }
      max_depth_seen = std::max(max_depth_seen, tree[nid].depth + 1);
      open.push_back(down_id);
      open.push_back(up_id);

      if (selector.wants_features()) {
        FeatureContext fctx;
        fctx.pb = pb;
        fctx.db = current_db();
        fctx.db_root = rec.root_objective;
        fctx.max_depth_seen = max_depth_seen;
        fctx.has_incumbent = std::isfinite(pb);
        fctx.focus_id = nid;
        tree[down_id].creation_features =
            extract_features(tree[down_id], fctx, table, inst, tree);
        tree[up_id].creation_features = extract_features(tree[up_id], fctx, table, inst, tree);
        selector.score_pair(tree[down_id], tree[up_id]);
      }
      log(EventKind::branched, nid, 0.0, var, down_id, up_id);
      break;
    }
    processing = -1;
  }

  res.solve_time = clock.seconds();
  res.global_dual_bound = current_db();
  if (std::isfinite(pb)) {
    res.incumbent = std::move(incumbent);
    res.incumbent_objective = pb;
  }
  return rec;
}

}  // namespace boundlab

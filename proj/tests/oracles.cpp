#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "boundlab/lp.hpp"

namespace boundlab::oracle {

namespace {

bool row_satisfied(const ConsRow& row, const std::vector<double>& x, double tol) {
  double ax = 0.0;
  for (const auto& [j, a] : row.entries) ax += a * x[j];
  switch (row.rel) {
    case Rel::le: return ax <= row.rhs + tol;
    case Rel::ge: return ax >= row.rhs - tol;
    case Rel::eq: return std::fabs(ax - row.rhs) <= tol;
  }
  return false;
}

}  // namespace

EnumerationResult enumerate_binary_optimum(const MilpInstance& inst, int max_binaries) {
  std::vector<int> ints;
  for (int j = 0; j < inst.num_vars; ++j)
    if (inst.is_integer[j]) ints.push_back(j);
  if (static_cast<int>(ints.size()) > max_binaries)
    throw std::invalid_argument("enumerate_binary_optimum: too many integer variables");
  for (int j : ints)
    if (inst.var_lb[j] != 0.0 || inst.var_ub[j] != 1.0)
      throw std::invalid_argument("enumerate_binary_optimum: integer variable not binary");
  bool pure_binary = static_cast<int>(ints.size()) == inst.num_vars;

  EnumerationResult res;
  double best = kInf;
  uint64_t total = 1ULL << ints.size();
  std::vector<double> x(inst.num_vars, 0.0), ll, uu;
  for (uint64_t mask = 0; mask < total; ++mask) {
    if (pure_binary) {
      for (size_t b = 0; b < ints.size(); ++b) x[ints[b]] = (mask >> b) & 1 ? 1.0 : 0.0;
      bool ok = true;
      for (const ConsRow& row : inst.cons)
        if (!row_satisfied(row, x, kTol.feasibility)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      ++res.feasible_count;
      double obj = 0.0;
      for (int j = 0; j < inst.num_vars; ++j) obj += inst.obj[j] * x[j];
      if (!res.feasible || obj < best) {
        res.feasible = true;
        best = obj;
        res.assignment = x;
      }
    } else {
      ll.assign(inst.var_lb.begin(), inst.var_lb.end());
      uu.assign(inst.var_ub.begin(), inst.var_ub.end());
      for (size_t b = 0; b < ints.size(); ++b) {
        double v = (mask >> b) & 1 ? 1.0 : 0.0;
        ll[ints[b]] = v;
        uu[ints[b]] = v;
      }
      LpResult lp = solve_lp(inst, ll, uu);
      if (lp.status != LpStatus::optimal) continue;
      ++res.feasible_count;
      if (!res.feasible || lp.objective < best) {
        res.feasible = true;
        best = lp.objective;
        res.assignment = lp.x;
      }
    }
  }
  res.optimal_objective = best;
  return res;
}

VertexEnumResult vertex_enumeration_lp(const MilpInstance& inst, const std::vector<double>& lb,
                                       const std::vector<double>& ub) {
  const int n = inst.num_vars;
  const int m = inst.num_cons;
  // constraint catalogue: rows, then lower bounds, then upper bounds
  const int total = m + 2 * n;
  auto fill_row = [&](int c, std::vector<double>& a, double& rhs) {
    std::fill(a.begin(), a.end(), 0.0);
    if (c < m) {
      for (const auto& [j, v] : inst.cons[c].entries) a[j] += v;
      rhs = inst.cons[c].rhs;
    } else if (c < m + n) {
      a[c - m] = 1.0;
      rhs = lb[c - m];
    } else {
      a[c - m - n] = 1.0;
      rhs = ub[c - m - n];
    }
  };

  VertexEnumResult out;
  double best = kInf;
  std::vector<int> pick(n);
  std::vector<double> a(n), x(n);
  std::vector<std::vector<double>> sys(n, std::vector<double>(n + 1));

  std::vector<int> comb(n);
  for (int i = 0; i < n; ++i) comb[i] = i;
  auto advance = [&]() {
    int i = n - 1;
    while (i >= 0 && comb[i] == total - n + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int k = i + 1; k < n; ++k) comb[k] = comb[k - 1] + 1;
    return true;
  };

  while (true) {
    for (int r = 0; r < n; ++r) {
      double rhs = 0.0;
      fill_row(comb[r], a, rhs);
      for (int j = 0; j < n; ++j) sys[r][j] = a[j];
      sys[r][n] = rhs;
    }
    // gaussian elimination with partial pivoting
    bool singular = false;
    for (int c = 0; c < n && !singular; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::fabs(sys[r][c]) > std::fabs(sys[piv][c])) piv = r;
      if (std::fabs(sys[piv][c]) < 1e-9) {
        singular = true;
        break;
      }
      std::swap(sys[c], sys[piv]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = sys[r][c] / sys[c][c];
        if (f == 0.0) continue;
        for (int j = c; j <= n; ++j) sys[r][j] -= f * sys[c][j];
      }
    }
    if (!singular) {
      for (int j = 0; j < n; ++j) x[j] = sys[j][n] / sys[j][j];
      bool ok = true;
      for (int j = 0; j < n && ok; ++j)
        ok = x[j] >= lb[j] - kTol.feasibility && x[j] <= ub[j] + kTol.feasibility;
      for (int i = 0; i < m && ok; ++i) ok = row_satisfied(inst.cons[i], x, kTol.feasibility);
      if (ok) {
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += inst.obj[j] * x[j];
        if (!out.feasible || obj < best) {
          out.feasible = true;
          best = obj;
        }
      }
    }
    if (!advance()) break;
  }
  out.objective = best;
  return out;
}

std::vector<int> selected_sequence(const RunRecord& run) {
  std::vector<int> seq;
  for (const Event& e : run.result.event_log)
    if (e.kind == EventKind::selected) seq.push_back(e.node_id);
  return seq;
}

namespace {

struct ReplayPriority {
  double a, b, c, d;
  bool operator>(const ReplayPriority& o) const {
    if (a != o.a) return a > o.a;
    if (b != o.b) return b > o.b;
    if (c != o.c) return c > o.c;
    return d > o.d;
  }
};

}  // namespace

std::vector<int> replay_selection_oracle(const RunRecord& run, const std::string& selector) {
  std::vector<int> seq;
  std::vector<int> open;
  int focus = -1;
  int plunge_depth = 0;
  if (!run.tree.empty()) open.push_back(0);
  const std::vector<BnbNode>& tree = run.tree;

  auto prio = [&](int id, double pb, double db) {
    const BnbNode& node = tree[id];
    bool child = focus >= 0 && node.parent_id == focus;
    ReplayPriority p{0.0, 0.0, -node.lower_bound, static_cast<double>(-node.id)};
    if (selector == "dfs") {
      p.a = child ? 1.0 : 0.0;
      p.b = node.depth;
    } else if (selector == "bfs" || selector == "bes") {
      bool eligible = child && plunge_depth < 10 &&
                      (!std::isfinite(pb) || node.estimate <= db + 0.25 * (pb - db));
      p.a = eligible ? 1.0 : 0.0;
      p.b = selector == "bfs" ? -node.lower_bound : -node.estimate;
    } else if (selector == "learned") {
      p.b = node.parent_id < 0 ? kInf : node.pair_score;
    } else {
      throw std::invalid_argument("replay oracle: unknown selector " + selector);
    }
    return p;
  };

  for (const Event& e : run.result.event_log) {
    switch (e.kind) {
      case EventKind::selected: {
        int best = open.front();
        ReplayPriority bp = prio(best, e.pb, e.db);
        for (size_t i = 1; i < open.size(); ++i) {
          ReplayPriority p = prio(open[i], e.pb, e.db);
          if (p > bp) {
            bp = p;
            best = open[i];
          }
        }
        seq.push_back(best);
        open.erase(std::find(open.begin(), open.end(), e.node_id));
        plunge_depth = (focus >= 0 && tree[e.node_id].parent_id == focus) ? plunge_depth + 1 : 0;
        focus = e.node_id;
        break;
      }
      case EventKind::branched:
        open.push_back(e.child_down);
        open.push_back(e.child_up);
        break;
      case EventKind::pruned: {
        auto it = std::find(open.begin(), open.end(), e.node_id);
        if (it != open.end()) open.erase(it);
        break;
      }
      default:
        break;
    }
  }
  return seq;
}

std::vector<int> stack_dfs_oracle(const RunRecord& run) {
  std::vector<int> seq;
  std::vector<int> stack;
  if (!run.tree.empty()) stack.push_back(0);
  const std::vector<BnbNode>& tree = run.tree;

  for (const Event& e : run.result.event_log) {
    switch (e.kind) {
      case EventKind::selected: {
        seq.push_back(stack.back());
        auto it = std::find(stack.begin(), stack.end(), e.node_id);
        if (it != stack.end()) stack.erase(it);
        break;
      }
      case EventKind::branched: {
        // push the sibling that should pop second first
        int d = e.child_down, u = e.child_up;
        const BnbNode& nd = tree[d];
        const BnbNode& nu = tree[u];
        bool down_first = nd.lower_bound < nu.lower_bound ||
                          (nd.lower_bound == nu.lower_bound && nd.id < nu.id);
        if (down_first) {
          stack.push_back(u);
          stack.push_back(d);
        } else {
          stack.push_back(d);
          stack.push_back(u);
        }
        break;
      }
      case EventKind::pruned: {
        auto it = std::find(stack.begin(), stack.end(), e.node_id);
        if (it != stack.end()) stack.erase(it);
        break;
      }
      default:
        break;
    }
  }
  return seq;
}

long distance_reference(const BranchHistory& h_i, const BranchHistory& h_opt) {
  // diff by brute force over variable pairs
  std::set<int> counted;
  long diff = 0;
  for (const BranchDecision& a : h_i)
    for (const BranchDecision& b : h_opt)
      if (a.var == b.var && a.dir != b.dir && !counted.count(a.var)) {
        counted.insert(a.var);
        ++diff;
      }
  // longest common substring by scanning every start pair
  long lcs = 0;
  for (size_t i = 0; i < h_i.size(); ++i)
    for (size_t j = 0; j < h_opt.size(); ++j) {
      size_t k = 0;
      while (i + k < h_i.size() && j + k < h_opt.size()) {
        const BranchDecision& a = h_i[i + k];
        const BranchDecision& b = h_opt[j + k];
        if (a.var != b.var || a.dir != b.dir || a.bound != b.bound) break;
        ++k;
      }
      lcs = std::max<long>(lcs, static_cast<long>(k));
    }
  return static_cast<long>(h_opt.size()) + diff - lcs;
}

}  // namespace boundlab::oracle

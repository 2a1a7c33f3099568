#include "boundlab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "boundlab/features.hpp"
#include "boundlab/rng.hpp"
#include "boundlab/selectors.hpp"
#include "json.hpp"

namespace boundlab {

using nlohmann::json;

LabelingOutcome label_oracle_nodes(const MilpInstance& inst, const SolveLimits& limits,
                                   const std::string& selector_name) {
  LabelingOutcome out;
  auto selector = make_selector(selector_name);
  out.run = solve(inst, *selector, limits, inst.seed);
  const SolveResult& r = out.run.result;
  if (r.status != SolveStatus::optimal) {
    out.skipped = true;
    out.skip_reason = std::string("limit reached (") + solve_status_name(r.status) + ")";
    return out;
  }
  if (!r.incumbent) {
    out.skipped = true;
    out.skip_reason = "instance infeasible";
    return out;
  }
  if (r.bpb_node == 0) return out;  // optimum at the root: empty contribution

  OracleLabeling lab;
  lab.instance_id = inst.name;
  lab.optimal_objective = r.incumbent_objective;
  for (int cur = r.bpb_node; cur >= 0; cur = out.run.tree[cur].parent_id)
    lab.oracle_ids.push_back(cur);
  std::reverse(lab.oracle_ids.begin(), lab.oracle_ids.end());
  lab.bpb_history = node_history(out.run.tree, r.bpb_node);
  out.labeling = std::move(lab);
  return out;
}

namespace {

// Re-walks a finished run's event log, reconstructing every queue state the
// engine saw: open set, focus, bounds, depth high-water mark and the
// pseudocost table (recomputed from the stored child LPs, in event order).
class TreeReplayer {
 public:
  TreeReplayer(const MilpInstance& inst, const RunRecord& run)
      : inst_(inst), run_(run), table_(inst.num_vars) {}

  // visit(state, selected_node_id, selection_index) before each selection
  template <class Visit>
  void replay(Visit&& visit) {
    std::vector<int> open;
    int focus = -1;
    int max_depth_seen = 0;
    long selections = 0;
    if (!run_.tree.empty()) open.push_back(0);
    for (const Event& e : run_.result.event_log) {
      switch (e.kind) {
        case EventKind::selected: {
          QueueStateView view;
          view.tree = &run_.tree;
          view.open_ids = &open;
          view.focus_id = focus;
          view.pb = e.pb;
          view.db = e.db;
          view.db_root = run_.root_objective;
          view.max_depth_seen = max_depth_seen;
          view.table = &table_;
          view.inst = &inst_;
          view.selections_so_far = selections;
          visit(view, e.node_id, selections);
          ++selections;
          open.erase(std::find(open.begin(), open.end(), e.node_id));
          focus = e.node_id;
          break;
        }
        case EventKind::branched: {
          const BnbNode& parent = run_.tree[e.node_id];
          const BnbNode& down = run_.tree[e.child_down];
          const BnbNode& up = run_.tree[e.child_up];
          double gd = std::max(0.0, down.lp.objective - parent.lp.objective);
          double gu = std::max(0.0, up.lp.objective - parent.lp.objective);
          update_pseudocosts(table_, e.branch_var, BranchDir::down, gd, down.branch_frac);
          update_pseudocosts(table_, e.branch_var, BranchDir::up, gu, up.branch_frac);
          open.push_back(e.child_down);
          open.push_back(e.child_up);
          max_depth_seen = std::max(max_depth_seen, down.depth);
          break;
        }
        case EventKind::pruned: {
          auto it = std::find(open.begin(), open.end(), e.node_id);
          if (it != open.end()) open.erase(it);  // queued prune; focus prunes are no-ops here
          break;
        }
        case EventKind::node_solved:
        case EventKind::incumbent:
          break;
      }
    }
  }

 private:
  const MilpInstance& inst_;
  const RunRecord& run_;
  PseudocostTable table_;
};

FeatureContext context_from(const QueueStateView& view) {
  FeatureContext ctx;
  ctx.pb = view.pb;
  ctx.db = view.db;
  ctx.db_root = view.db_root;
  ctx.max_depth_seen = view.max_depth_seen;
  ctx.has_incumbent = std::isfinite(view.pb);
  ctx.focus_id = view.focus_id;
  return ctx;
}

}  // namespace

std::vector<PairSample> collect_pairs(const MilpInstance& inst, const LabelingOutcome& outcome,
                                      int pair_cap, uint64_t seed) {
  std::vector<PairSample> pairs;
  if (!outcome.labeling || outcome.skipped) return pairs;
  const OracleLabeling& lab = *outcome.labeling;
  std::set<int> oracle(lab.oracle_ids.begin(), lab.oracle_ids.end());
  Rng rng(Rng::mix(seed, 0xda7aULL));

  TreeReplayer replayer(inst, outcome.run);
  replayer.replay([&](const QueueStateView& view, int /*selected*/, long selection_idx) {
    const std::vector<int>& open = *view.open_ids;
    int oracle_id = -1;
    for (int id : open)
      if (oracle.count(id)) {
        oracle_id = id;
        break;
      }
    if (oracle_id < 0 || open.size() < 2) return;

    std::vector<int> partners;
    partners.reserve(open.size() - 1);
    for (int id : open)
      if (id != oracle_id) partners.push_back(id);
    int k = std::min<int>(pair_cap, static_cast<int>(partners.size()));
    std::vector<int> picks = rng.sample_without_replacement(static_cast<int>(partners.size()), k);
    std::sort(picks.begin(), picks.end());

    FeatureContext ctx = context_from(view);
    FeatureVector fo =
        extract_features(view.tree->at(oracle_id), ctx, *view.table, inst, *view.tree);
    for (int pi : picks) {
      const BnbNode& partner = view.tree->at(partners[pi]);
      FeatureVector fp = extract_features(partner, ctx, *view.table, inst, *view.tree);
      if (fp == fo) continue;  // indistinguishable pair carries no signal
      PairSample s;
      s.instance_id = inst.name;
      s.queue_event_id = selection_idx;
      s.a = fo;
      s.b = fp;
      s.label_a = 1;
      s.label_b = 0;
      pairs.push_back(s);
      std::swap(s.a, s.b);
      std::swap(s.label_a, s.label_b);
      pairs.push_back(std::move(s));
    }
  });
  return pairs;
}

bool resolve_check(const MilpInstance& inst, const LabelingOutcome& outcome,
                   const SolveLimits& limits, const std::string& selector_name,
                   std::string* message) {
  auto selector = make_selector(selector_name);
  RunRecord second = solve(inst, *selector, limits, inst.seed);
  auto fail = [&](const std::string& why) {
    if (message) *message = inst.name + ": " + why;
    return false;
  };
  if (second.result.status != outcome.run.result.status) return fail("status differs");
  if (second.tree.size() != outcome.run.tree.size()) return fail("tree size differs");
  for (size_t i = 0; i < second.tree.size(); ++i) {
    const BnbNode& a = outcome.run.tree[i];
    const BnbNode& b = second.tree[i];
    if (a.parent_id != b.parent_id || a.depth != b.depth || a.branch.var != b.branch.var ||
        a.branch.bound != b.branch.bound || a.lower_bound != b.lower_bound)
      return fail("node " + std::to_string(i) + " differs");
  }
  if (second.result.incumbent_objective != outcome.run.result.incumbent_objective)
    return fail("optimum differs");
  if (second.result.bpb_node != outcome.run.result.bpb_node) return fail("bpb node differs");
  return true;
}

namespace {

json pair_to_json(const PairSample& s) {
  json j;
  j["a"] = std::vector<double>(s.a.begin(), s.a.end());
  j["b"] = std::vector<double>(s.b.begin(), s.b.end());
  j["la"] = s.label_a;
  j["lb"] = s.label_b;
  j["inst"] = s.instance_id;
  j["qe"] = s.queue_event_id;
  return j;
}

PairSample pair_from_json(const json& j) {
  PairSample s;
  auto a = j.at("a").get<std::vector<double>>();
  auto b = j.at("b").get<std::vector<double>>();
  if (a.size() != kFeatureDim || b.size() != kFeatureDim)
    throw parse_error("dataset record: feature width mismatch");
  std::copy(a.begin(), a.end(), s.a.begin());
  std::copy(b.begin(), b.end(), s.b.begin());
  s.label_a = j.at("la").get<int>();
  s.label_b = j.at("lb").get<int>();
  s.instance_id = j.at("inst").get<std::string>();
  s.queue_event_id = j.at("qe").get<long>();
  return s;
}

}  // namespace

DatasetSummary build_dataset(const std::vector<MilpInstance>& instances,
                             const SolveLimits& limits, int pair_cap, uint64_t seed,
                             const DatasetHeader& header, const std::filesystem::path& out,
                             const std::string& selector_name) {
  int n = static_cast<int>(instances.size());
  std::vector<std::vector<PairSample>> buffers(n);
  std::vector<int> skipped(n, 0);
  std::vector<long> oracle_nodes(n, 0), total_nodes(n, 0);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    LabelingOutcome outcome = label_oracle_nodes(instances[i], limits, selector_name);
    if (outcome.skipped) {
      skipped[i] = 1;
      continue;
    }
    total_nodes[i] = static_cast<long>(outcome.run.tree.size());
    if (outcome.labeling) {
      oracle_nodes[i] = static_cast<long>(outcome.labeling->oracle_ids.size());
      buffers[i] = collect_pairs(instances[i], outcome, pair_cap, Rng::mix(seed, i));
    }
  }

  DatasetSummary summary;
  summary.num_instances = n;
  long onodes = 0, tnodes = 0;
  for (int i = 0; i < n; ++i) {
    summary.num_instances_skipped += skipped[i];
    summary.num_pairs += static_cast<long>(buffers[i].size());
    onodes += oracle_nodes[i];
    tnodes += total_nodes[i];
  }
  summary.oracle_fraction = tnodes > 0 ? static_cast<double>(onodes) / tnodes : 0.0;
  if (summary.num_pairs == 0)
    throw empty_dataset_error("empty dataset: no instance produced training pairs");

  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + out.string());
  json h;
  h["schema_version"] = header.schema_version;
  h["feature_schema_version"] = header.feature_schema_version;
  h["family"] = header.family;
  h["scale"] = header.scale;
  h["pair_cap"] = pair_cap;
  h["seed"] = seed;
  os << h.dump() << "\n";
  for (int i = 0; i < n; ++i)
    for (const PairSample& s : buffers[i]) os << pair_to_json(s).dump() << "\n";
  if (!os) throw std::runtime_error("write failed: " + out.string());
  return summary;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path.string() + ": empty dataset file");
  Dataset ds;
  try {
    json h = json::parse(line);
    ds.header.schema_version = h.at("schema_version").get<int>();
    if (ds.header.schema_version != 1)
      throw schema_version_error(path.string() + ": dataset schema_version " +
                                 std::to_string(ds.header.schema_version) + " unsupported");
    ds.header.feature_schema_version = h.at("feature_schema_version").get<int>();
    ds.header.family = h.at("family").get<std::string>();
    ds.header.scale = h.at("scale").get<std::string>();
    ds.header.pair_cap = h.at("pair_cap").get<int>();
    ds.header.seed = h.at("seed").get<uint64_t>();
    long lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      ds.pairs.push_back(pair_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  if (ds.header.feature_schema_version != kFeatureSchemaVersion)
    throw schema_version_error(path.string() + ": feature schema " +
                               std::to_string(ds.header.feature_schema_version) +
                               " does not match extractor version " +
                               std::to_string(kFeatureSchemaVersion));
  return ds;
}

}  // namespace boundlab

#include "boundlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boundlab {

const std::array<const char*, kFeatureDim> kFeatureNames = {
    "node_lowerbound_rel", "node_estimate_rel",  "node_depth_rel",
    "type_child",          "type_sibling",       "type_other_leaf",
    "branch_frac",         "branch_bound_lp_diff", "pseudocost_dir",
    "pseudocost_other",    "has_incumbent",      "rel_gap",
    "parent_frac_count_rel", "lb_minus_db_rel"};

FeatureVector extract_features(const BnbNode& node, const FeatureContext& ctx,
                               const PseudocostTable& table, const MilpInstance& inst,
                               const std::vector<BnbNode>& tree) {
  FeatureVector f{};
  double dbr = std::max(1.0, std::fabs(ctx.db_root));
  f[0] = (node.lower_bound - ctx.db_root) / dbr;
  f[1] = (node.estimate - ctx.db_root) / dbr;
  f[2] = static_cast<double>(node.depth) / std::max(1, ctx.max_depth_seen);

  NodeType type = classify_node_type(node, ctx.focus_id, tree);
  f[3] = type == NodeType::child ? 1.0 : 0.0;
  f[4] = type == NodeType::sibling ? 1.0 : 0.0;
  f[5] = type == NodeType::other_leaf ? 1.0 : 0.0;

  if (node.branch.var >= 0) {
    f[6] = node.branch_frac;
    f[7] = node.branch.dir == BranchDir::down ? node.branch_frac : 1.0 - node.branch_frac;
    f[8] = table.get(node.branch.var, node.branch.dir);
    f[9] = table.get(node.branch.var,
                     node.branch.dir == BranchDir::down ? BranchDir::up : BranchDir::down);
  } else {  // root
    f[6] = 0.0;
    f[7] = 0.0;
    f[8] = 1.0;
    f[9] = 1.0;
  }

  f[10] = ctx.has_incumbent ? 1.0 : 0.0;
  if (!std::isfinite(ctx.pb)) {
    f[11] = 1.0;
  } else {
    double denom = std::max({std::fabs(ctx.pb), std::fabs(ctx.db), 1.0});
    f[11] = std::clamp((ctx.pb - ctx.db) / denom, 0.0, 1.0);
  }

  int nint = inst.num_integer_vars();
  int parent_frac =
      node.parent_id >= 0 ? tree[node.parent_id].lp.num_fractional : node.lp.num_fractional;
  f[12] = std::clamp(static_cast<double>(parent_frac) / std::max(1, nint), 0.0, 1.0);

  double lb_db = node.lower_bound - ctx.db;
  if (std::isfinite(ctx.pb))
    f[13] = std::clamp(lb_db / std::max(1.0, ctx.pb - ctx.db), 0.0, 10.0);
  else
    f[13] = std::clamp(lb_db / std::max(1.0, std::fabs(ctx.db)), 0.0, 10.0);
  return f;
}

NormStats fit_norm_stats(const std::vector<FeatureVector>& rows) {
  if (rows.empty()) throw std::invalid_argument("fit_norm_stats: empty dataset");
  NormStats st;
  st.mean.assign(kFeatureDim, 0.0);
  st.stdev.assign(kFeatureDim, 0.0);
  double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (int k = 0; k < kFeatureDim; ++k) st.mean[k] += r[k];
  for (int k = 0; k < kFeatureDim; ++k) st.mean[k] /= n;
  for (const auto& r : rows)
    for (int k = 0; k < kFeatureDim; ++k) {
      double d = r[k] - st.mean[k];
      st.stdev[k] += d * d;
    }
  for (int k = 0; k < kFeatureDim; ++k)
    st.stdev[k] = std::max(std::sqrt(st.stdev[k] / n), 1e-6);
  return st;
}

FeatureVector standardize(const FeatureVector& v, const NormStats& stats) {
  if (static_cast<int>(stats.mean.size()) != kFeatureDim ||
      static_cast<int>(stats.stdev.size()) != kFeatureDim)
    throw std::invalid_argument("standardize: stats dimension mismatch");
  FeatureVector out{};
  for (int k = 0; k < kFeatureDim; ++k) out[k] = (v[k] - stats.mean[k]) / stats.stdev[k];
  return out;
}

}  // namespace boundlab

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "boundlab/bnb.hpp"

namespace boundlab {

constexpr int kFeatureDim = 14;
constexpr int kFeatureSchemaVersion = 1;

using FeatureVector = std::array<double, kFeatureDim>;

// Field layout (fixed order, versioned as kFeatureSchemaVersion):
//   0 node_lowerbound_rel    (lb - db_root) / max(1, |db_root|)
//   1 node_estimate_rel      (estimate - db_root) / max(1, |db_root|)
//   2 node_depth_rel         depth / max(1, max depth seen so far)
//   3 type_child             one-hot
//   4 type_sibling           one-hot
//   5 type_other_leaf        one-hot
//   6 branch_frac            fractional part of the branching variable at the parent LP
//   7 branch_bound_lp_diff   |imposed bound - parent LP value of the branching variable|
//   8 pseudocost_dir         psi of the branching variable in the branched direction
//   9 pseudocost_other       psi in the opposite direction
//  10 has_incumbent          0/1
//  11 rel_gap                (pb - db)/max(|pb|,|db|,1), 1 while pb = +inf, clipped to [0,1]
//  12 parent_frac_count_rel  parent's num_fractional / number of integer variables
//  13 lb_minus_db_rel        (lb - db)/max(1, pb - db) clipped to [0,10] (pb finite),
//                            else (lb - db)/max(1,|db|) with the same clip
extern const std::array<const char*, kFeatureDim> kFeatureNames;

struct FeatureContext {
  double pb = kInf;
  double db = -kInf;
  double db_root = 0.0;
  int max_depth_seen = 0;
  bool has_incumbent = false;
  int focus_id = -1;
};

FeatureVector extract_features(const BnbNode& node, const FeatureContext& ctx,
                               const PseudocostTable& table, const MilpInstance& inst,
                               const std::vector<BnbNode>& tree);

struct NormStats {
  std::vector<double> mean;  // size kFeatureDim
  std::vector<double> stdev; // floored at 1e-6
};

NormStats fit_norm_stats(const std::vector<FeatureVector>& rows);
FeatureVector standardize(const FeatureVector& v, const NormStats& stats);

}  // namespace boundlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boundlab/bnb.hpp"
#include "boundlab/fusion.hpp"

namespace boundlab {

struct OracleLabeling {
  std::string instance_id;
  double optimal_objective = 0.0;
  std::vector<int> oracle_ids;   // root -> bpb node, connected path
  BranchHistory bpb_history;
};

struct LabelingOutcome {
  std::optional<OracleLabeling> labeling;  // empty: root-integral instance
  RunRecord run;                           // phase-1 record, reused by the replay
  bool skipped = false;
  std::string skip_reason;
};

// Phase 1 of the two-phase protocol: solve to optimality with FSB and the
// given selector, then mark the root-to-bpb path. Instances that hit a limit
// are skipped with a reason; a root-integral solve yields an empty labeling.
LabelingOutcome label_oracle_nodes(const MilpInstance& inst, const SolveLimits& limits,
                                   const std::string& selector_name = "bes");

// Phase 2, replayed from the phase-1 record (the engine is deterministic, so
// the log already encodes every queue state): at each queue state holding an
// oracle node, pair it with up to pair_cap sampled partners; every pair is
// also emitted order-swapped with swapped labels.
std::vector<PairSample> collect_pairs(const MilpInstance& inst, const LabelingOutcome& outcome,
                                      int pair_cap, uint64_t seed);

// Literal phase-2 re-solve; asserts node-by-node tree equality with phase 1.
// Returns false (with a message) on divergence.
bool resolve_check(const MilpInstance& inst, const LabelingOutcome& outcome,
                   const SolveLimits& limits, const std::string& selector_name,
                   std::string* message = nullptr);

struct DatasetSummary {
  long num_pairs = 0;       // pair records incl. swapped twins
  int num_instances = 0;
  int num_instances_skipped = 0;
  double oracle_fraction = 0.0;  // oracle nodes / all tree nodes, over used instances
};

struct DatasetHeader {
  int schema_version = 1;
  int feature_schema_version = kFeatureSchemaVersion;
  std::string family;
  std::string scale;
  int pair_cap = 32;
  uint64_t seed = 0;
};

class empty_dataset_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the two-phase protocol over every instance (OpenMP across instances,
// output buffered per instance and written in input order) and writes the
// JSONL dataset file. Throws empty_dataset_error when nothing was collected.
DatasetSummary build_dataset(const std::vector<MilpInstance>& instances,
                             const SolveLimits& limits, int pair_cap, uint64_t seed,
                             const DatasetHeader& header, const std::filesystem::path& out,
                             const std::string& selector_name = "bes");

struct Dataset {
  DatasetHeader header;
  std::vector<PairSample> pairs;
};

Dataset read_dataset(const std::filesystem::path& path);

}  // namespace boundlab

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boundlab/bnb.hpp"
#include "boundlab/fusion.hpp"

namespace boundlab {

struct MetricRow {
  std::string instance_id;
  std::string selector;
  SolveStatus status = SolveStatus::optimal;
  long nodes = 0;
  long bpb_nodes = 0;
  double bpb_time = 0.0;
  double solve_time = 0.0;
  double optimum = kInf;  // best known objective for the instance (canonical minimization)
};

struct GapCurve {
  std::string instance_id;
  std::string selector;
  std::vector<std::pair<long, double>> samples;  // (nodes_processed, primal_gap)
};

struct DistanceTrace {
  std::string instance_id;
  std::string selector;
  std::vector<std::pair<long, long>> samples;  // (selection index, D)
};

// |pb - opt| / max(|pb|, |opt|), clipped to [0,1]; 1 without an incumbent,
// 0 when pb matches opt within 1e-9 relative.
double primal_gap(std::optional<double> pb, double opt);

// Eq.-style distance: len(h_opt) + diff - LCS, with diff the number of
// variables branched in conflicting directions in the two histories
// (variables present in only one history do not count) and LCS the longest
// contiguous run of identical decisions.
long distance_to_opt(const BranchHistory& h_i, const BranchHistory& h_opt);

struct BenchOutput {
  std::vector<MetricRow> rows;
  std::vector<GapCurve> curves;
  std::vector<DistanceTrace> traces;
};

// Runs every (instance, selector) cell under identical limits. Cells are
// independent; the loop is OpenMP-parallel with index-addressed output.
// Per-cell failures land in the row status, never abort the batch.
BenchOutput run_benchmark(const std::vector<MilpInstance>& instances,
                          const std::vector<std::string>& selectors, const SolveLimits& limits,
                          const FusionEnsemble* model, int jobs = 0);

struct WinTable {
  std::vector<std::pair<std::string, int>> wins;  // selector -> count
  int ties_extra = 0;   // sum over instances of (tied winners - 1)
  int excluded = 0;     // instances solved by no selector
  int num_instances = 0;
};

WinTable count_wins(const std::vector<MetricRow>& rows);

struct ImportanceRow {
  int feature = 0;
  std::string name;
  double self_importance = 0.0;
  double sibling_importance = 0.0;
};

// Permutation importance: accuracy drop when feature k is shuffled across
// the held-out set, averaged over repeats; the self and sibling rows of the
// pair are permuted separately.
std::vector<ImportanceRow> permutation_importance(const FusionEnsemble& ensemble,
                                                  const std::vector<PairSample>& heldout,
                                                  int repeats, uint64_t seed);

// metrics.csv, gap_curves.csv, distance_traces.csv, wins.csv, importance.csv
// plus SVG plots (mean gap curves with 95% bands, mean distance curves,
// bpb-vs-solve-time scatter). Empty input emits header-only CSVs, no plots.
void emit_report(const BenchOutput& bench, const std::vector<ImportanceRow>& importance,
                 const std::filesystem::path& out_dir);

std::string metric_row_csv_header();
std::string metric_row_csv(const MetricRow& row);

// report re-emission support
BenchOutput read_report_csvs(const std::filesystem::path& dir);

}  // namespace boundlab

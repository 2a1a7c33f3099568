#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "boundlab/features.hpp"

namespace boundlab {

struct FusionConfig {
  int input_dim = kFeatureDim;
  int hidden_dim = 64;
  int num_blocks = 2;
  double dropout = 0.1;
  int ensemble_size = 5;   // M
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 256;
  int epochs = 50;
  int kfold = 5;           // K
  uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// Offsets into the flat parameter vector. Per block: the node-mix MLP acts
// across the 2-row node axis per feature column, the feature-mix MLP across
// the d-column feature axis per node row; each is affine -> rectifier
// (-> dropout in training) -> affine with a residual add. A tied scoring
// head maps each fused row to one scalar.
struct ParamLayout {
  int d = 0, h = 0, blocks = 0;
  int block_size = 0, total = 0;

  ParamLayout() = default;
  ParamLayout(int d_, int h_, int blocks_) : d(d_), h(h_), blocks(blocks_) {
    block_size = h * 2 + h + 2 * h + 2 + h * d + h + d * h + d;
    total = blocks * block_size + d + 1;
  }
  int block(int b) const { return b * block_size; }
  int w1(int b) const { return block(b); }               // h x 2
  int b1(int b) const { return w1(b) + h * 2; }          // h
  int w2(int b) const { return b1(b) + h; }              // 2 x h
  int b2(int b) const { return w2(b) + 2 * h; }          // 2
  int v1(int b) const { return b2(b) + 2; }              // h x d
  int c1(int b) const { return v1(b) + h * d; }          // h
  int v2(int b) const { return c1(b) + h; }              // d x h
  int c2(int b) const { return v2(b) + d * h; }          // d
  int head_w() const { return blocks * block_size; }     // d
  int head_b() const { return head_w() + d; }            // 1
};

struct FusionModel {
  ParamLayout layout;
  std::vector<double> params;

  FusionModel() = default;
  FusionModel(int d, int h, int blocks) : layout(d, h, blocks), params(layout.total, 0.0) {}

  void init_params(uint64_t seed);
};

// One training pair: standardized or raw 2 x d features plus binary labels.
struct PairSample {
  FeatureVector a{}, b{};
  int label_a = 0, label_b = 0;
  std::string instance_id;
  long queue_event_id = 0;
};

// Inference scores for one standardized pair; deterministic.
std::pair<double, double> forward_pair(const FusionModel& model, const FeatureVector& a,
                                       const FeatureVector& b);

// Training-mode forward (dropout active, seeded per sample).
std::pair<double, double> forward_pair_train(const FusionModel& model, const FeatureVector& a,
                                             const FeatureVector& b, double dropout,
                                             uint64_t sample_seed);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// MSE over all scored nodes of the batch (n = 2 * pairs) and its analytic
// gradient. Samples are processed in fixed-size chunks under an OpenMP loop
// and chunk partials are combined in chunk order, so the result is
// bit-identical for any thread count.
LossGrad loss_and_grad(const FusionModel& model, const std::vector<PairSample>& batch,
                       const std::vector<int>& idx, double dropout, uint64_t batch_seed);

namespace ref {
// Plain serial accumulation in sample order; reference for tests/kernel_bench.
LossGrad loss_and_grad_serial(const FusionModel& model, const std::vector<PairSample>& batch,
                              const std::vector<int>& idx, double dropout, uint64_t batch_seed);
}  // namespace ref

struct TrainCurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainOutcome {
  FusionModel model;
  std::vector<TrainCurvePoint> curve;
  double best_val_loss = kInf;
};

// Mini-batch gradient descent with momentum on pre-standardized samples.
// Returns the parameters of the best validation epoch.
TrainOutcome train(const std::vector<PairSample>& train_set,
                   const std::vector<PairSample>& val_set, const FusionConfig& cfg,
                   uint64_t member_seed);

class FusionEnsemble {
 public:
  FusionConfig config;
  NormStats stats;
  int feature_schema_version = kFeatureSchemaVersion;
  std::vector<FusionModel> members;

  // Standardizes the raw pair and averages member scores (exactly the
  // arithmetic mean of member forwards, in member order).
  std::pair<double, double> predict(const FeatureVector& raw_a, const FeatureVector& raw_b) const;
};

struct EnsembleTrainReport {
  std::vector<std::vector<TrainCurvePoint>> member_curves;     // winning fold
  std::vector<std::vector<std::string>> member_instances;      // winning fold shards
  std::vector<double> fold_accuracy;                           // per fold
  int winning_fold = 0;
  double val_accuracy = 0.0;
};

// Bagged ensemble with K-fold selection: per fold assignment, the training
// pool is split into M instance-disjoint shards (one member each); the
// ensemble with the best fold-validation pairwise accuracy wins.
FusionEnsemble train_ensemble(const std::vector<PairSample>& dataset, const FusionConfig& cfg,
                              EnsembleTrainReport* report = nullptr);

// Fraction of pairs ranking the labeled node first; ties count 0.5.
double pairwise_accuracy(const FusionEnsemble& ensemble, const std::vector<PairSample>& pairs);

void save_model(const FusionEnsemble& ensemble, const std::filesystem::path& path);
FusionEnsemble load_model(const std::filesystem::path& path);

// Batch scoring kernel (OpenMP over records, index-addressed output).
std::vector<std::pair<double, double>> score_pairs(const FusionEnsemble& ensemble,
                                                   const std::vector<PairSample>& pairs);

namespace ref {
std::vector<std::pair<double, double>> score_pairs_serial(const FusionEnsemble& ensemble,
                                                          const std::vector<PairSample>& pairs);
}  // namespace ref

}  // namespace boundlab

#include "boundlab/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "boundlab/rng.hpp"
#include "json.hpp"

namespace boundlab {

using nlohmann::json;

void FusionConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("fusion config: " + what); };
  if (input_dim < 1) fail("input_dim < 1");
  if (hidden_dim < 1) fail("hidden_dim < 1");
  if (num_blocks < 1) fail("num_blocks < 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout outside [0,1)");
  if (ensemble_size < 1) fail("ensemble_size < 1");
  if (kfold < 1) fail("kfold < 1");
  if (learning_rate <= 0.0) fail("learning_rate <= 0");
  if (batch_size < 1) fail("batch_size < 1");
  if (epochs < 0) fail("epochs < 0");
}

void FusionModel::init_params(uint64_t seed) {
  Rng rng(Rng::mix(seed, 0x1417ULL));
  auto fill = [&](int off, int count, int fan_in) {
    double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < count; ++i) params[off + i] = rng.uniform(-s, s);
  };
  const ParamLayout& L = layout;
  for (int b = 0; b < L.blocks; ++b) {
    fill(L.w1(b), L.h * 2, 2);
    fill(L.w2(b), 2 * L.h, L.h);
    fill(L.v1(b), L.h * L.d, L.d);
    fill(L.v2(b), L.d * L.h, L.h);
    // biases stay zero
  }
  fill(L.head_w(), L.d, L.d);
}

namespace {

struct BlockCache {
  std::vector<double> xin, p, m1, ahat, y, q, m2, ghat, z;
  void resize(int d, int h) {
    xin.resize(2 * d);
    p.resize(h * d);
    m1.resize(h * d);
    ahat.resize(h * d);
    y.resize(2 * d);
    q.resize(2 * h);
    m2.resize(2 * h);
    ghat.resize(2 * h);
    z.resize(2 * d);
  }
};

struct FwdCache {
  std::vector<BlockCache> blocks;
  double s[2] = {0.0, 0.0};
  void resize(const ParamLayout& L) {
    blocks.resize(L.blocks);
    for (auto& b : blocks) b.resize(L.d, L.h);
  }
};

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

// Forward pass over one 2 x d pair. In train mode dropout masks are drawn
// from rng in a fixed order (block, then node-mix column-major, then
// feat-mix row-major), so the stream is independent of scheduling.
void forward_impl(const FusionModel& model, std::span<const double> a, std::span<const double> b,
                  bool train_mode, double dropout, Rng* rng, FwdCache& cache) {
  const ParamLayout& L = model.layout;
  const double* th = model.params.data();
  const int d = L.d, h = L.h;
  double keep_scale = dropout > 0.0 ? 1.0 / (1.0 - dropout) : 1.0;

  std::vector<double>& x0 = cache.blocks[0].xin;
  std::copy(a.begin(), a.end(), x0.begin());
  std::copy(b.begin(), b.end(), x0.begin() + d);

  for (int blk = 0; blk < L.blocks; ++blk) {
    BlockCache& C = cache.blocks[blk];
    if (blk > 0) C.xin = cache.blocks[blk - 1].z;
    const double* W1 = th + L.w1(blk);
    const double* B1 = th + L.b1(blk);
    const double* W2 = th + L.w2(blk);
    const double* B2 = th + L.b2(blk);
    const double* V1 = th + L.v1(blk);
    const double* C1 = th + L.c1(blk);
    const double* V2 = th + L.v2(blk);
    const double* C2 = th + L.c2(blk);

    // node mix across the 2-row axis, per feature column
    for (int j = 0; j < d; ++j) {
      double u0 = C.xin[j], u1 = C.xin[d + j];
      double z0 = B2[0], z1 = B2[1];
      for (int k = 0; k < h; ++k) {
        double pre = W1[k * 2] * u0 + W1[k * 2 + 1] * u1 + B1[k];
        C.p[k * d + j] = pre;
        double m = 1.0;
        if (train_mode && dropout > 0.0) m = rng->next_unit() < dropout ? 0.0 : keep_scale;
        C.m1[k * d + j] = m;
        double act = relu(pre) * m;
        C.ahat[k * d + j] = act;
        z0 += W2[k] * act;
        z1 += W2[h + k] * act;
      }
      C.y[j] = u0 + z0;
      C.y[d + j] = u1 + z1;
    }
    // feature mix across the d-column axis, per node row
    for (int i = 0; i < 2; ++i) {
      const double* yrow = C.y.data() + i * d;
      for (int k = 0; k < h; ++k) {
        double pre = C1[k];
        const double* v1row = V1 + k * d;
        for (int j = 0; j < d; ++j) pre += v1row[j] * yrow[j];
        C.q[i * h + k] = pre;
        double m = 1.0;
        if (train_mode && dropout > 0.0) m = rng->next_unit() < dropout ? 0.0 : keep_scale;
        C.m2[i * h + k] = m;
        C.ghat[i * h + k] = relu(pre) * m;
      }
      for (int j = 0; j < d; ++j) {
        double t = C2[j];
        const double* v2row = V2 + j * h;
        const double* grow = C.ghat.data() + i * h;
        for (int k = 0; k < h; ++k) t += v2row[k] * grow[k];
        C.z[i * d + j] = yrow[j] + t;
      }
    }
  }
  const double* HW = th + L.head_w();
  double hb = th[L.head_b()];
  const std::vector<double>& zf = cache.blocks[L.blocks - 1].z;
  for (int i = 0; i < 2; ++i) {
    double s = hb;
    for (int j = 0; j < d; ++j) s += HW[j] * zf[i * d + j];
    cache.s[i] = s;
  }
}

// Backward pass; ds is d(loss)/d(score) for the two rows. Adds into grad.
void backward_impl(const FusionModel& model, const FwdCache& cache, const double ds[2],
                   double* grad) {
  const ParamLayout& L = model.layout;
  const double* th = model.params.data();
  const int d = L.d, h = L.h;

  std::vector<double> dz(2 * d), dy(2 * d), dxin(2 * d);
  const std::vector<double>& zf = cache.blocks[L.blocks - 1].z;
  const double* HW = th + L.head_w();
  for (int j = 0; j < d; ++j) {
    grad[L.head_w() + j] += ds[0] * zf[j] + ds[1] * zf[d + j];
    dz[j] = ds[0] * HW[j];
    dz[d + j] = ds[1] * HW[j];
  }
  grad[L.head_b()] += ds[0] + ds[1];

  std::vector<double> dq(h), dp(h);
  for (int blk = L.blocks - 1; blk >= 0; --blk) {
    const BlockCache& C = cache.blocks[blk];
    const double* W1 = th + L.w1(blk);
    const double* W2 = th + L.w2(blk);
    const double* V1 = th + L.v1(blk);
    const double* V2 = th + L.v2(blk);

    // feature mix backward
    for (int i = 0; i < 2; ++i) {
      const double* dt = dz.data() + i * d;  // dL/dt == dL/dz for the mix output
      const double* ghat = C.ghat.data() + i * h;
      for (int k = 0; k < h; ++k) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += V2[j * h + k] * dt[j];
        double dgh = acc * C.m2[i * h + k];
        dq[k] = C.q[i * h + k] > 0.0 ? dgh : 0.0;
      }
      for (int j = 0; j < d; ++j) {
        grad[L.c2(blk) + j] += dt[j];
        double* gv2 = grad + L.v2(blk) + j * h;
        for (int k = 0; k < h; ++k) gv2[k] += dt[j] * ghat[k];
      }
      const double* yrow = C.y.data() + i * d;
      for (int k = 0; k < h; ++k) {
        grad[L.c1(blk) + k] += dq[k];
        double* gv1 = grad + L.v1(blk) + k * d;
        for (int j = 0; j < d; ++j) gv1[j] += dq[k] * yrow[j];
      }
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < h; ++k) acc += V1[k * d + j] * dq[k];
        dy[i * d + j] = dz[i * d + j] + acc;  // residual
      }
    }

    // node mix backward, per feature column
    for (int j = 0; j < d; ++j) {
      double dz0 = dy[j], dz1 = dy[d + j];
      for (int k = 0; k < h; ++k) {
        double dah = W2[k] * dz0 + W2[h + k] * dz1;
        double da = dah * C.m1[k * d + j];
        dp[k] = C.p[k * d + j] > 0.0 ? da : 0.0;
      }
      grad[L.b2(blk)] += dz0;
      grad[L.b2(blk) + 1] += dz1;
      double* gw2 = grad + L.w2(blk);
      const double* ah = C.ahat.data();
      for (int k = 0; k < h; ++k) {
        double a = ah[k * d + j];
        gw2[k] += dz0 * a;
        gw2[h + k] += dz1 * a;
      }
      double u0 = C.xin[j], u1 = C.xin[d + j];
      double acc0 = 0.0, acc1 = 0.0;
      double* gw1 = grad + L.w1(blk);
      for (int k = 0; k < h; ++k) {
        grad[L.b1(blk) + k] += dp[k];
        gw1[k * 2] += dp[k] * u0;
        gw1[k * 2 + 1] += dp[k] * u1;
        acc0 += W1[k * 2] * dp[k];
        acc1 += W1[k * 2 + 1] * dp[k];
      }
      dxin[j] = dy[j] + acc0;        // residual
      dxin[d + j] = dy[d + j] + acc1;
    }
    dz = dxin;
  }
}

thread_local FwdCache tl_cache;

}  // namespace

std::pair<double, double> forward_pair(const FusionModel& model, const FeatureVector& a,
                                       const FeatureVector& b) {
  if (model.layout.d != kFeatureDim)
    throw std::invalid_argument("forward_pair: model input width differs from feature schema");
  tl_cache.resize(model.layout);
  forward_impl(model, a, b, false, 0.0, nullptr, tl_cache);
  return {tl_cache.s[0], tl_cache.s[1]};
}

std::pair<double, double> forward_pair_train(const FusionModel& model, const FeatureVector& a,
                                             const FeatureVector& b, double dropout,
                                             uint64_t sample_seed) {
  if (model.layout.d != kFeatureDim)
    throw std::invalid_argument("forward_pair_train: model input width differs from feature schema");
  tl_cache.resize(model.layout);
  Rng rng(sample_seed);
  forward_impl(model, a, b, true, dropout, &rng, tl_cache);
  return {tl_cache.s[0], tl_cache.s[1]};
}

namespace {

constexpr int kGradChunk = 32;

void accumulate_sample(const FusionModel& model, const PairSample& s, double dropout,
                       uint64_t sample_seed, double inv_n, FwdCache& cache, double* grad,
                       double* sq_sum) {
  Rng rng(sample_seed);
  forward_impl(model, s.a, s.b, dropout > 0.0, dropout, dropout > 0.0 ? &rng : nullptr, cache);
  double e0 = cache.s[0] - s.label_a;
  double e1 = cache.s[1] - s.label_b;
  *sq_sum += e0 * e0 + e1 * e1;
  double ds[2] = {2.0 * e0 * inv_n, 2.0 * e1 * inv_n};
  backward_impl(model, cache, ds, grad);
}

}  // namespace

LossGrad loss_and_grad(const FusionModel& model, const std::vector<PairSample>& batch,
                       const std::vector<int>& idx, double dropout, uint64_t batch_seed) {
  if (idx.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  int np = static_cast<int>(idx.size());
  double inv_n = 1.0 / (2.0 * np);
  int nchunks = (np + kGradChunk - 1) / kGradChunk;
  std::vector<std::vector<double>> partial(nchunks);
  std::vector<double> sq(nchunks, 0.0);

#pragma omp parallel for schedule(static)
  for (int c = 0; c < nchunks; ++c) {
    partial[c].assign(model.layout.total, 0.0);
    FwdCache cache;
    cache.resize(model.layout);
    int lo = c * kGradChunk, hi = std::min(np, lo + kGradChunk);
    for (int s = lo; s < hi; ++s)
      accumulate_sample(model, batch[idx[s]], dropout, Rng::mix(batch_seed, idx[s]), inv_n,
                        cache, partial[c].data(), &sq[c]);
  }

  LossGrad out;
  out.grad.assign(model.layout.total, 0.0);
  double total_sq = 0.0;
  for (int c = 0; c < nchunks; ++c) {
    total_sq += sq[c];
    const double* p = partial[c].data();
    for (int i = 0; i < model.layout.total; ++i) out.grad[i] += p[i];
  }
  out.loss = total_sq * inv_n;
  return out;
}

namespace ref {

LossGrad loss_and_grad_serial(const FusionModel& model, const std::vector<PairSample>& batch,
                              const std::vector<int>& idx, double dropout, uint64_t batch_seed) {
  if (idx.empty()) throw std::invalid_argument("loss_and_grad_serial: empty batch");
  double inv_n = 1.0 / (2.0 * idx.size());
  LossGrad out;
  out.grad.assign(model.layout.total, 0.0);
  FwdCache cache;
  cache.resize(model.layout);
  double sq = 0.0;
  for (int s : idx)
    accumulate_sample(model, batch[s], dropout, Rng::mix(batch_seed, s), inv_n, cache,
                      out.grad.data(), &sq);
  out.loss = sq * inv_n;
  return out;
}

}  // namespace ref

namespace {

// inference MSE with fixed-chunk ordered summation
double mse_inference(const FusionModel& model, const std::vector<PairSample>& set) {
  if (set.empty()) return 0.0;
  int np = static_cast<int>(set.size());
  int nchunks = (np + kGradChunk - 1) / kGradChunk;
  std::vector<double> sq(nchunks, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nchunks; ++c) {
    FwdCache cache;
    cache.resize(model.layout);
    int lo = c * kGradChunk, hi = std::min(np, lo + kGradChunk);
    for (int s = lo; s < hi; ++s) {
      forward_impl(model, set[s].a, set[s].b, false, 0.0, nullptr, cache);
      double e0 = cache.s[0] - set[s].label_a;
      double e1 = cache.s[1] - set[s].label_b;
      sq[c] += e0 * e0 + e1 * e1;
    }
  }
  double total = 0.0;
  for (double v : sq) total += v;
  return total / (2.0 * np);
}

}  // namespace

TrainOutcome train(const std::vector<PairSample>& train_set,
                   const std::vector<PairSample>& val_set, const FusionConfig& cfg,
                   uint64_t member_seed) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training shard");

  TrainOutcome out;
  out.model = FusionModel(cfg.input_dim, cfg.hidden_dim, cfg.num_blocks);
  out.model.init_params(member_seed);
  if (cfg.epochs == 0) return out;

  FusionModel best = out.model;
  std::vector<double> velocity(out.model.layout.total, 0.0);
  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffler(Rng::mix(member_seed, 0xe90c0000ULL + epoch));
    shuffler.shuffle(order);
    double epoch_sq = 0.0;
    long scored = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<int> idx(order.begin() + start, order.begin() + end);
      uint64_t batch_seed = Rng::mix(Rng::mix(member_seed, epoch), start);
      LossGrad lg = loss_and_grad(out.model, train_set, idx, cfg.dropout, batch_seed);
      if (!std::isfinite(lg.loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
      epoch_sq += lg.loss * (2.0 * idx.size());
      scored += 2 * static_cast<long>(idx.size());
      for (int i = 0; i < out.model.layout.total; ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * lg.grad[i];
        out.model.params[i] += velocity[i];
      }
    }
    TrainCurvePoint pt;
    pt.epoch = epoch;
    pt.train_loss = epoch_sq / scored;
    pt.val_loss = val_set.empty() ? pt.train_loss : mse_inference(out.model, val_set);
    if (!std::isfinite(pt.val_loss))
      throw std::runtime_error("train: non-finite validation loss at epoch " +
                               std::to_string(epoch));
    out.curve.push_back(pt);
    if (pt.val_loss < out.best_val_loss) {
      out.best_val_loss = pt.val_loss;
      best = out.model;
    }
  }
  out.model = std::move(best);
  return out;
}

std::pair<double, double> FusionEnsemble::predict(const FeatureVector& raw_a,
                                                  const FeatureVector& raw_b) const {
  if (feature_schema_version != kFeatureSchemaVersion)
    throw schema_version_error("predict: model feature schema " +
                               std::to_string(feature_schema_version) +
                               " does not match extractor version " +
                               std::to_string(kFeatureSchemaVersion));
  FeatureVector a = standardize(raw_a, stats);
  FeatureVector b = standardize(raw_b, stats);
  double sa = 0.0, sb = 0.0;
  for (const FusionModel& m : members) {
    auto [x, y] = forward_pair(m, a, b);
    sa += x;
    sb += y;
  }
  double inv = 1.0 / static_cast<double>(members.size());
  return {sa * inv, sb * inv};
}

std::vector<std::pair<double, double>> score_pairs(const FusionEnsemble& ensemble,
                                                   const std::vector<PairSample>& pairs) {
  std::vector<std::pair<double, double>> out(pairs.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(pairs.size()); ++i)
    out[i] = ensemble.predict(pairs[i].a, pairs[i].b);
  return out;
}

namespace ref {

std::vector<std::pair<double, double>> score_pairs_serial(const FusionEnsemble& ensemble,
                                                          const std::vector<PairSample>& pairs) {
  std::vector<std::pair<double, double>> out(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) out[i] = ensemble.predict(pairs[i].a, pairs[i].b);
  return out;
}

}  // namespace ref

double pairwise_accuracy(const FusionEnsemble& ensemble, const std::vector<PairSample>& pairs) {
  if (pairs.empty()) return 0.0;
  auto scores = score_pairs(ensemble, pairs);
  double acc = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    double so = pairs[i].label_a == 1 ? scores[i].first : scores[i].second;
    double sn = pairs[i].label_a == 1 ? scores[i].second : scores[i].first;
    if (so > sn)
      acc += 1.0;
    else if (so == sn)
      acc += 0.5;
  }
  return acc / static_cast<double>(pairs.size());
}

namespace {

std::vector<std::string> instance_order(const std::vector<PairSample>& ds) {
  std::vector<std::string> ids;
  std::map<std::string, int> seen;
  for (const PairSample& s : ds)
    if (seen.emplace(s.instance_id, 1).second) ids.push_back(s.instance_id);
  return ids;
}

std::vector<FeatureVector> feature_rows(const std::vector<PairSample>& set) {
  std::vector<FeatureVector> rows;
  rows.reserve(set.size() * 2);
  for (const PairSample& s : set) {
    rows.push_back(s.a);
    rows.push_back(s.b);
  }
  return rows;
}

std::vector<PairSample> standardize_set(const std::vector<PairSample>& set,
                                        const NormStats& stats) {
  std::vector<PairSample> out = set;
  for (PairSample& s : out) {
    s.a = standardize(s.a, stats);
    s.b = standardize(s.b, stats);
  }
  return out;
}

}  // namespace

FusionEnsemble train_ensemble(const std::vector<PairSample>& dataset, const FusionConfig& cfg,
                              EnsembleTrainReport* report) {
  cfg.validate();
  std::vector<std::string> ids = instance_order(dataset);
  int m = cfg.ensemble_size, kf = cfg.kfold;
  if (static_cast<int>(ids.size()) < std::max(kf, m + (kf > 1 ? 1 : 0)))
    throw std::invalid_argument("train_ensemble: dataset spans too few instances for M=" +
                                std::to_string(m) + ", K=" + std::to_string(kf));

  // index records by instance
  std::map<std::string, int> id_index;
  for (size_t q = 0; q < ids.size(); ++q) id_index[ids[q]] = static_cast<int>(q);
  std::vector<std::vector<int>> by_inst(ids.size());
  for (size_t r = 0; r < dataset.size(); ++r)
    by_inst[id_index[dataset[r].instance_id]].push_back(static_cast<int>(r));

  std::vector<int> perm(ids.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  Rng fold_rng(Rng::mix(cfg.seed, 0xf01dULL));
  fold_rng.shuffle(perm);

  FusionEnsemble best_ensemble;
  double best_acc = -1.0;
  int best_fold = 0;
  std::vector<std::vector<TrainCurvePoint>> best_curves;
  std::vector<std::vector<std::string>> best_shards;
  std::vector<double> fold_accs;

  int folds = kf;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<int> pool, holdout;
    for (size_t q = 0; q < perm.size(); ++q) {
      if (kf > 1 && static_cast<int>(q) % kf == fold)
        holdout.push_back(perm[q]);
      else
        pool.push_back(perm[q]);
    }
    if (static_cast<int>(pool.size()) < m)
      throw std::invalid_argument("train_ensemble: fold training pool smaller than M");

    std::vector<PairSample> pool_records;
    for (int q : pool)
      for (int r : by_inst[q]) pool_records.push_back(dataset[r]);
    NormStats stats = fit_norm_stats(feature_rows(pool_records));

    // instance-disjoint shards, one per member
    std::vector<std::vector<int>> shard_insts(m);
    for (size_t q = 0; q < pool.size(); ++q) shard_insts[q % m].push_back(pool[q]);

    FusionEnsemble ens;
    ens.config = cfg;
    ens.stats = stats;
    ens.members.resize(m);
    std::vector<std::vector<TrainCurvePoint>> curves(m);

#pragma omp parallel for schedule(dynamic)
    for (int mi = 0; mi < m; ++mi) {
      std::vector<PairSample> tr, va;
      const std::vector<int>& insts = shard_insts[mi];
      size_t val_insts = insts.size() >= 5 ? insts.size() / 5 : (insts.size() >= 2 ? 1 : 0);
      for (size_t q = 0; q < insts.size(); ++q) {
        bool is_val = q >= insts.size() - val_insts;
        for (int r : by_inst[insts[q]]) (is_val ? va : tr).push_back(dataset[r]);
      }
      TrainOutcome to = train(standardize_set(tr, stats), standardize_set(va, stats), cfg,
                              Rng::mix(Rng::mix(cfg.seed, fold), mi));
      ens.members[mi] = std::move(to.model);
      curves[mi] = std::move(to.curve);
    }

    double acc;
    if (kf > 1) {
      std::vector<PairSample> holdout_records;
      for (int q : holdout)
        for (int r : by_inst[q]) holdout_records.push_back(dataset[r]);
      acc = pairwise_accuracy(ens, holdout_records);
    } else {
      acc = pairwise_accuracy(ens, pool_records);  // in-sample; K=1 keeps everything
    }
    fold_accs.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best_fold = fold;
      best_ensemble = std::move(ens);
      best_curves = std::move(curves);
      best_shards.assign(m, {});
      for (int mi = 0; mi < m; ++mi)
        for (int q : shard_insts[mi]) best_shards[mi].push_back(ids[q]);
    }
  }

  if (report) {
    report->member_curves = std::move(best_curves);
    report->member_instances = std::move(best_shards);
    report->fold_accuracy = std::move(fold_accs);
    report->winning_fold = best_fold;
    report->val_accuracy = best_acc;
  }
  return best_ensemble;
}

// ---------------------------------------------------------------------------
// model file

void save_model(const FusionEnsemble& ensemble, const std::filesystem::path& path) {
  json j;
  j["schema_version"] = 1;
  j["feature_schema_version"] = ensemble.feature_schema_version;
  const FusionConfig& c = ensemble.config;
  j["config"] = {{"input_dim", c.input_dim},
                 {"hidden_dim", c.hidden_dim},
                 {"num_blocks", c.num_blocks},
                 {"dropout", c.dropout},
                 {"ensemble_size", c.ensemble_size},
                 {"learning_rate", c.learning_rate},
                 {"momentum", c.momentum},
                 {"batch_size", c.batch_size},
                 {"epochs", c.epochs},
                 {"kfold", c.kfold},
                 {"seed", c.seed}};
  j["norm_mean"] = ensemble.stats.mean;
  j["norm_std"] = ensemble.stats.stdev;
  j["members"] = json::array();
  for (const FusionModel& m : ensemble.members) j["members"].push_back(m.params);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << j.dump(1) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

FusionEnsemble load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  try {
    int sv = j.at("schema_version").get<int>();
    if (sv != 1)
      throw schema_version_error(path.string() + ": model schema_version " + std::to_string(sv) +
                                 " unsupported");
    FusionEnsemble e;
    e.feature_schema_version = j.at("feature_schema_version").get<int>();
    if (e.feature_schema_version != kFeatureSchemaVersion)
      throw schema_version_error(path.string() + ": feature schema " +
                                 std::to_string(e.feature_schema_version) +
                                 " does not match extractor version " +
                                 std::to_string(kFeatureSchemaVersion));
    const json& c = j.at("config");
    e.config.input_dim = c.at("input_dim").get<int>();
    e.config.hidden_dim = c.at("hidden_dim").get<int>();
    e.config.num_blocks = c.at("num_blocks").get<int>();
    e.config.dropout = c.at("dropout").get<double>();
    e.config.ensemble_size = c.at("ensemble_size").get<int>();
    e.config.learning_rate = c.at("learning_rate").get<double>();
    e.config.momentum = c.at("momentum").get<double>();
    e.config.batch_size = c.at("batch_size").get<int>();
    e.config.epochs = c.at("epochs").get<int>();
    e.config.kfold = c.at("kfold").get<int>();
    e.config.seed = c.at("seed").get<uint64_t>();
    e.stats.mean = j.at("norm_mean").get<std::vector<double>>();
    e.stats.stdev = j.at("norm_std").get<std::vector<double>>();
    for (const json& mp : j.at("members")) {
      FusionModel m(e.config.input_dim, e.config.hidden_dim, e.config.num_blocks);
      m.params = mp.get<std::vector<double>>();
      if (static_cast<int>(m.params.size()) != m.layout.total)
        throw parse_error(path.string() + ": member parameter count mismatch");
      e.members.push_back(std::move(m));
    }
    if (e.members.empty()) throw parse_error(path.string() + ": model file has no members");
    return e;
  } catch (const json::exception& err) {
    throw parse_error(path.string() + ": " + err.what());
  }
}

}  // namespace boundlab

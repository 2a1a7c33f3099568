// Compares the OpenMP kernels against their serial reference
// implementations: strong-branching probe evaluation, batch pair scoring and
// the batch loss/gradient. Checks agreement and prints timings.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "boundlab/bnb.hpp"
#include "boundlab/fusion.hpp"
#include "boundlab/milp.hpp"
#include "boundlab/rng.hpp"

using namespace boundlab;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<PairSample> synthetic_pairs(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<PairSample> out(n);
  for (PairSample& s : out) {
    for (int k = 0; k < kFeatureDim; ++k) {
      s.a[k] = rng.uniform(-1.5, 1.5);
      s.b[k] = rng.uniform(-1.5, 1.5);
    }
    s.label_a = rng.next_unit() < 0.5 ? 1 : 0;
    s.label_b = 1 - s.label_a;
  }
  return out;
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e18;
  for (int r = 0; r < reps; ++r) {
    double t0 = now();
    f();
    best = std::min(best, now() - t0);
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n");
#endif

  // --- strong branching probes ---
  {
    MilpInstance inst = generate_set_covering(60, 120, 0.10, 7);
    LpResult lp = solve_lp(inst, inst.var_lb, inst.var_ub);
    std::vector<int> cands = fractional_candidates(inst, lp);
    std::printf("\nfsb probes: %zu candidates on %s\n", cands.size(), inst.name.c_str());
    FsbResult par, ser;
    double tp = time_best_of(3, [&] {
      par = branch_full_strong(inst, lp, inst.var_lb, inst.var_ub, cands);
    });
    double ts = time_best_of(3, [&] {
      ser = ref::branch_full_strong_serial(inst, lp, inst.var_lb, inst.var_ub, cands);
    });
    bool same = par.chosen_var == ser.chosen_var &&
                par.down_lp.objective == ser.down_lp.objective &&
                par.up_lp.objective == ser.up_lp.objective;
    std::printf("  parallel %8.2f ms   serial %8.2f ms   speedup %.2fx   agree: %s\n",
                tp * 1e3, ts * 1e3, ts / tp, same ? "yes" : "NO");
  }

  // --- batch scoring ---
  {
    FusionConfig cfg;
    cfg.hidden_dim = 64;
    cfg.num_blocks = 2;
    FusionEnsemble ens;
    ens.config = cfg;
    ens.stats.mean.assign(kFeatureDim, 0.0);
    ens.stats.stdev.assign(kFeatureDim, 1.0);
    for (int m = 0; m < 5; ++m) {
      FusionModel fm(kFeatureDim, cfg.hidden_dim, cfg.num_blocks);
      fm.init_params(100 + m);
      ens.members.push_back(std::move(fm));
    }
    std::vector<PairSample> pairs = synthetic_pairs(20000, 42);
    std::printf("\nbatch scoring: %zu pairs x %zu members\n", pairs.size(),
                ens.members.size());
    std::vector<std::pair<double, double>> sp, ss;
    double tp = time_best_of(3, [&] { sp = score_pairs(ens, pairs); });
    double ts = time_best_of(3, [&] { ss = ref::score_pairs_serial(ens, pairs); });
    bool same = sp == ss;
    std::printf("  parallel %8.2f ms   serial %8.2f ms   speedup %.2fx   agree: %s\n",
                tp * 1e3, ts * 1e3, ts / tp, same ? "yes (bitwise)" : "NO");
  }

  // --- batch loss/gradient ---
  {
    FusionModel model(kFeatureDim, 64, 2);
    model.init_params(7);
    std::vector<PairSample> pairs = synthetic_pairs(4096, 43);
    std::vector<int> idx(pairs.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::printf("\nbatch loss+grad: %zu pairs, %d parameters\n", pairs.size(),
                model.layout.total);
    LossGrad gp, gs;
    double tp = time_best_of(3, [&] { gp = loss_and_grad(model, pairs, idx, 0.1, 99); });
    double ts = time_best_of(3, [&] {
      gs = ref::loss_and_grad_serial(model, pairs, idx, 0.1, 99);
    });
    double max_rel = 0.0;
    for (size_t i = 0; i < gp.grad.size(); ++i) {
      double den = std::max({std::fabs(gp.grad[i]), std::fabs(gs.grad[i]), 1e-12});
      max_rel = std::max(max_rel, std::fabs(gp.grad[i] - gs.grad[i]) / den);
    }
    std::printf(
        "  parallel %8.2f ms   serial %8.2f ms   speedup %.2fx   max rel diff %.2e\n",
        tp * 1e3, ts * 1e3, ts / tp, max_rel);
  }
  return 0;
}

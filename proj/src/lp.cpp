#include "boundlab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace boundlab {

namespace {

enum VarState : int { kBasic = 0, kAtLower, kAtUpper, kFreeZero };

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;

// Bounded-variable primal simplex with an explicit dense basis inverse.
// Columns: structural variables, then one ranged slack per row (a'x + s = b
// with s in [0,inf) / (-inf,0] / [0,0] for <= / >= / =), then phase-1
// artificials. Dantzig pricing with smallest-index tiebreaks; Bland's rule
// after 3*(m+n) degenerate pivots.
class Simplex {
 public:
  Simplex(const MilpInstance& inst, std::span<const double> llb, std::span<const double> lub)
      : inst_(inst), ns_(inst.num_vars), m_(inst.num_cons) {
    cols_.resize(ns_ + m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [j, a] : inst.cons[i].entries) cols_[j].emplace_back(i, a);
    lb_.assign(ns_ + m_, 0.0);
    ub_.assign(ns_ + m_, 0.0);
    for (int j = 0; j < ns_; ++j) {
      lb_[j] = llb[j];
      ub_[j] = lub[j];
    }
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      int s = ns_ + i;
      cols_[s].emplace_back(i, 1.0);
      b_[i] = inst.cons[i].rhs;
      switch (inst.cons[i].rel) {
        case Rel::le: lb_[s] = 0.0; ub_[s] = kInf; break;
        case Rel::ge: lb_[s] = -kInf; ub_[s] = 0.0; break;
        case Rel::eq: lb_[s] = 0.0; ub_[s] = 0.0; break;
      }
    }
  }

  LpResult run() {
    LpResult res;
    setup_phase1();
    RunOutcome ph1 = iterate(phase1_cost_, res.iterations);
    if (ph1 == RunOutcome::stalled) throw lp_stalled_error("lp: iteration limit in phase 1");
    if (phase1_objective() > kTol.feasibility) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // freeze artificials at zero
    for (int j = ns_ + m_; j < ncols(); ++j) {
      lb_[j] = 0.0;
      ub_[j] = 0.0;
      if (state_[j] != kBasic) state_[j] = kAtLower;
    }
    std::vector<double> cost(ncols(), 0.0);
    for (int j = 0; j < ns_; ++j) cost[j] = inst_.obj[j];
    RunOutcome ph2 = iterate(cost, res.iterations);
    if (ph2 == RunOutcome::stalled) throw lp_stalled_error("lp: iteration limit in phase 2");
    if (ph2 == RunOutcome::unbounded) {
      res.status = LpStatus::unbounded;
      return res;
    }
    res.status = LpStatus::optimal;
    res.x.resize(ns_);
    for (int j = 0; j < ns_; ++j) res.x[j] = value_of(j);
    double obj = 0.0;
    for (int j = 0; j < ns_; ++j) obj += inst_.obj[j] * res.x[j];
    res.objective = obj;
    res.num_fractional = 0;
    for (int j = 0; j < ns_; ++j)
      if (inst_.is_integer[j] && frac_dist(res.x[j]) > kTol.integrality) ++res.num_fractional;
    return res;
  }

 private:
  enum class RunOutcome { optimal, unbounded, stalled };

  int ncols() const { return static_cast<int>(cols_.size()); }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case kAtLower: return lb_[j];
      case kAtUpper: return ub_[j];
      default: return 0.0;
    }
  }

  double value_of(int j) const {
    if (state_[j] == kBasic) return xb_[row_of_[j]];
    return nonbasic_value(j);
  }

  void setup_phase1() {
    state_.assign(ncols(), kAtLower);
    for (int j = 0; j < ns_ + m_; ++j) {
      if (std::isfinite(lb_[j]))
        state_[j] = kAtLower;
      else if (std::isfinite(ub_[j]))
        state_[j] = kAtUpper;
      else
        state_[j] = kFreeZero;
    }
    // residual each row must absorb with nonbasics at their bounds
    std::vector<double> resid = b_;
    for (int j = 0; j < ns_; ++j) {
      double v = nonbasic_value(j);
      if (v != 0.0)
        for (const auto& [i, a] : cols_[j]) resid[i] -= a * v;
    }
    basis_.assign(m_, -1);
    xb_.assign(m_, 0.0);
    row_of_.assign(ncols(), -1);
    for (int i = 0; i < m_; ++i) {
      int s = ns_ + i;
      double r = resid[i];
      if (r >= lb_[s] - kTol.feasibility && r <= ub_[s] + kTol.feasibility) {
        make_basic(s, i, std::clamp(r, lb_[s], ub_[s]));
      } else {
        // slack to its nearest bound, artificial absorbs the rest
        double sv = r < lb_[s] ? lb_[s] : ub_[s];
        state_[s] = r < lb_[s] ? kAtLower : kAtUpper;
        double rest = r - sv;
        cols_.emplace_back();
        cols_.back().emplace_back(i, rest >= 0 ? 1.0 : -1.0);
        lb_.push_back(0.0);
        ub_.push_back(kInf);
        state_.push_back(kAtLower);
        row_of_.push_back(-1);
        make_basic(ncols() - 1, i, std::fabs(rest));
      }
    }
    phase1_cost_.assign(ncols(), 0.0);
    for (int j = ns_ + m_; j < ncols(); ++j) phase1_cost_[j] = 1.0;
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    // basis columns are +-unit vectors here; flip rows where needed
    for (int i = 0; i < m_; ++i) {
      double diag = cols_[basis_[i]][0].second;
      if (basis_[i] >= ns_ + m_ && diag < 0) binv_[static_cast<size_t>(i) * m_ + i] = -1.0;
    }
  }

  void make_basic(int j, int row, double value) {
    basis_[row] = j;
    row_of_[j] = row;
    state_[j] = kBasic;
    xb_[row] = value;
  }

  double phase1_objective() const {
    double v = 0.0;
    for (int j = ns_ + m_; j < ncols(); ++j) v += value_of(j);
    return v;
  }

  // binv_ is column-major: column k of B^{-1} lives at binv_[k*m .. k*m+m).
  void refactorize() {
    int n = m_;
    std::vector<double> mat(static_cast<size_t>(n) * n, 0.0);  // column-major B
    for (int i = 0; i < n; ++i)
      for (const auto& [r, a] : cols_[basis_[i]]) mat[static_cast<size_t>(i) * n + r] = a;
    std::vector<double> inv(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + i] = 1.0;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    // Gauss-Jordan with partial pivoting on the column-major layout
    for (int c = 0; c < n; ++c) {
      int piv = -1;
      double best = 0.0;
      for (int r = c; r < n; ++r) {
        double v = std::fabs(mat[static_cast<size_t>(c) * n + r]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (piv < 0 || best < 1e-12) throw lp_stalled_error("lp: singular basis on refactorize");
      if (piv != c) {
        for (int k = 0; k < n; ++k) {
          std::swap(mat[static_cast<size_t>(k) * n + piv], mat[static_cast<size_t>(k) * n + c]);
          std::swap(inv[static_cast<size_t>(k) * n + piv], inv[static_cast<size_t>(k) * n + c]);
        }
      }
      double d = mat[static_cast<size_t>(c) * n + c];
      for (int k = 0; k < n; ++k) {
        mat[static_cast<size_t>(k) * n + c] /= d;
        inv[static_cast<size_t>(k) * n + c] /= d;
      }
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = mat[static_cast<size_t>(c) * n + r];
        if (f == 0.0) continue;
        for (int k = 0; k < n; ++k) {
          mat[static_cast<size_t>(k) * n + r] -= f * mat[static_cast<size_t>(k) * n + c];
          inv[static_cast<size_t>(k) * n + r] -= f * inv[static_cast<size_t>(k) * n + c];
        }
      }
    }
    binv_ = std::move(inv);
    recompute_xb();
  }

  void recompute_xb() {
    std::vector<double> rhs = b_;
    for (int j = 0; j < ncols(); ++j) {
      if (state_[j] == kBasic) continue;
      double v = nonbasic_value(j);
      if (v != 0.0)
        for (const auto& [i, a] : cols_[j]) rhs[i] -= a * v;
    }
    xb_.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      double r = rhs[k];
      if (r == 0.0) continue;
      const double* col = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) xb_[i] += r * col[i];
    }
  }

  RunOutcome iterate(const std::vector<double>& cost, int& iter_counter) {
    const int iter_limit = 10000 + 50 * (m_ + ns_);
    const int bland_after = 3 * (m_ + ns_);
    int degenerate_streak = 0;
    bool bland = false;
    int since_refactor = 0;
    std::vector<double> y(m_), atil(m_);

    for (int iter = 0; iter < iter_limit; ++iter) {
      ++iter_counter;
      // y = c_B' B^{-1}
      for (int k = 0; k < m_; ++k) {
        double acc = 0.0;
        const double* col = &binv_[static_cast<size_t>(k) * m_];
        for (int i = 0; i < m_; ++i) {
          double cb = cost[basis_[i]];
          if (cb != 0.0) acc += cb * col[i];
        }
        y[k] = acc;
      }
      // pricing
      int enter = -1;
      double best_score = kReducedCostTol;
      int sigma = +1;
      for (int j = 0; j < ncols(); ++j) {
        if (state_[j] == kBasic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed
        double d = cost[j];
        for (const auto& [i, a] : cols_[j]) d -= y[i] * a;
        double score = 0.0;
        int dir = 0;
        if ((state_[j] == kAtLower || state_[j] == kFreeZero) && d < -kReducedCostTol) {
          score = -d;
          dir = +1;
        } else if ((state_[j] == kAtUpper || state_[j] == kFreeZero) && d > kReducedCostTol) {
          score = d;
          dir = -1;
        }
        if (dir == 0) continue;
        if (bland) {
          enter = j;
          sigma = dir;
          break;
        }
        if (score > best_score) {
          best_score = score;
          enter = j;
          sigma = dir;
        }
      }
      if (enter < 0) return RunOutcome::optimal;

      // atil = B^{-1} A_enter
      std::fill(atil.begin(), atil.end(), 0.0);
      for (const auto& [i, a] : cols_[enter]) {
        const double* col = &binv_[static_cast<size_t>(i) * m_];
        for (int r = 0; r < m_; ++r) atil[r] += a * col[r];
      }

      // ratio test: smallest step before a basic variable or the entering
      // variable itself hits a bound
      double t_best = kInf;
      int leave_row = -1;
      int leave_to_upper = 0;
      double span = ub_[enter] - lb_[enter];
      if (std::isfinite(span) && span < t_best) {
        t_best = span;
        leave_row = -2;  // bound flip
      }
      for (int r = 0; r < m_; ++r) {
        double dir = -sigma * atil[r];  // change of x_B[r] per unit step
        if (std::fabs(atil[r]) < kPivotTol) continue;
        double t;
        int to_upper;
        int jb = basis_[r];
        if (dir < 0) {
          if (!std::isfinite(lb_[jb])) continue;
          t = (xb_[r] - lb_[jb]) / (-dir);
          to_upper = 0;
        } else {
          if (!std::isfinite(ub_[jb])) continue;
          t = (ub_[jb] - xb_[r]) / dir;
          to_upper = 1;
        }
        if (t < 0) t = 0;  // basic slightly outside its bound: degenerate step
        bool take;
        if (bland) {
          take = t < t_best - 1e-12 ||
                 (t <= t_best + 1e-12 && (leave_row < 0 || basis_[r] < basis_[leave_row]));
        } else {
          take = t < t_best - 1e-12 ||
                 (t <= t_best + 1e-12 &&
                  (leave_row < 0 ||
                   std::fabs(atil[r]) > std::fabs(atil[leave_row]) + 1e-12 ||
                   (std::fabs(atil[r]) > std::fabs(atil[leave_row]) - 1e-12 &&
                    basis_[r] < basis_[leave_row])));
        }
        if (leave_row == -2 && t > t_best) take = false;
        if (take) {
          t_best = t;
          leave_row = r;
          leave_to_upper = to_upper;
        }
      }
      if (leave_row == -1) return RunOutcome::unbounded;

      if (t_best < 1e-12) {
        if (++degenerate_streak >= bland_after) bland = true;
      } else {
        degenerate_streak = 0;
      }

      // apply the step
      double step = sigma * t_best;
      for (int r = 0; r < m_; ++r) xb_[r] -= step * atil[r];
      if (leave_row == -2) {
        state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
        continue;
      }
      int leave = basis_[leave_row];
      double enter_value = nonbasic_value(enter) + step;
      state_[leave] = leave_to_upper ? kAtUpper : kAtLower;
      row_of_[leave] = -1;
      make_basic(enter, leave_row, enter_value);
      update_binv(leave_row, atil);
      if (++since_refactor >= 64) {
        refactorize();
        since_refactor = 0;
      }
    }
    return RunOutcome::stalled;
  }

  // product-form update: B^{-1} <- E B^{-1} with the eta column from atil
  void update_binv(int r, const std::vector<double>& atil) {
    double piv = atil[r];
    for (int k = 0; k < m_; ++k) {
      double* col = &binv_[static_cast<size_t>(k) * m_];
      double t = col[r];
      if (t == 0.0) continue;
      double pr = t / piv;
      col[r] = pr;
      for (int i = 0; i < m_; ++i)
        if (i != r) col[i] -= atil[i] * pr;
    }
  }

  const MilpInstance& inst_;
  int ns_, m_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lb_, ub_, b_;
  std::vector<double> phase1_cost_;
  std::vector<int> state_, basis_, row_of_;
  std::vector<double> binv_, xb_;
};

}  // namespace

LpResult solve_lp(const MilpInstance& inst, std::span<const double> local_lb,
                  std::span<const double> local_ub) {
  if (static_cast<int>(local_lb.size()) != inst.num_vars ||
      static_cast<int>(local_ub.size()) != inst.num_vars)
    throw std::invalid_argument("solve_lp: bound vector size mismatch");
  for (int j = 0; j < inst.num_vars; ++j) {
    if (local_lb[j] < inst.var_lb[j] - 1e-12 || local_ub[j] > inst.var_ub[j] + 1e-12)
      throw std::invalid_argument("solve_lp: local bounds exceed the instance box at column " +
                                  std::to_string(j));
    if (local_lb[j] > local_ub[j]) {
      LpResult res;
      res.status = LpStatus::infeasible;  // empty box
      return res;
    }
  }
  Simplex solver(inst, local_lb, local_ub);
  return solver.run();
}

ViolationReport check_lp_certificate(const MilpInstance& inst, const LpResult& res,
                                     std::span<const double> local_lb,
                                     std::span<const double> local_ub) {
  ViolationReport rep;
  for (int i = 0; i < inst.num_cons; ++i) {
    double ax = 0.0;
    for (const auto& [j, a] : inst.cons[i].entries) ax += a * res.x[j];
    double v = 0.0;
    switch (inst.cons[i].rel) {
      case Rel::le: v = std::max(0.0, ax - inst.cons[i].rhs); break;
      case Rel::ge: v = std::max(0.0, inst.cons[i].rhs - ax); break;
      case Rel::eq: v = std::fabs(ax - inst.cons[i].rhs); break;
    }
    if (v > rep.max_row_violation) {
      rep.max_row_violation = v;
      rep.worst_row = i;
    }
  }
  for (int j = 0; j < inst.num_vars; ++j) {
    double v = std::max(std::max(local_lb[j] - res.x[j], res.x[j] - local_ub[j]), 0.0);
    if (v > rep.max_bound_violation) {
      rep.max_bound_violation = v;
      rep.worst_var = j;
    }
  }
  return rep;
}

}  // namespace boundlab

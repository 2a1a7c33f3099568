#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "boundlab/milp.hpp"

namespace boundlab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solver tolerances, kept in one record so every module quotes the same
// numbers.
struct Tolerances {
  double feasibility = 1e-7;
  double integrality = 1e-6;
  double objective = 1e-9;
};

inline constexpr Tolerances kTol{};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;  // structural variables only; empty unless optimal
  double objective = 0.0;
  int iterations = 0;
  int num_fractional = 0;  // integer-flagged vars fractional beyond kTol.integrality
};

// Iteration limit exceeded. Callers treat this as a solve failure, never as
// infeasibility.
class lp_stalled_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bounded-variable primal simplex on the LP relaxation with the given local
// bound box. Deterministic: fixed pivot rule (Dantzig, index tiebreaks),
// Bland's rule after 3*(m+n) degenerate pivots. local_lb > local_ub on any
// coordinate classifies the box as infeasible directly.
LpResult solve_lp(const MilpInstance& inst, std::span<const double> local_lb,
                  std::span<const double> local_ub);

struct ViolationReport {
  double max_row_violation = 0.0;
  int worst_row = -1;
  double max_bound_violation = 0.0;
  int worst_var = -1;
};

// Reports the largest primal row/bound violations of an optimal result.
ViolationReport check_lp_certificate(const MilpInstance& inst, const LpResult& res,
                                     std::span<const double> local_lb,
                                     std::span<const double> local_ub);

// fractional part distance to the nearest integer
inline double frac_dist(double v) {
  double r = v - static_cast<long long>(v + (v >= 0 ? 0.5 : -0.5));
  return r < 0 ? -r : r;
}

}  // namespace boundlab

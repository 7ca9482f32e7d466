#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "tl1/penalty.hpp"
#include "tl1/sensing.hpp"

namespace tl1 {

// Difference-of-convex solvers for transformed-l1 sparse recovery.
//
// Unconstrained model:  min_x  1/2 ||Ax - y||_2^2 + lambda P_a(x)
// Constrained model:    min_x  P_a(x)  s.t.  Ax = y
//
// Both split P_a as (a+1)/a ||x||_1 - phi_a(x) and linearize the concave
// part per outer iteration; each convex subproblem is solved by ADMM with
// a cached factorization of the quadratic block.

enum class Model { unconstrained, constrained };

struct SolveOptions {
  double lambda = 1e-5;  // regularization weight (unconstrained model)
  double c = 1e-6;       // strong-convexity augmentation
  // ADMM penalty delta > 0. Unset picks the model default: 0.05 for the
  // unconstrained inner problem, 1.0 for the constrained one (small delta
  // starves its feasibility dual).
  std::optional<double> delta;
  double eps_outer = 1e-6;
  double eps_inner = 1e-7;
  int max_outer = 50;
  int max_inner = 5000;
  PenaltyParams penalty{1.0};
  Model model = Model::unconstrained;

  void validate() const;
};

// delta in effect for these options (explicit value or model default).
double resolved_delta(const SolveOptions& opts);

enum class SolveStatus { converged, max_iterations, diverged };

const char* to_string(SolveStatus s);

struct SolveResult {
  Vector x;
  std::vector<double> objective_trace;  // f at x^0, x^1, ... (outer iterates)
  std::vector<int> inner_iters;         // ADMM count per outer iteration
  double stationarity_residual = 0.0;
  SolveStatus status = SolveStatus::converged;
  int outer_iters = 0;
  double feasibility_gap = 0.0;   // ||Ax-y||_2 / max(||y||_2, 1e-300)
  std::string iterate_kind = "z"; // reported primal is the thresholded iterate
};

// Cached solver for (A^t A + sigma I) x = b, sigma > 0. For M >= N this is
// a direct LLT of the N x N system; for M < N the same system is solved
// through the M x M dual factor (A A^t + sigma I) via
//   (A^t A + sigma I)^{-1} b = (b - A^t (A A^t + sigma I)^{-1} A b) / sigma,
// which keeps the per-solve cost at two mat-vecs. Immutable after
// construction and shareable across threads. Holds a reference to `a`,
// which must outlive the cache.
class FactorizationCache {
 public:
  FactorizationCache(const Matrix& a, double sigma);

  Vector solve(const Vector& rhs) const;

  // Allocation-free variant for inner loops. `out` must not alias `rhs`;
  // `scratch_m` is clobbered and must have M entries.
  void solve_into(const Vector& rhs, Vector& out, Vector& scratch_m) const;

  double sigma() const { return sigma_; }
  bool dual_mode() const { return dual_; }

  // Relative reconstruction error ||L L^t - K|| / ||K|| of the factored
  // matrix (primal or dual form, whichever was factored).
  double factor_error() const;

 private:
  const Matrix* a_;
  double sigma_;
  bool dual_;
  Matrix gram_;  // factored matrix K
  Eigen::LLT<Matrix> llt_;
};

// Warm-start state threaded through the inner solves of one DCA run.
struct AdmmState {
  Vector x, z, u;
  Vector v;  // equality-constraint multiplier (constrained model only)
};

// 1/2 ||Ax-y||^2 + lambda P_a(x).
double objective(const Vector& x, const Problem& prob,
                 const SolveOptions& opts);

// Approximately minimizes the DCA subproblem
//   1/2 x^t (A^t A + 2cI) x - <x, vn + A^t y> + lambda (a+1)/a ||x||_1
// by ADMM, warm-started from `warm` (updated in place):
//   x-solve against `cache` (sigma = 2c + delta), rhs A^t y + vn + dz - u
//   z    = shrink(x + u/delta, lambda (a+1)/(a delta))
//   u   += delta (x - z)
// Stops when max(||x_+ - x||, ||x_+ - z_+||) <= eps_inner or at the cap.
// Returns the z-iterate, which is exactly sparse.
Vector admm_subproblem(const Vector& vn, const Problem& prob,
                       const SolveOptions& opts,
                       const FactorizationCache& cache, AdmmState& warm,
                       int* iters = nullptr);

// Outer DCA loop for the unconstrained model: x^0 = 0,
// vn = lambda grad phi_a(x^n) + 2c x^n, subproblem above, stop when
// ||x^{n+1} - x^n||_2 <= eps_outer.
SolveResult solve_unconstrained(const Problem& prob, const SolveOptions& opts);

// Outer DCA loop for the constrained model (no lambda): z = grad phi_a(x^n),
// inner ADMM on  min (a+1)/a ||x||_1 - <z, x>  s.t. Ax = y  with duals
// (u, v) and a cached (A^t A + I) factor.
SolveResult solve_constrained(const Problem& prob, const SolveOptions& opts);

// Same pipeline with the plain l1 penalty (phi term zero, slope 1);
// dispatches on opts.model.
SolveResult solve_l1_baseline(const Problem& prob, const SolveOptions& opts);

SolveResult solve(const Problem& prob, const SolveOptions& opts);

// max-norm distance from -A^t(Ax - y) to lambda dP_a(x): at nonzero
// coordinates the gap to the singleton value, at zero coordinates the
// excess of |A^t(Ax-y)|_i over lambda (a+1)/a clamped at 0.
double stationarity_residual(const Vector& x, const Problem& prob,
                             const SolveOptions& opts);

}  // namespace tl1

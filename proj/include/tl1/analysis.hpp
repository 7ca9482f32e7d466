#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tl1/sensing.hpp"
#include "tl1/solver.hpp"

namespace tl1 {

// Certified lower bound on the s-restricted isometry constant delta_s:
// max over visited supports T of max(lmax(A_T^t A_T) - 1, 1 - lmin).
// Exhaustive enumeration when C(N,s) is small enough, otherwise sampled,
// so delta_lower <= delta_s with equality guaranteed only when exhaustive.
struct RipEstimate {
  int s = 0;
  double delta_lower = 0.0;
  std::int64_t supports_visited = 0;
  bool exhaustive = false;
};

RipEstimate estimate_rip(const Matrix& a, int s, std::int64_t samples,
                         std::uint64_t seed);

// Root a* of f(a) = a^2/(a+1)^2 * R/|T| * (1 - delta_{R+|T|}) - 1 - delta_R,
// via the closed form t = sqrt((1+delta_R)|T| / (R (1-delta_{R+|T|}))),
// a* = t/(1-t). Returns nullopt when t >= 1, i.e. when the recovery
// condition delta_R + R/|T| delta_{R+|T|} < R/|T| - 1 fails.
std::optional<double> critical_a(double delta_r, double delta_rt, int r_size,
                                 int t_size);

// Evaluates the f(a) above (used to cross-check critical_a by bisection).
double critical_a_gap(double a, double delta_r, double delta_rt, int r_size,
                      int t_size);

// Rescales y by C = |x|_inf / a * (a|T| + |T| - 1) so that P_a(x/C) <= 1.
// |x|_inf comes from the ground truth when present, otherwise from the
// minimum-norm least-squares solution. Returns the scaled problem and C.
std::pair<Problem, double> scale_problem(const Problem& prob, int t_size,
                                         const PenaltyParams& p);

// The four sufficient conditions for beta to be a (strict) local minimizer
// of the unconstrained model, evaluated at the numerical support
// T = {i : |beta_i| > support_threshold}:
//   (i)   sigma_min(A_T) > 1e-10
//   (ii)  || (A^t(y - A beta) / lambda)_{T^c} ||_inf < (a+1)/a
//   (iii) || Q beta_T - A_T^t y + lambda w_T ||_inf <= stationarity_tol
//   (iv)  lmin(Q) - lambda kappa(rho_a; beta_T) >= 0 (strict for strict min)
struct Condition2Report {
  enum class Verdict { strict_local_min, local_min, fails };

  std::vector<int> support;
  bool q_nonsingular = false;
  double sigma_min = 0.0;
  double dual_bound = 0.0;   // ||z_{T^c}||_inf
  double dual_limit = 0.0;   // (a+1)/a
  double stationarity_gap = 0.0;
  double eigen_margin = 0.0;
  std::array<bool, 4> passed{false, false, false, false};
  Verdict verdict = Verdict::fails;

  std::string to_text() const;
  std::string csv_row() const;
  static std::string csv_header();
};

Condition2Report check_condition2(const Vector& beta, const Problem& prob,
                                  const SolveOptions& opts,
                                  double support_threshold = 1e-6,
                                  double stationarity_tol = 1e-4);

// Exhaustive l0 oracle: enumerates supports by increasing size up to k_max,
// solves least squares on each, returns the sparsest x with
// ||A_T x_T - y||_2 <= 1e-9. Throws when the budget (N <= 20, k_max <= 4)
// is exceeded or no exact solution exists.
Vector brute_force_l0(const Problem& prob, int k_max);

// Smallest singular value of the columns of A on the numerical support of
// x; +inf for an empty support. Diagnostic companion of the full-rank
// local-minimizer property.
double support_min_singular_value(const Problem& prob, const Vector& x,
                                  double support_threshold = 1e-6);

std::string to_text(const RipEstimate& est);
std::string csv_row(const RipEstimate& est);

}  // namespace tl1

#pragma once

#include <Eigen/Core>

namespace tl1 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Shape parameter of the transformed-l1 penalty
//
//   rho_a(t) = (a+1)|t| / (a+|t|),  a > 0.
//
// Small a pushes the penalty toward the l0 indicator, large a toward |t|.
struct PenaltyParams {
  double a;

  explicit PenaltyParams(double a_);

  // rho_a'(0+) = (a+1)/a, the slope of the convex majorant; always > 1.
  double slope_at_zero() const { return (a + 1.0) / a; }
};

// rho_a(t). Even in t, strictly increasing in |t|, range [0, a+1).
double rho(double t, const PenaltyParams& p);

// rho_a'(t) = a(a+1)/(a+t)^2 for t >= 0; decreasing, rho'(0+) = (a+1)/a.
double rho_prime(double t, const PenaltyParams& p);

// P_a(x) = sum_i rho_a(x_i). Zero iff x = 0.
double penalty_sum(const Vector& x, const PenaltyParams& p);

// phi_a(x) = (a+1)/a * ||x||_1 - P_a(x) = sum_i (a+1) x_i^2 / (a (a+|x_i|)).
// The differentiable convex part of the DC split of P_a.
double phi(const Vector& x, const PenaltyParams& p);

// Gradient of phi_a; coordinate-wise
//   sign(x_i) (a+1)|x_i|(|x_i|+2a) / (a (a+|x_i|)^2),
// and exactly 0 at x_i = 0 (phi is differentiable there).
Vector phi_grad(const Vector& x, const PenaltyParams& p);

// Soft threshold: shrink(x,r)_i = sgn(x_i) max{|x_i| - r, 0}, r >= 0.
Vector shrink(const Vector& x, double r);

// Per-coordinate subdifferential of P_a as closed intervals [lo_i, hi_i].
// Nonzero coordinates give singletons (lo == hi).
struct SubgradientSet {
  Vector lo;
  Vector hi;

  bool is_singleton(Eigen::Index i) const { return lo[i] == hi[i]; }

  // Coordinate-wise membership of g, with slack tol on each bound.
  bool contains(const Vector& g, double tol = 0.0) const;

  // max-norm distance from g to the set (0 when contained).
  double distance(const Vector& g) const;
};

// dP_a(x) = (a+1)/a d||x||_1 - grad phi_a(x): the singleton
// sign(x_i) a(a+1)/(a+|x_i|)^2 at x_i != 0, the interval
// [-(a+1)/a, (a+1)/a] at x_i = 0.
SubgradientSet tl1_subdifferential(const Vector& x, const PenaltyParams& p);

// Maximum concavity kappa(rho_a) = sup -(rho'(t2)-rho'(t1))/(t2-t1)
// over 0 < t1 < t2, which equals -rho''(0+) = 2(a+1)/a^2.
double max_concavity(const PenaltyParams& p);

// Local concavity kappa(rho_a; b) = max_j -rho''(|b_j|)
//                                 = max_j 2a(a+1)/(a+|b_j|)^3.
// Every entry of b must be nonzero.
double local_concavity(const Vector& b, const PenaltyParams& p);

}  // namespace tl1

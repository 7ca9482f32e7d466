#include "tl1/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace tl1 {

void SolveOptions::validate() const {
  if (model == Model::unconstrained && !(lambda > 0.0))
    throw std::invalid_argument("SolveOptions: lambda > 0 required");
  if (!(c >= 0.0)) throw std::invalid_argument("SolveOptions: c >= 0");
  if (delta && !(*delta > 0.0))
    throw std::invalid_argument("SolveOptions: delta > 0");
  if (!(eps_outer > 0.0) || !(eps_inner > 0.0))
    throw std::invalid_argument("SolveOptions: tolerances > 0");
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("SolveOptions: iteration caps >= 1");
}

double resolved_delta(const SolveOptions& opts) {
  if (opts.delta) return *opts.delta;
  return opts.model == Model::constrained ? 1.0 : 0.05;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::max_iterations:
      return "max-iterations";
    case SolveStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

FactorizationCache::FactorizationCache(const Matrix& a, double sigma)
    : a_(&a), sigma_(sigma), dual_(a.rows() < a.cols()) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("FactorizationCache: sigma > 0 required");
  if (dual_) {
    gram_.noalias() = a * a.transpose();
  } else {
    gram_.noalias() = a.transpose() * a;
  }
  gram_.diagonal().array() += sigma;
  llt_.compute(gram_);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("FactorizationCache: factorization failed");
}

void FactorizationCache::solve_into(const Vector& rhs, Vector& out,
                                    Vector& scratch_m) const {
  if (dual_) {
    scratch_m.noalias() = (*a_) * rhs;
    llt_.solveInPlace(scratch_m);
    out.noalias() = a_->transpose() * scratch_m;
    out = (rhs - out) / sigma_;
  } else {
    out = rhs;
    llt_.solveInPlace(out);
  }
}

Vector FactorizationCache::solve(const Vector& rhs) const {
  Vector out(rhs.size());
  Vector scratch(a_->rows());
  solve_into(rhs, out, scratch);
  return out;
}

double FactorizationCache::factor_error() const {
  const Matrix l = llt_.matrixL();
  return (l * l.transpose() - gram_).norm() / gram_.norm();
}

double objective(const Vector& x, const Problem& prob,
                 const SolveOptions& opts) {
  if (x.size() != prob.a.cols())
    throw std::invalid_argument("objective: dimension mismatch");
  return 0.5 * (prob.a * x - prob.y).squaredNorm() +
         opts.lambda * penalty_sum(x, opts.penalty);
}

namespace {

// tl1 = false switches the whole pipeline to the plain l1 penalty:
// slope 1 and no concave linearization term.
struct PenaltyModel {
  bool tl1 = true;
  double slope = 2.0;
};

PenaltyModel make_model(const SolveOptions& opts, bool tl1) {
  return PenaltyModel{tl1, tl1 ? opts.penalty.slope_at_zero() : 1.0};
}

double model_objective(const Vector& x, const Problem& prob,
                       const SolveOptions& opts, const PenaltyModel& pm) {
  const double fit = 0.5 * (prob.a * x - prob.y).squaredNorm();
  if (opts.model == Model::constrained)
    return pm.tl1 ? penalty_sum(x, opts.penalty) : x.lpNorm<1>();
  return fit + opts.lambda * (pm.tl1 ? penalty_sum(x, opts.penalty)
                                     : x.lpNorm<1>());
}

double feasibility_gap(const Vector& x, const Problem& prob) {
  const double yn = prob.y.norm();
  return (prob.a * x - prob.y).norm() / (yn > 0.0 ? yn : 1.0);
}

// Distance of -A^t(Ax-y) (unconstrained) or -A^t v (constrained) to the
// penalty subdifferential scaled by `weight`.
double residual_to_subdiff(const Vector& g, const Vector& x,
                           const SolveOptions& opts, const PenaltyModel& pm,
                           double weight) {
  const double bound = weight * pm.slope;
  double res = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double r;
    if (x[i] != 0.0) {
      const double sub =
          pm.tl1 ? rho_prime(std::abs(x[i]), opts.penalty) : 1.0;
      r = std::abs(g[i] + (x[i] > 0.0 ? 1.0 : -1.0) * weight * sub);
    } else {
      r = std::max(std::abs(g[i]) - bound, 0.0);
    }
    res = std::max(res, r);
  }
  return res;
}

Vector admm_unconstrained_impl(const Vector& vn, const Problem& prob,
                               const SolveOptions& opts, double delta,
                               const FactorizationCache& cache,
                               AdmmState& warm, const PenaltyModel& pm,
                               const Vector& aty, int* iters_out) {
  const Eigen::Index n = prob.a.cols();
  if (warm.x.size() != n) {
    warm.x = Vector::Zero(n);
    warm.z = Vector::Zero(n);
    warm.u = Vector::Zero(n);
  }
  const double threshold = opts.lambda * pm.slope / delta;
  const Vector rhs_base = aty + vn;
  Vector rhs(n), x_new(n), scratch_m(prob.a.rows());
  int used = opts.max_inner;
  for (int k = 0; k < opts.max_inner; ++k) {
    rhs = rhs_base + delta * warm.z - warm.u;
    cache.solve_into(rhs, x_new, scratch_m);
    const double dx = (x_new - warm.x).norm();
    warm.x.swap(x_new);
    rhs = warm.x + warm.u / delta;  // reuse as shrink argument
    Vector z_new = shrink(rhs, threshold);
    const double dxz = (warm.x - z_new).norm();
    warm.u += delta * (warm.x - z_new);
    warm.z = std::move(z_new);
    if (std::max(dx, dxz) <= opts.eps_inner) {
      used = k + 1;
      break;
    }
  }
  if (iters_out) *iters_out = used;
  return warm.z;
}

SolveResult solve_unconstrained_impl(const Problem& prob,
                                     const SolveOptions& opts, bool tl1) {
  opts.validate();
  if (prob.a.rows() != prob.y.size())
    throw std::invalid_argument("solve: dimension mismatch");
  const PenaltyModel pm = make_model(opts, tl1);
  const double delta = resolved_delta(opts);
  const Vector aty = prob.a.transpose() * prob.y;
  const FactorizationCache cache(prob.a, 2.0 * opts.c + delta);

  SolveResult res;
  AdmmState state;
  Vector x = Vector::Zero(prob.a.cols());
  res.objective_trace.push_back(model_objective(x, prob, opts, pm));
  res.status = SolveStatus::max_iterations;
  Vector vn(prob.a.cols());
  for (int n = 0; n < opts.max_outer; ++n) {
    if (pm.tl1) {
      vn = opts.lambda * phi_grad(x, opts.penalty) + 2.0 * opts.c * x;
    } else {
      vn = 2.0 * opts.c * x;
    }
    int inner = 0;
    Vector x_next = admm_unconstrained_impl(vn, prob, opts, delta, cache,
                                            state, pm, aty, &inner);
    res.inner_iters.push_back(inner);
    ++res.outer_iters;
    const double f = model_objective(x_next, prob, opts, pm);
    res.objective_trace.push_back(f);
    const double diff = (x_next - x).norm();
    x = std::move(x_next);
    if (!std::isfinite(f)) {
      res.status = SolveStatus::diverged;
      break;
    }
    if (diff <= opts.eps_outer) {
      res.status = SolveStatus::converged;
      break;
    }
  }
  res.x = std::move(x);
  Vector g = prob.a.transpose() * (prob.a * res.x - prob.y);
  res.stationarity_residual =
      residual_to_subdiff(g, res.x, opts, pm, opts.lambda);
  res.feasibility_gap = feasibility_gap(res.x, prob);
  return res;
}

SolveResult solve_constrained_impl(const Problem& prob,
                                   const SolveOptions& opts, bool tl1) {
  opts.validate();
  if (prob.a.rows() != prob.y.size())
    throw std::invalid_argument("solve: dimension mismatch");
  const PenaltyModel pm = make_model(opts, tl1);
  const double delta = resolved_delta(opts);
  const Eigen::Index n = prob.a.cols();
  const Vector aty = prob.a.transpose() * prob.y;
  const FactorizationCache cache(prob.a, 1.0);
  const double threshold = pm.slope / delta;

  SolveResult res;
  Vector x = Vector::Zero(n);
  res.objective_trace.push_back(model_objective(x, prob, opts, pm));
  res.status = SolveStatus::max_iterations;

  Vector zgrad = Vector::Zero(n);
  Vector x_in(n), w(n), u(n), atv(n), rhs(n), x_new(n), w_new(n);
  Vector v_dual(prob.a.rows());
  Vector residual_m(prob.a.rows()), scratch_m(prob.a.rows());
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    if (pm.tl1) zgrad = phi_grad(x, opts.penalty);
    // Inner ADMM, fresh multipliers per outer step.
    x_in = x;
    w = x;
    u.setZero();
    v_dual.setZero();
    atv.setZero();
    int inner = opts.max_inner;
    for (int j = 0; j < opts.max_inner; ++j) {
      rhs = w + aty + (zgrad - u - atv) / delta;
      cache.solve_into(rhs, x_new, scratch_m);
      const double dx = (x_new - x_in).norm();
      x_in = x_new;
      rhs = x_in + u / delta;
      w_new = shrink(rhs, threshold);
      const double dxw = (x_in - w_new).norm();
      u += delta * (x_in - w_new);
      w.swap(w_new);
      residual_m.noalias() = prob.a * x_in;
      residual_m -= prob.y;
      v_dual += delta * residual_m;
      atv.noalias() += delta * (prob.a.transpose() * residual_m);
      if (std::max(dx, dxw) <= opts.eps_inner) {
        inner = j + 1;
        break;
      }
    }
    res.inner_iters.push_back(inner);
    ++res.outer_iters;
    const double f = model_objective(w, prob, opts, pm);
    res.objective_trace.push_back(f);
    const double diff = (w - x).norm();
    x = w;
    if (!std::isfinite(f)) {
      res.status = SolveStatus::diverged;
      break;
    }
    if (diff <= opts.eps_outer) {
      res.status = SolveStatus::converged;
      break;
    }
  }
  res.x = std::move(x);
  // First-order measure for the equality-constrained model:
  // 0 in dP_a(x) + A^t v at a stationary pair (x, v).
  res.stationarity_residual =
      residual_to_subdiff(atv, res.x, opts, pm, 1.0);
  res.feasibility_gap = feasibility_gap(res.x, prob);
  return res;
}

}  // namespace

Vector admm_subproblem(const Vector& vn, const Problem& prob,
                       const SolveOptions& opts,
                       const FactorizationCache& cache, AdmmState& warm,
                       int* iters) {
  opts.validate();
  if (vn.size() != prob.a.cols())
    throw std::invalid_argument("admm_subproblem: dimension mismatch");
  const Vector aty = prob.a.transpose() * prob.y;
  return admm_unconstrained_impl(vn, prob, opts, resolved_delta(opts), cache,
                                 warm, make_model(opts, true), aty, iters);
}

SolveResult solve_unconstrained(const Problem& prob,
                                const SolveOptions& opts) {
  return solve_unconstrained_impl(prob, opts, /*tl1=*/true);
}

SolveResult solve_constrained(const Problem& prob, const SolveOptions& opts) {
  return solve_constrained_impl(prob, opts, /*tl1=*/true);
}

SolveResult solve_l1_baseline(const Problem& prob, const SolveOptions& opts) {
  return opts.model == Model::constrained
             ? solve_constrained_impl(prob, opts, /*tl1=*/false)
             : solve_unconstrained_impl(prob, opts, /*tl1=*/false);
}

SolveResult solve(const Problem& prob, const SolveOptions& opts) {
  return opts.model == Model::constrained ? solve_constrained(prob, opts)
                                          : solve_unconstrained(prob, opts);
}

double stationarity_residual(const Vector& x, const Problem& prob,
                             const SolveOptions& opts) {
  if (x.size() != prob.a.cols())
    throw std::invalid_argument("stationarity_residual: dimension mismatch");
  const Vector g = prob.a.transpose() * (prob.a * x - prob.y);
  return residual_to_subdiff(g, x, opts, make_model(opts, true), opts.lambda);
}

}  // namespace tl1

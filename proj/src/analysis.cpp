#include "tl1/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "tl1/rng.hpp"

namespace tl1 {

namespace {

constexpr std::int64_t kExhaustiveLimit = 100000;

// C(n,k), saturating just above `cap`.
std::int64_t binomial_capped(int n, int k, std::int64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (r > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::int64_t>(std::llround(r));
}

Matrix columns(const Matrix& a, const std::vector<int>& idx) {
  Matrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
  return sub;
}

double support_delta(const Matrix& a, const std::vector<int>& idx) {
  const Matrix sub = columns(a, idx);
  const Matrix gram = sub.transpose() * sub;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  return std::max(lmax - 1.0, 1.0 - lmin);
}

std::vector<int> random_subset(rng::SplitMix64& g, int n, int k) {
  std::vector<int> s;
  s.reserve(static_cast<std::size_t>(k));
  for (int i = n - k; i < n; ++i) {
    const int j = static_cast<int>(g.below(static_cast<std::uint64_t>(i) + 1));
    if (std::find(s.begin(), s.end(), j) == s.end())
      s.push_back(j);
    else
      s.push_back(i);
  }
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

RipEstimate estimate_rip(const Matrix& a, int s, std::int64_t samples,
                         std::uint64_t seed) {
  const int n = static_cast<int>(a.cols());
  if (s < 1 || s > n)
    throw std::invalid_argument("estimate_rip: need 1 <= s <= N");
  RipEstimate est;
  est.s = s;
  est.exhaustive = binomial_capped(n, s, kExhaustiveLimit) <= kExhaustiveLimit;
  if (est.exhaustive) {
    std::vector<int> idx(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      est.delta_lower = std::max(est.delta_lower, support_delta(a, idx));
      ++est.supports_visited;
      int i = s - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - s + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < s; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  } else {
    if (samples < 1)
      throw std::invalid_argument("estimate_rip: samples >= 1 required");
    rng::SplitMix64 g(seed);
    for (std::int64_t it = 0; it < samples; ++it) {
      est.delta_lower =
          std::max(est.delta_lower, support_delta(a, random_subset(g, n, s)));
      ++est.supports_visited;
    }
  }
  return est;
}

double critical_a_gap(double a, double delta_r, double delta_rt, int r_size,
                      int t_size) {
  const double ratio = static_cast<double>(r_size) / t_size;
  const double w = a / (a + 1.0);
  return w * w * ratio * (1.0 - delta_rt) - 1.0 - delta_r;
}

std::optional<double> critical_a(double delta_r, double delta_rt, int r_size,
                                 int t_size) {
  if (!(delta_r >= 0.0 && delta_r <= 1.0 && delta_rt >= 0.0 && delta_rt <= 1.0))
    throw std::invalid_argument("critical_a: deltas must be in [0,1]");
  if (t_size < 1 || r_size <= t_size)
    throw std::invalid_argument("critical_a: need R > |T| >= 1");
  if (delta_rt == 1.0)
    throw std::invalid_argument("critical_a: delta_{R+|T|} = 1 degenerate");
  const double t = std::sqrt((1.0 + delta_r) * t_size /
                             (r_size * (1.0 - delta_rt)));
  if (t >= 1.0) return std::nullopt;
  return t / (1.0 - t);
}

std::pair<Problem, double> scale_problem(const Problem& prob, int t_size,
                                         const PenaltyParams& p) {
  if (t_size < 1) throw std::invalid_argument("scale_problem: |T| >= 1");
  double xinf;
  if (prob.truth) {
    xinf = prob.truth->x.lpNorm<Eigen::Infinity>();
  } else {
    // Minimum-norm least-squares solution as a crude magnitude proxy.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(prob.a);
    xinf = cod.solve(prob.y).lpNorm<Eigen::Infinity>();
  }
  double c = xinf / p.a * (p.a * t_size + t_size - 1.0);
  if (!(c > 0.0)) c = 1.0;  // zero signal: nothing to scale
  Problem scaled;
  scaled.a = prob.a;
  scaled.y = prob.y / c;
  if (prob.truth) {
    Truth t;
    t.x = prob.truth->x / c;
    t.support = prob.truth->support;
    scaled.truth = std::move(t);
  }
  return {std::move(scaled), c};
}

Condition2Report check_condition2(const Vector& beta, const Problem& prob,
                                  const SolveOptions& opts,
                                  double support_threshold,
                                  double stationarity_tol) {
  if (beta.size() != prob.a.cols())
    throw std::invalid_argument("check_condition2: dimension mismatch");
  Condition2Report rep;
  rep.dual_limit = opts.penalty.slope_at_zero();
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    if (std::abs(beta[i]) > support_threshold)
      rep.support.push_back(static_cast<int>(i));

  const Vector z = prob.a.transpose() * (prob.y - prob.a * beta) / opts.lambda;
  rep.dual_bound = 0.0;
  std::size_t next = 0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (next < rep.support.size() && rep.support[next] == i) {
      ++next;
      continue;
    }
    rep.dual_bound = std::max(rep.dual_bound, std::abs(z[i]));
  }
  rep.passed[1] = rep.dual_bound < rep.dual_limit;

  if (rep.support.empty()) {
    rep.q_nonsingular = true;
    rep.sigma_min = std::numeric_limits<double>::infinity();
    rep.stationarity_gap = 0.0;
    rep.eigen_margin = 0.0;
    rep.passed[0] = rep.passed[2] = rep.passed[3] = true;
    rep.verdict = rep.passed[1] ? Condition2Report::Verdict::local_min
                                : Condition2Report::Verdict::fails;
    return rep;
  }

  const Matrix at = columns(prob.a, rep.support);
  Eigen::JacobiSVD<Matrix> svd(at);
  rep.sigma_min = svd.singularValues().minCoeff();
  rep.q_nonsingular = rep.sigma_min > 1e-10;
  rep.passed[0] = rep.q_nonsingular;

  const auto t_count = static_cast<Eigen::Index>(rep.support.size());
  Vector beta_t(t_count), w_t(t_count);
  for (Eigen::Index j = 0; j < t_count; ++j) {
    const double b = beta[rep.support[static_cast<std::size_t>(j)]];
    beta_t[j] = b;
    w_t[j] = (b > 0.0 ? 1.0 : -1.0) * rho_prime(std::abs(b), opts.penalty);
  }
  const Matrix q = at.transpose() * at;
  rep.stationarity_gap =
      (q * beta_t - at.transpose() * prob.y + opts.lambda * w_t)
          .lpNorm<Eigen::Infinity>();
  rep.passed[2] = rep.stationarity_gap <= stationarity_tol;

  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  rep.eigen_margin = es.eigenvalues().minCoeff() -
                     opts.lambda * local_concavity(beta_t, opts.penalty);
  rep.passed[3] = rep.eigen_margin >= 0.0;

  if (rep.passed[0] && rep.passed[1] && rep.passed[2] && rep.passed[3]) {
    rep.verdict = rep.eigen_margin > 0.0
                      ? Condition2Report::Verdict::strict_local_min
                      : Condition2Report::Verdict::local_min;
  } else {
    rep.verdict = Condition2Report::Verdict::fails;
  }
  return rep;
}

Vector brute_force_l0(const Problem& prob, int k_max) {
  const int n = static_cast<int>(prob.a.cols());
  if (n > 20 || k_max > 4 || k_max < 0)
    throw std::invalid_argument("brute_force_l0: budget is N <= 20, k <= 4");
  constexpr double kResidual = 1e-9;
  if (prob.y.norm() <= kResidual) return Vector::Zero(n);
  std::vector<int> idx;
  for (int k = 1; k <= k_max; ++k) {
    idx.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      const Matrix sub = columns(prob.a, idx);
      const Vector coef = sub.colPivHouseholderQr().solve(prob.y);
      if ((sub * coef - prob.y).norm() <= kResidual) {
        Vector x = Vector::Zero(n);
        for (int i = 0; i < k; ++i)
          x[idx[static_cast<std::size_t>(i)]] = coef[i];
        return x;
      }
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  throw std::runtime_error("brute_force_l0: no exact solution within k_max");
}

double support_min_singular_value(const Problem& prob, const Vector& x,
                                  double support_threshold) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > support_threshold)
      support.push_back(static_cast<int>(i));
  if (support.empty()) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(columns(prob.a, support));
  return svd.singularValues().minCoeff();
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string Condition2Report::to_text() const {
  std::string out;
  out += "support size: " + std::to_string(support.size()) + "\n";
  out += "(i)   sigma_min(A_T) = " + fmt(sigma_min) +
         (passed[0] ? "  [pass]\n" : "  [FAIL]\n");
  out += "(ii)  ||z_Tc||_inf = " + fmt(dual_bound) + " vs (a+1)/a = " +
         fmt(dual_limit) + (passed[1] ? "  [pass]\n" : "  [FAIL]\n");
  out += "(iii) stationarity gap = " + fmt(stationarity_gap) +
         (passed[2] ? "  [pass]\n" : "  [FAIL]\n");
  out += "(iv)  eigen margin = " + fmt(eigen_margin) +
         (passed[3] ? "  [pass]\n" : "  [FAIL]\n");
  out += "verdict: ";
  switch (verdict) {
    case Verdict::strict_local_min:
      out += "strict-local-min\n";
      break;
    case Verdict::local_min:
      out += "local-min\n";
      break;
    case Verdict::fails: {
      out += "fails(";
      const char* names[] = {"i", "ii", "iii", "iv"};
      bool first = true;
      for (int i = 0; i < 4; ++i) {
        if (!passed[static_cast<std::size_t>(i)]) {
          if (!first) out += ",";
          out += names[i];
          first = false;
        }
      }
      out += ")\n";
      break;
    }
  }
  return out;
}

std::string Condition2Report::csv_header() {
  return "support_size,sigma_min,dual_bound,dual_limit,stationarity_gap,"
         "eigen_margin,pass_i,pass_ii,pass_iii,pass_iv,verdict";
}

std::string Condition2Report::csv_row() const {
  std::string v = verdict == Verdict::strict_local_min ? "strict-local-min"
                  : verdict == Verdict::local_min      ? "local-min"
                                                       : "fails";
  std::string out = std::to_string(support.size());
  out += "," + fmt(sigma_min) + "," + fmt(dual_bound) + "," + fmt(dual_limit);
  out += "," + fmt(stationarity_gap) + "," + fmt(eigen_margin);
  for (int i = 0; i < 4; ++i)
    out += passed[static_cast<std::size_t>(i)] ? ",1" : ",0";
  return out + "," + v;
}

std::string to_text(const RipEstimate& est) {
  std::string out = "delta_" + std::to_string(est.s) +
                    (est.exhaustive ? " = " : " >= ") + fmt(est.delta_lower);
  out += est.exhaustive ? "  (exhaustive, " : "  (sampled, ";
  out += std::to_string(est.supports_visited) + " supports)\n";
  return out;
}

std::string csv_row(const RipEstimate& est) {
  return std::to_string(est.s) + "," + fmt(est.delta_lower) + "," +
         std::to_string(est.supports_visited) + "," +
         (est.exhaustive ? "1" : "0");
}

}  // namespace tl1

#include "tl1/solver.hpp"

#include <cmath>
#include <doctest.h>
#include <limits>

#include <Eigen/QR>

#include "tl1/rng.hpp"
#include "tl1/sensing.hpp"

using namespace tl1;

namespace {

Matrix random_matrix(int m, int n, std::uint64_t seed) {
  rng::SplitMix64 g(seed);
  Matrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g.normal();
  return a;
}

Vector random_vector(int n, std::uint64_t seed, double scale = 1.0) {
  rng::SplitMix64 g(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * g.normal();
  return v;
}

Problem gaussian_instance(int m, int n, int k, std::uint64_t seed,
                          double r = 0.0) {
  EnsembleSpec es;
  es.kind = EnsembleKind::correlated_gaussian;
  es.m = m;
  es.n = n;
  es.r = r;
  es.seed = rng::fold(seed, 1);
  SignalSpec sig;
  sig.n = n;
  sig.k = k;
  sig.seed = rng::fold(seed, 2);
  return make_problem(es, sig, 0.0);
}

double rel_error(const SolveResult& res, const Problem& prob) {
  return (res.x - prob.truth->x).norm() / prob.truth->x.norm();
}

}  // namespace

TEST_CASE("solve options validate") {
  SolveOptions o;
  o.lambda = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o.lambda = 1e-5;
  o.delta = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o.delta = 1.0;
  o.eps_outer = 0.0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o.eps_outer = 1e-6;
  o.max_inner = 0;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
  o.max_inner = 10;
  CHECK_NOTHROW(o.validate());
  // the constrained model carries no lambda requirement
  SolveOptions c;
  c.model = Model::constrained;
  c.lambda = 0.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("factorization cache solves both primal and dual forms") {
  for (auto [m, n] : {std::pair{20, 8}, std::pair{8, 20}}) {
    const Matrix a = random_matrix(m, n, 5);
    const FactorizationCache cache(a, 1.05);
    CHECK(cache.dual_mode() == (m < n));
    CHECK(cache.factor_error() < 1e-10);
    const Matrix k =
        a.transpose() * a + 1.05 * Matrix::Identity(a.cols(), a.cols());
    for (std::uint64_t s : {1, 2, 3}) {
      const Vector b = random_vector(n, s);
      const Vector x = cache.solve(b);
      CHECK((k * x - b).norm() <= 1e-10 * b.norm());
    }
  }
  const Matrix a = random_matrix(6, 9, 6);
  CHECK_THROWS_AS(FactorizationCache(a, 0.0), std::invalid_argument);
}

TEST_CASE("objective values") {
  Problem prob;
  prob.a = random_matrix(5, 12, 9);
  prob.y = random_vector(5, 10);
  SolveOptions opts;
  const Vector zero = Vector::Zero(12);
  CHECK(objective(zero, prob, opts) ==
        doctest::Approx(0.5 * prob.y.squaredNorm()));
  Problem zeroy = prob;
  zeroy.y.setZero();
  CHECK(objective(zero, zeroy, opts) == 0.0);

  const Vector x = random_vector(12, 11);
  const double direct = 0.5 * (prob.a * x - prob.y).squaredNorm() +
                        opts.lambda * penalty_sum(x, opts.penalty);
  CHECK(objective(x, prob, opts) ==
        doctest::Approx(direct).epsilon(1e-12));
  CHECK_THROWS_AS(objective(random_vector(5, 1), prob, opts),
                  std::invalid_argument);
}

TEST_CASE("admm subproblem: identity sensing reduces to soft thresholding") {
  const int n = 10;
  Problem prob;
  prob.a = Matrix::Identity(n, n);
  prob.y = random_vector(n, 21, 2.0);
  SolveOptions opts;
  opts.lambda = 0.3;
  opts.c = 0.0;
  const FactorizationCache cache(prob.a, 2.0 * opts.c + resolved_delta(opts));
  AdmmState warm;
  const Vector vn = Vector::Zero(n);
  const Vector x = admm_subproblem(vn, prob, opts, cache, warm);
  const Vector want = shrink(prob.y, opts.lambda * opts.penalty.slope_at_zero());
  CHECK((x - want).lpNorm<Eigen::Infinity>() <= 10 * opts.eps_inner);
}

TEST_CASE("admm subproblem: vanishing lambda on a square system") {
  const int n = 8;
  Problem prob;
  prob.a = random_matrix(n, n, 22) + 3.0 * Matrix::Identity(n, n);
  prob.y = random_vector(n, 23);
  SolveOptions opts;
  opts.lambda = 1e-12;
  opts.c = 0.0;
  opts.max_inner = 20000;
  const FactorizationCache cache(prob.a, resolved_delta(opts));
  AdmmState warm;
  const Vector x =
      admm_subproblem(Vector::Zero(n), prob, opts, cache, warm);
  const Vector direct = prob.a.colPivHouseholderQr().solve(prob.y);
  CHECK((x - direct).norm() <= 1e-5 * direct.norm());
}

TEST_CASE("admm subproblem satisfies the kkt inclusion") {
  // 0 in (AtA + 2cI) x - (vn + At y) + lambda (a+1)/a d||x||_1
  for (std::uint64_t seed : {31, 32, 33, 34, 35}) {
    Problem prob;
    prob.a = random_matrix(10, 30, seed);
    prob.y = random_vector(10, seed + 100);
    SolveOptions opts;
    opts.lambda = 0.1;
    opts.max_inner = 100000;
    const Vector vn = random_vector(30, seed + 200, 0.1);
    const FactorizationCache cache(prob.a, 2.0 * opts.c + resolved_delta(opts));
    AdmmState warm;
    int iters = 0;
    const Vector x = admm_subproblem(vn, prob, opts, cache, warm, &iters);
    CHECK(iters < opts.max_inner);

    const double bound = opts.lambda * opts.penalty.slope_at_zero();
    const Vector g = (prob.a.transpose() * prob.a) * x + 2.0 * opts.c * x -
                     (vn + prob.a.transpose() * prob.y);
    double residual = 0.0;
    for (int i = 0; i < 30; ++i) {
      if (x[i] != 0.0)
        residual = std::max(
            residual, std::abs(g[i] + (x[i] > 0 ? bound : -bound)));
      else
        residual = std::max(residual, std::max(std::abs(g[i]) - bound, 0.0));
    }
    CHECK(residual <= 10.0 * opts.eps_inner);
  }
}

TEST_CASE("unconstrained solve: zero observation stops immediately") {
  Problem prob;
  prob.a = random_matrix(6, 18, 41);
  prob.y = Vector::Zero(6);
  const SolveOptions opts;
  const SolveResult res = solve_unconstrained(prob, opts);
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.outer_iters == 1);
  CHECK(res.x.norm() == 0.0);
  CHECK(res.objective_trace.back() == 0.0);
  CHECK(res.stationarity_residual == 0.0);
}

TEST_CASE("unconstrained solve recovers and descends") {
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem prob = gaussian_instance(64, 256, 8, seed);
    const SolveOptions opts;
    const SolveResult res = solve_unconstrained(prob, opts);
    if (rel_error(res, prob) <= 1e-3) ++recovered;
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
      CHECK(res.objective_trace[i - 1] - res.objective_trace[i] >= -1e-8);
    CHECK(res.inner_iters.size() == static_cast<std::size_t>(res.outer_iters));
  }
  CHECK(recovered >= 9);
}

TEST_CASE("iterate bound under large lambda") {
  // lambda > ||y||^2 / (2(a+1)) forces
  // ||x^n||_inf <= a ||y||^2 / (2 lambda (a+1) - ||y||^2) for every iterate.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem prob = gaussian_instance(10, 30, 3, seed + 50);
    const double ynorm2 = prob.y.squaredNorm();
    SolveOptions opts;
    opts.penalty = PenaltyParams(1.0);
    opts.lambda = ynorm2;  // > ||y||^2 / 4
    const double bound =
        opts.penalty.a * ynorm2 /
        (2.0 * opts.lambda * (opts.penalty.a + 1.0) - ynorm2);
    // reconstruct iterates x^1, x^2, ... by truncating deterministic runs
    for (int cap = 1; cap <= 4; ++cap) {
      SolveOptions truncated = opts;
      truncated.max_outer = cap;
      const SolveResult res = solve_unconstrained(prob, truncated);
      CHECK(res.x.lpNorm<Eigen::Infinity>() <= bound + 1e-12);
      if (res.status == SolveStatus::converged) break;
    }
  }
}

TEST_CASE("stationarity residual: zero case, converged runs, perturbations") {
  Problem prob;
  prob.a = random_matrix(6, 15, 61);
  prob.y = Vector::Zero(6);
  SolveOptions opts;
  CHECK(stationarity_residual(Vector::Zero(15), prob, opts) == 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem inst = gaussian_instance(64, 256, 8, seed + 70);
    const SolveResult res = solve_unconstrained(inst, opts);
    REQUIRE(res.status == SolveStatus::converged);
    const double base = stationarity_residual(res.x, inst, opts);
    CHECK(base == doctest::Approx(res.stationarity_residual));
    CHECK(base <= 1e-4);

    // nudging one support coordinate strictly increases the residual
    Vector x = res.x;
    for (int i = 0; i < x.size(); ++i)
      if (x[i] != 0.0) {
        x[i] += 1e-2;
        break;
      }
    CHECK(stationarity_residual(x, inst, opts) > base);
  }
}

TEST_CASE("constrained solve: feasibility and penalty optimality") {
  // DCA reaches a local minimizer; most runs on these instances attain the
  // planted penalty value, the rest are logged.
  int optimal = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem prob = gaussian_instance(20, 60, 4, seed + 90);
    SolveOptions opts;
    opts.model = Model::constrained;
    const SolveResult res = solve_constrained(prob, opts);
    CHECK(res.feasibility_gap <= 1e-6);
    if (penalty_sum(res.x, opts.penalty) <=
        penalty_sum(prob.truth->x, opts.penalty) + 1e-6) {
      ++optimal;
    } else {
      MESSAGE("seed ", seed + 90, ": local minimum with penalty ",
              penalty_sum(res.x, opts.penalty), " vs planted ",
              penalty_sum(prob.truth->x, opts.penalty));
    }
  }
  CHECK(optimal >= 4);

  Problem zeroy;
  zeroy.a = random_matrix(6, 18, 95);
  zeroy.y = Vector::Zero(6);
  SolveOptions opts;
  opts.model = Model::constrained;
  const SolveResult res = solve_constrained(zeroy, opts);
  CHECK(res.x.norm() == 0.0);
  CHECK(res.outer_iters == 1);
}

TEST_CASE("l1 baseline: threshold reduction and easy recovery") {
  // identity sensing: the baseline first step is shrink(y, lambda), the
  // a -> infinity limit of the tl1 threshold lambda (a+1)/a
  const int n = 12;
  Problem prob;
  prob.a = Matrix::Identity(n, n);
  prob.y = random_vector(n, 101, 2.0);
  SolveOptions opts;
  opts.lambda = 0.4;
  opts.c = 0.0;
  opts.max_outer = 1;
  const SolveResult res = solve_l1_baseline(prob, opts);
  CHECK((res.x - shrink(prob.y, opts.lambda)).lpNorm<Eigen::Infinity>() <=
        10 * opts.eps_inner);

  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem inst = gaussian_instance(64, 256, 5, seed + 110);
    const SolveResult r = solve_l1_baseline(inst, SolveOptions{});
    if (rel_error(r, inst) <= 1e-3) ++recovered;
  }
  CHECK(recovered >= 4);
}

TEST_CASE("solves are deterministic") {
  const Problem prob = gaussian_instance(16, 48, 3, 777);
  const SolveOptions opts;
  const SolveResult r1 = solve_unconstrained(prob, opts);
  const SolveResult r2 = solve_unconstrained(prob, opts);
  CHECK((r1.x - r2.x).norm() == 0.0);
  CHECK(r1.objective_trace == r2.objective_trace);
  CHECK(r1.inner_iters == r2.inner_iters);
  CHECK(r1.stationarity_residual == r2.stationarity_residual);
}

TEST_CASE("non-finite data is reported as divergence") {
  Problem prob;
  prob.a = random_matrix(4, 10, 131);
  prob.y = Vector::Constant(4, std::numeric_limits<double>::infinity());
  const SolveResult res = solve_unconstrained(prob, SolveOptions{});
  CHECK(res.status == SolveStatus::diverged);
}

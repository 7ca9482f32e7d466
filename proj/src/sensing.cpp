#include "tl1/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tl1/rng.hpp"

namespace tl1 {

void EnsembleSpec::validate() const {
  if (m <= 0 || n <= 0) throw std::invalid_argument("EnsembleSpec: M, N > 0");
  if (m >= n)
    throw std::invalid_argument("EnsembleSpec: underdetermined regime M < N");
  if (kind == EnsembleKind::correlated_gaussian) {
    if (!(r >= 0.0 && r < 1.0))
      throw std::invalid_argument("EnsembleSpec: r in [0,1)");
  } else {
    if (!(factor >= 1.0))
      throw std::invalid_argument("EnsembleSpec: F >= 1");
  }
}

void SignalSpec::validate() const {
  if (n <= 0) throw std::invalid_argument("SignalSpec: n > 0");
  if (k < 0 || k > n) throw std::invalid_argument("SignalSpec: 0 <= k <= n");
  if (separation < 0) throw std::invalid_argument("SignalSpec: separation >= 0");
  if (k > 1 && static_cast<long long>(k - 1) * separation >= n)
    throw std::invalid_argument("SignalSpec: infeasible (k, separation, n)");
}

Matrix gen_gaussian(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.kind != EnsembleKind::correlated_gaussian)
    throw std::invalid_argument("gen_gaussian: wrong ensemble kind");
  rng::SplitMix64 g(spec.seed);
  const double sz = std::sqrt(1.0 - spec.r);
  const double sg = std::sqrt(spec.r);
  Matrix a(spec.m, spec.n);
  // Row i = sqrt(1-r) z + sqrt(r) g 1 realizes N(0, (1-r)I + r 11^t)
  // exactly, one rank-one deflection per row. Draw order: z_0..z_{n-1}, g.
  for (int i = 0; i < spec.m; ++i) {
    for (int j = 0; j < spec.n; ++j) a(i, j) = sz * g.normal();
    const double shared = sg * g.normal();
    if (spec.r > 0.0) a.row(i).array() += shared;
  }
  return a;
}

Matrix gen_dct(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.kind != EnsembleKind::oversampled_dct)
    throw std::invalid_argument("gen_dct: wrong ensemble kind");
  rng::SplitMix64 g(spec.seed);
  Vector w(spec.m);
  for (int i = 0; i < spec.m; ++i) w[i] = g.uniform();
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  const double two_pi = 2.0 * 3.141592653589793238462643383279502884;
  Matrix a(spec.m, spec.n);
  for (int j = 0; j < spec.n; ++j) {
    const double phase = two_pi * static_cast<double>(j) / spec.factor;
    for (int i = 0; i < spec.m; ++i) a(i, j) = scale * std::cos(phase * w[i]);
  }
  return a;
}

Truth gen_signal(const SignalSpec& spec) {
  spec.validate();
  rng::SplitMix64 g(spec.seed);

  // Uniform k-subset of {0, ..., pool-1} by Floyd's algorithm, then the
  // spacing transform stretches sorted ranks by (separation-1).
  const int stretch = std::max(spec.separation, 1) - 1;
  const int pool = spec.n - (spec.k - 1) * stretch;
  std::vector<int> subset;
  subset.reserve(spec.k);
  for (int i = pool - spec.k; i < pool; ++i) {
    const int j = static_cast<int>(g.below(static_cast<std::uint64_t>(i) + 1));
    if (std::find(subset.begin(), subset.end(), j) == subset.end())
      subset.push_back(j);
    else
      subset.push_back(i);
  }
  std::sort(subset.begin(), subset.end());
  for (int rank = 0; rank < spec.k; ++rank) subset[rank] += stretch * rank;

  Truth t;
  t.support = std::move(subset);
  t.x = Vector::Zero(spec.n);
  for (int idx : t.support) {
    double v;
    if (spec.law == ValueLaw::standard_normal) {
      do {
        v = g.normal();
      } while (v == 0.0);
    } else {
      v = g.uniform() < 0.5 ? -1.0 : 1.0;
    }
    t.x[idx] = v;
  }
  return t;
}

Problem make_problem(const EnsembleSpec& ensemble, const SignalSpec& signal,
                     double noise_std) {
  if (ensemble.n != signal.n)
    throw std::invalid_argument("make_problem: dimension mismatch");
  if (!(noise_std >= 0.0))
    throw std::invalid_argument("make_problem: noise_std >= 0");
  Problem prob;
  prob.a = ensemble.kind == EnsembleKind::correlated_gaussian
               ? gen_gaussian(ensemble)
               : gen_dct(ensemble);
  Truth t = gen_signal(signal);
  prob.y = prob.a * t.x;
  if (noise_std > 0.0) {
    rng::SplitMix64 g(rng::fold(ensemble.seed, 0x6e6f697365ULL));  // "noise"
    for (int i = 0; i < ensemble.m; ++i) prob.y[i] += noise_std * g.normal();
  }
  prob.truth = std::move(t);
  return prob;
}

}  // namespace tl1

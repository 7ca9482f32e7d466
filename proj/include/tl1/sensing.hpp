#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tl1/penalty.hpp"

namespace tl1 {

enum class EnsembleKind { correlated_gaussian, oversampled_dct };

// Descriptor of a random M x N sensing matrix, M < N.
//
// correlated_gaussian: rows are i.i.d. N(0, Sigma) with
//   Sigma = (1-r) I + r 11^t, r in [0,1).
// oversampled_dct: column j (1-indexed) is (1/sqrt(M)) cos(2 pi w (j-1)/F)
//   entrywise, with w drawn uniformly from (0,1)^M and factor F >= 1.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::correlated_gaussian;
  int m = 0;
  int n = 0;
  double r = 0.0;     // gaussian row correlation
  double factor = 1;  // dct oversampling factor F
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ValueLaw { standard_normal, unit_signs };

// Descriptor of a k-sparse ground truth of length n. `separation` is the
// minimum index gap between consecutive support elements (0 or 1 = no
// constraint); feasibility requires (k-1)*separation < n.
struct SignalSpec {
  int n = 0;
  int k = 0;
  int separation = 0;
  ValueLaw law = ValueLaw::standard_normal;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Truth {
  Vector x;                  // length n, exactly k nonzeros
  std::vector<int> support;  // ascending 0-based indices
};

struct Problem {
  Matrix a;
  Vector y;
  std::optional<Truth> truth;
};

Matrix gen_gaussian(const EnsembleSpec& spec);
Matrix gen_dct(const EnsembleSpec& spec);

// Support is drawn uniformly over all feasible supports via the spacing
// transform: for separation s >= 1, draw a uniform k-subset of
// {0, ..., n - (k-1)(s-1) - 1}, sort it, and add (s-1)*(rank-1) to each
// element. Values are then drawn per `law` in support order.
Truth gen_signal(const SignalSpec& spec);

// Assembles A from `ensemble`, x* from `signal`, and y = A x* + eps with
// eps i.i.d. N(0, noise_std^2) (noise seed derived from ensemble.seed).
Problem make_problem(const EnsembleSpec& ensemble, const SignalSpec& signal,
                     double noise_std = 0.0);

}  // namespace tl1

#include "tl1/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace tl1 {

PenaltyParams::PenaltyParams(double a_) : a(a_) {
  if (!std::isfinite(a) || a <= 0.0)
    throw std::invalid_argument("PenaltyParams: a must be finite and > 0");
}

double rho(double t, const PenaltyParams& p) {
  if (!std::isfinite(t)) throw std::invalid_argument("rho: non-finite input");
  const double at = std::abs(t);
  return (p.a + 1.0) * at / (p.a + at);
}

double rho_prime(double t, const PenaltyParams& p) {
  if (!(t >= 0.0)) throw std::invalid_argument("rho_prime: t must be >= 0");
  const double d = p.a + t;
  return p.a * (p.a + 1.0) / (d * d);
}

double penalty_sum(const Vector& x, const PenaltyParams& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += rho(x[i], p);
  return s;
}

double phi(const Vector& x, const PenaltyParams& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double at = std::abs(x[i]);
    s += (p.a + 1.0) * at * at / (p.a * (p.a + at));
  }
  return s;
}

Vector phi_grad(const Vector& x, const PenaltyParams& p) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double at = std::abs(x[i]);
    const double d = p.a + at;
    const double mag = (p.a + 1.0) * at * (at + 2.0 * p.a) / (p.a * d * d);
    g[i] = x[i] > 0.0 ? mag : (x[i] < 0.0 ? -mag : 0.0);
  }
  return g;
}

Vector shrink(const Vector& x, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("shrink: r must be >= 0");
  Vector z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double m = std::abs(x[i]) - r;
    z[i] = m > 0.0 ? (x[i] > 0.0 ? m : -m) : 0.0;
  }
  return z;
}

bool SubgradientSet::contains(const Vector& g, double tol) const {
  if (g.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (g[i] < lo[i] - tol || g[i] > hi[i] + tol) return false;
  return true;
}

double SubgradientSet::distance(const Vector& g) const {
  double d = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] < lo[i])
      d = std::max(d, lo[i] - g[i]);
    else if (g[i] > hi[i])
      d = std::max(d, g[i] - hi[i]);
  }
  return d;
}

SubgradientSet tl1_subdifferential(const Vector& x, const PenaltyParams& p) {
  SubgradientSet s;
  s.lo.resize(x.size());
  s.hi.resize(x.size());
  const double s0 = p.slope_at_zero();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      s.lo[i] = -s0;
      s.hi[i] = s0;
    } else {
      const double v = (x[i] > 0.0 ? 1.0 : -1.0) * rho_prime(std::abs(x[i]), p);
      s.lo[i] = v;
      s.hi[i] = v;
    }
  }
  return s;
}

double max_concavity(const PenaltyParams& p) {
  return 2.0 * (p.a + 1.0) / (p.a * p.a);
}

double local_concavity(const Vector& b, const PenaltyParams& p) {
  if (b.size() == 0)
    throw std::invalid_argument("local_concavity: empty vector");
  double k = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (b[i] == 0.0)
      throw std::invalid_argument("local_concavity: zero entry");
    const double d = p.a + std::abs(b[i]);
    k = std::max(k, 2.0 * p.a * (p.a + 1.0) / (d * d * d));
  }
  return k;
}

}  // namespace tl1

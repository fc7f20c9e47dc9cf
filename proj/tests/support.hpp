#pragma once

// Hand-rolled generators shared by the property tests.

#include "confocal/billiard.hpp"
#include "confocal/dynamics.hpp"
#include "confocal/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace confocal::test {

/// Distinct positive axes, sorted ascending, gaps at least `min_gap`.
inline Vec distinct_axes(Rng& rng, Eigen::Index n, double min_gap = 0.3) {
  Vec a(n);
  double v = rng.uniform(0.4, 1.2);
  for (Eigen::Index i = 0; i < n; ++i) {
    a[i] = v;
    v += min_gap + rng.uniform(0.0, 1.0);
  }
  return a;
}

/// Point with every |x_k| in [lo, hi] and random signs.
inline Vec generic_point(Rng& rng, Eigen::Index n, double lo = 0.2, double hi = 1.2) {
  Vec x(n);
  for (Eigen::Index k = 0; k < n; ++k) x[k] = rng.sign() * rng.uniform(lo, hi);
  return x;
}

/// Generic point pushed onto the ellipsoid by radial scaling.
inline Vec ellipsoid_point(Rng& rng, const Vec& a, double lo = 0.2) {
  Vec x = generic_point(rng, a.size(), lo, 1.0).cwiseProduct(a.cwiseSqrt());
  return x / std::sqrt(x.cwiseAbs2().cwiseQuotient(a).sum());
}

inline SystemSpec make_system(SystemKind kind, const Vec& axes, double sigma = 0.0, Vec mu = Vec(),
                              Vec sigmas = Vec()) {
  SystemSpec s;
  s.kind = kind;
  s.ellipsoid = EllipsoidSpec(axes);
  s.sigma = sigma;
  s.mu = std::move(mu);
  s.sigmas = std::move(sigmas);
  s.validate();
  return s;
}

inline BilliardSpec make_billiard(const Vec& axes, double sigma = 0.0, Vec mu = Vec()) {
  BilliardSpec b;
  b.axes = axes;
  b.sigma = sigma;
  b.mu = std::move(mu);
  b.validate();
  return b;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

inline double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace confocal::test

#include "confocal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace confocal {

EllipsoidSpec::EllipsoidSpec(Vec axes) : axes_(std::move(axes)) {
  if (axes_.size() < 1) throw InvalidSpecError("ellipsoid needs at least one axis");
  for (Eigen::Index i = 0; i < axes_.size(); ++i) {
    if (!(axes_[i] > 0.0) || !std::isfinite(axes_[i]))
      throw InvalidSpecError("axis " + std::to_string(i) + " must be positive and finite");
  }
  group_of_.assign(axes_.size(), -1);
  std::vector<double> values;
  for (Eigen::Index i = 0; i < axes_.size(); ++i) {
    if (group_of_[i] >= 0) continue;
    const int g = static_cast<int>(partition_.size());
    partition_.push_back({});
    values.push_back(axes_[i]);
    for (Eigen::Index j = i; j < axes_.size(); ++j) {
      if (group_of_[j] < 0 && axes_[j] == axes_[i]) {
        group_of_[j] = g;
        partition_.back().push_back(static_cast<int>(j));
      }
    }
  }
  group_values_ = Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

int EllipsoidSpec::symmetric_group_count() const {
  return static_cast<int>(std::count_if(partition_.begin(), partition_.end(),
                                        [](const auto& g) { return g.size() >= 2; }));
}

std::vector<int> EllipsoidSpec::sorted_order() const {
  std::vector<int> order(static_cast<std::size_t>(axes_.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [this](int i, int j) { return axes_[i] < axes_[j]; });
  return order;
}

double ellipsoid_residual(const EllipsoidSpec& spec, const Vec& x) {
  require_size(x.size(), spec.size(), "ellipsoid_residual");
  return (x.array().square() / spec.axes().array()).sum() - 1.0;
}

bool on_ellipsoid(const EllipsoidSpec& spec, const Vec& x, double tol) {
  if (!(tol > 0.0)) throw InvalidSpecError("on_ellipsoid: tol must be positive");
  return std::abs(ellipsoid_residual(spec, x)) <= tol;
}

double confocal_residual(const EllipsoidSpec& spec, const Vec& x, double lambda) {
  require_size(x.size(), spec.size(), "confocal_residual");
  return (x.array().square() / (spec.axes().array() - lambda)).sum() - 1.0;
}

namespace {

constexpr double kLambdaTol = 1e-13;

// Root of f(l) = sum x_i^2/(a_i - l) - 1 inside (lo, hi); f is increasing there,
// with f(lo+) < 0 < f(hi-) guaranteed by the caller (either endpoint may be a pole).
double bracketed_root(const Vec& x2, const Vec& a, double lo, double hi) {
  auto f = [&](double l) { return (x2.array() / (a.array() - l)).sum() - 1.0; };
  auto df = [&](double l) { return (x2.array() / (a.array() - l).square()).sum(); };
  while (hi - lo > kLambdaTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double l = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double d = df(l);
    if (!(d > 0.0) || !std::isfinite(d)) break;
    const double next = l - f(l) / d;
    if (!(next > lo - kLambdaTol && next < hi + kLambdaTol)) break;
    l = next;
  }
  return l;
}

}  // namespace

EllipticCoords elliptic_coords(const EllipsoidSpec& spec, const Vec& x) {
  require_size(x.size(), spec.size(), "elliptic_coords");
  if (!spec.distinct()) throw SymmetricChartError("elliptic coordinates need distinct axes");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0)
      throw DegenerateChartError("coordinate " + std::to_string(i) + " is zero");
  }
  const auto order = spec.sorted_order();
  const Vec x2 = x.array().square();
  const Vec& a = spec.axes();

  EllipticCoords ec;
  ec.lambda.resize(spec.size());
  ec.signs = x.array().sign();
  // Lowest root: f < 0 once a_(0) - l exceeds |x|^2.
  const double a0 = a[order[0]];
  ec.lambda[0] = bracketed_root(x2, a, a0 - x2.sum() - 1.0, a0);
  for (std::size_t k = 1; k < order.size(); ++k)
    ec.lambda[static_cast<Eigen::Index>(k)] = bracketed_root(x2, a, a[order[k - 1]], a[order[k]]);
  return ec;
}

Vec coords_from_elliptic(const EllipsoidSpec& spec, const EllipticCoords& ec) {
  require_size(ec.lambda.size(), spec.size(), "coords_from_elliptic lambda");
  require_size(ec.signs.size(), spec.size(), "coords_from_elliptic signs");
  if (!spec.distinct()) throw SymmetricChartError("elliptic coordinates need distinct axes");
  const auto order = spec.sorted_order();
  const Vec& a = spec.axes();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double l = ec.lambda[static_cast<Eigen::Index>(k)];
    if (l > a[order[k]] || (k > 0 && l < a[order[k - 1]]))
      throw InvalidCoordsError("lambda_" + std::to_string(k) + " violates interlacing");
  }
  Vec x(spec.size());
  for (Eigen::Index k = 0; k < spec.size(); ++k) {
    double num = 1.0, den = 1.0;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      num *= a[k] - ec.lambda[i];
      if (i != k) den *= a[k] - a[i];
    }
    double r = num / den;
    if (r < 0.0) {
      if (r < -1e-12 * (1.0 + std::abs(num / den)))
        throw InvalidCoordsError("negative radicand for coordinate " + std::to_string(k));
      r = 0.0;
    }
    x[k] = (ec.signs[k] < 0 ? -1.0 : 1.0) * std::sqrt(r);
  }
  return x;
}

double tangency_value(const Vec& a, const Vec& x, const Vec& y, double eta, double sigma,
                      double pole_tol) {
  require_size(x.size(), a.size(), "tangency_value x");
  require_size(y.size(), a.size(), "tangency_value y");
  const Vec d = eta - a.array();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(d[i]) <= pole_tol * (1.0 + std::abs(a[i])))
      throw PoleError("eta coincides with axis " + std::to_string(i));
  }
  const double qxx = (x.array().square() / d.array()).sum();
  const double qyy = (y.array().square() / d.array()).sum();
  const double qxy = (x.array() * y.array() / d.array()).sum();
  return (qxx + 1.0) * (qyy + sigma) - qxy * qxy;
}

ProjectiveMetricValue projective_metric_eval(const Vec& axes, const CVec& w, const CVec& X,
                                             double sigma) {
  require_size(w.size(), axes.size(), "projective_metric_eval w");
  require_size(X.size(), axes.size(), "projective_metric_eval X");
  if (w.squaredNorm() == 0.0) throw DimensionError("projective_metric_eval: w must be nonzero");
  // <u, A v*> = sum u_i a_i conj(v_i)
  auto form = [&](const CVec& u, const CVec& v) {
    return (u.array() * axes.array().cast<cplx>() * v.array().conjugate()).sum();
  };
  const double waw = form(w, w).real();
  const double ww = w.squaredNorm();
  const cplx xaw = form(X, w);
  const cplx wax = form(w, X);
  const double num = (waw * form(X, X) - xaw * wax).real();
  return {num / (waw * ww), sigma * waw / (2.0 * ww)};
}

}  // namespace confocal

#pragma once

#include "confocal/common.hpp"

#include <vector>

namespace confocal {

/// Diagonal ellipsoid <A^{-1}x, x> = 1 given by its squared semi-axes a_i.
///
/// Axes are kept in the order supplied. The partition into groups of
/// bitwise-equal axes is derived on construction: groups are maximal, ordered
/// by their first index, and list indices in ascending order.
class EllipsoidSpec {
 public:
  EllipsoidSpec() = default;
  explicit EllipsoidSpec(Vec axes);

  const Vec& axes() const { return axes_; }
  double axis(Eigen::Index i) const { return axes_[i]; }
  /// Number of ambient coordinates (n + 1 for the ellipsoid E^n).
  Eigen::Index size() const { return axes_.size(); }
  /// Dimension n of the ellipsoid.
  Eigen::Index dim() const { return axes_.size() - 1; }

  const std::vector<std::vector<int>>& partition() const { return partition_; }
  /// Common axis value of each partition group.
  const Vec& group_values() const { return group_values_; }
  /// Group index of every coordinate.
  const std::vector<int>& group_of() const { return group_of_; }
  bool distinct() const { return static_cast<Eigen::Index>(partition_.size()) == size(); }
  /// Number of groups with at least two members.
  int symmetric_group_count() const;

  /// Indices ordered by increasing axis value.
  std::vector<int> sorted_order() const;

 private:
  Vec axes_;
  std::vector<std::vector<int>> partition_;
  Vec group_values_;
  std::vector<int> group_of_;
};

struct EllipticCoords {
  Vec lambda;  ///< ascending roots, lambda_0 < a_(0) < lambda_1 < ... < lambda_n < a_(n)
  Vec signs;   ///< sign of every Cartesian coordinate, in the original axis order
};

/// <A^{-1}x, x> - 1.
double ellipsoid_residual(const EllipsoidSpec& spec, const Vec& x);

bool on_ellipsoid(const EllipsoidSpec& spec, const Vec& x, double tol);

/// sum_i x_i^2 / (a_i - lambda) - 1; zero exactly when x lies on the confocal quadric Q_lambda.
double confocal_residual(const EllipsoidSpec& spec, const Vec& x, double lambda);

/// Elliptic (confocal) coordinates of a point off the coordinate hyperplanes.
/// Each root is bracketed in its interlacing interval, bisected, then polished by Newton.
EllipticCoords elliptic_coords(const EllipsoidSpec& spec, const Vec& x);

Vec coords_from_elliptic(const EllipsoidSpec& spec, const EllipticCoords& ec);

/// (Q(x,x) + 1)(Q(y,y) + sigma) - Q(x,y)^2 with Q(u,v) = sum u_i v_i / (eta - a_i).
///
/// With sigma = 0 this vanishes iff the line x + s*y is tangent to Q_eta; with
/// sigma != 0 it vanishes iff the conic traced by x'' = -sigma*x from (x, y) is.
double tangency_value(const Vec& a, const Vec& x, const Vec& y, double eta, double sigma,
                      double pole_tol = 1e-12);

struct ProjectiveMetricValue {
  double metric;
  double potential;
};

/// Submersion metric of the reduced Jacobi problem on CP^n evaluated on (X, X)
/// at [w], together with the reduced elastic potential sigma <w,Aw*> / (2 <w,w*>).
ProjectiveMetricValue projective_metric_eval(const Vec& axes, const CVec& w, const CVec& X,
                                             double sigma = 1.0);

}  // namespace confocal

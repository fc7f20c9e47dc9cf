#pragma once

#include "confocal/common.hpp"
#include "confocal/polynomial.hpp"

#include <functional>
#include <vector>

namespace confocal {

/// Values of the separable polynomial hierarchy at one point.
///
/// Index k-1 holds level k: V[k-1] = V^(k)(x), F[k-1][i] = F_i^(k)(x) and
/// grad_V[k-1] = grad V^(k)(x). The recurrence is
///   F_i^(1) = x_i^2,  F_i^(k+1) = a_i F_i^(k) - x_i^2 V^(k),  V^(k) = sum_i F_i^(k),
/// and the gradients come from differentiating it term by term.
struct HierarchyTables {
  std::vector<double> V;
  std::vector<Vec> F;
  std::vector<Vec> grad_V;

  int levels() const { return static_cast<int>(V.size()); }
};

HierarchyTables hierarchy_eval(const Vec& axes, const Vec& x, int m);

struct RosochatiusValue {
  double V;
  Vec F;  ///< F_{s,i}; F_{s,s} closes the sum so that sum_i F_{s,i} = V
};

/// Laurent basis V_s^(-1) = 1/x_s^2 (degree = -1) or
/// V_s^(-2) = (1 + sum_{j!=s} x_j^2/(a_s - a_j)) / x_s^4 (degree = -2).
RosochatiusValue rosochatius_eval(const Vec& axes, const Vec& x, int s, int degree);

using PointField = std::function<double(const Vec&)>;

/// Left-hand side of the Bertrand-Darboux equation for the pair (i, j):
///   (a_j - a_i) d2V/dx_i dx_j + (x_i d_j - x_j d_i)(2V + sum_k x_k d_k V).
/// This is the orientation annihilated by the recurrence potentials V^(k) and
/// the Rosochatius basis; with (a_i - a_j) only V^(1) and 1/x_s^2 survive.
/// Derivatives are fourth-order central differences.
double bd_residual(const Vec& axes, const PointField& V, const Vec& x, int i, int j);

/// Delta_k(x, lambda) = lambda^{k-1} - lambda^{k-2} V^(1) - ... - V^(k-1), as ascending
/// coefficients in lambda.
Vec delta_coefficients(const Vec& axes, const Vec& x, int k);

/// Omega_k(x, lambda) as ascending coefficients in lambda: the polynomial solving
///   2 Omega_k (1 + q_lambda(x,x)) = 2 Delta_k + <A_lambda^{-1} x, grad V^(k)>
/// identically in lambda. It is the polynomial part of Delta_k / (1 + q_lambda(x,x))
/// expanded at lambda = infinity.
Vec omega_coefficients(const Vec& axes, const Vec& x, int k);

struct DeltaOmega {
  double delta;
  double omega;
};

DeltaOmega delta_omega(const Vec& axes, const Vec& x, double lambda, int k);

/// 2 Omega_k (1 + q) - 2 Delta_k - <A_lambda^{-1} x, grad V^(k)> at one lambda.
double omega_identity_residual(const Vec& axes, const Vec& x, double lambda, int k);

/// Elliptic-coordinate closed form of V^(k):
///   V^(k) = -sum_j lambda_j^{k-1} prod_i (lambda_j - a_i) / prod_{i!=j} (lambda_j - lambda_i).
/// Only used as an independent check on the recurrence.
double hierarchy_from_elliptic(const Vec& axes, const Vec& lambda, int k);

/// V^+(x) = (1/2) sum_k sigmas[k-1] V^(k)(x) and its gradient.
struct PotentialValue {
  double value;
  Vec gradient;
};
PotentialValue hierarchy_potential(const Vec& axes, const Vec& sigmas, const Vec& x);

/// (1/2) sum_i mu_i^2 / x_i^2 and its gradient.
PotentialValue rosochatius_potential(const Vec& mu, const Vec& x);

}  // namespace confocal

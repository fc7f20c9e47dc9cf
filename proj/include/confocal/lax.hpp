#pragma once

#include "confocal/common.hpp"
#include "confocal/dynamics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace confocal {

/// q_lambda(u, v) = sum_i u_i v_i / (lambda - a_i).
template <class Scalar>
Scalar q_form(const Vec& axes, double lambda, const Vector<Scalar>& u, const Vector<Scalar>& v) {
  Scalar acc(0);
  for (Eigen::Index i = 0; i < axes.size(); ++i) acc += u[i] * v[i] / (lambda - axes[i]);
  return acc;
}

enum class LaxForm {
  Small,  ///< 2x2 pair, dL/dt = [L, A]
  Big,    ///< (n+1)x(n+1) pair, dL*/dt = [A*, L*] (Jacobi and double Jacobi only)
};

template <class Scalar>
struct LaxPair {
  Matrix<Scalar> L;
  Matrix<Scalar> A;
};

/// Lax matrices of a real system at a real lambda. For the ellipsoid kinds
/// lambda must avoid the axes and 0; for the free kinds only the axes.
/// The big form requires <A^{-1}x, eta> = <A^{-1}y, xi> = 0 within `variety_tol`.
LaxPair<double> build_lax(const SystemSpec& sys, const PhaseState& s, LaxForm form,
                          double lambda, double variety_tol = 1e-8);

/// Lax matrices of the complex flow (small form).
LaxPair<cplx> build_complex_lax(const SystemSpec& sys, const PhaseState& s, double lambda);

/// max-entry norm of the central difference of L over one RK4 step each way,
/// minus the commutator ([L, A] for the small form, [A, L] for the big one).
double lax_residual(const SystemSpec& sys, const PhaseState& s, LaxForm form, double lambda,
                    double h, const IntegratorOptions& opts = {});

/// det L(lambda) of the small Lax matrix (real for every kind).
double det_L(const SystemSpec& sys, const PhaseState& s, double lambda);

/// The same value assembled from the integral family:
///   poly(lambda) + sum_s f~_s/(lambda - alpha_s) + P_s/(lambda - alpha_s)^2
///                + sum_i mu_i^2/(lambda - a_i)^2
/// with poly = sum_k sigma_k lambda^{k-1} (sigma for the Hook kinds). For the
/// double and complex flows it is sigma + sum_i f_i/(lambda - a_i).
double det_L_from_integrals(const SystemSpec& sys, const PhaseState& s, double lambda);

// ---------------------------------------------------------------------------
// Spectral polynomial.

struct PsiPolynomial {
  Vec coeffs;              ///< ascending coefficients in lambda
  Vec alphas;              ///< distinct axis values (one per partition group)
  std::vector<int> delta;  ///< pole order cleared at each alpha
  int degree = 0;          ///< degree used for the fit
};

/// Pole orders: delta_s = 2 if the group has two or more members or carries a
/// nonzero mu, otherwise 1.
std::vector<int> psi_pole_orders(const SystemSpec& sys);

/// Psi(lambda) = prod_s (lambda - alpha_s)^{delta_s} det L(lambda), evaluated directly.
double psi_eval(const SystemSpec& sys, const PhaseState& s, double lambda);

/// Coefficients of Psi, recovered by sampling det L away from the poles and
/// solving a normalized Vandermonde system.
PsiPolynomial psi_poly(const SystemSpec& sys, const PhaseState& s);

/// Real roots of Psi (companion matrix, polished by bisection on psi_eval).
std::vector<double> psi_roots(const SystemSpec& sys, const PhaseState& s);

// ---------------------------------------------------------------------------
// Integrals.

/// P_ij = (y_i x_j - x_i y_j)^2 + mu_i^2 x_j^2 / x_i^2 + mu_j^2 x_i^2 / x_j^2.
double rosochatius_pair(const Vec& x, const Vec& y, const Vec& mu, int i, int j);

struct IntegralFamily {
  double energy = 0.0;
  Vec f;                     ///< f_i (distinct axes only, otherwise empty)
  Vec g;                     ///< g_i = y_i xi_i - x_i eta_i (double flow only)
  Vec f_tilde;               ///< one per partition group
  Vec P;                     ///< P_s, zero for singleton groups
  std::vector<Mat> P_pair;   ///< P_pair[s](u, v) = P_{s,ij} for the u-th and v-th members of group s
  std::vector<Vec> L_chain;  ///< L_chain[s][k-1] = L_{s,k}, k = 1 .. |I_s| - 1
  std::optional<double> J;   ///< complex flow: <A^{-1}p,conj p><A^{-2}z,conj z> - sigma <A^{-2}z,conj z>
};

IntegralFamily integral_family(const SystemSpec& sys, const PhaseState& s);

/// The f_i alone; throws SymmetricSpecError when the axes are not distinct.
Vec integrals_f(const SystemSpec& sys, const PhaseState& s);

/// Both sides of sum_s f~_s/alpha_s = poly(0) + sum_s P_s/alpha_s^2 + sum_i mu_i^2/a_i^2
/// for the ellipsoid kinds (det L(0) = 0). The complex flow has det L(0) =
/// -|<A^{-1}z, conj p>|^2 instead, which is added to the right side.
std::pair<double, double> alpha_relation(const SystemSpec& sys, const PhaseState& s);

// ---------------------------------------------------------------------------
// Dirac-bracket commutation surface (real ellipsoid kinds).

enum class IntegralKind { F, FTilde, GroupP, PairP, ChainL };

struct IntegralId {
  IntegralKind kind = IntegralKind::F;
  int s = 0;  ///< group (FTilde, GroupP, ChainL) or coordinate index (F)
  int i = 0;  ///< PairP: global indices i < j
  int j = 0;
  int k = 0;  ///< ChainL level

  std::string name() const;
};

double evaluate_integral(const SystemSpec& sys, const IntegralId& id, const Vec& x, const Vec& y);
PhaseField integral_field(const SystemSpec& sys, const std::vector<IntegralId>& sum);

struct BracketPair {
  std::string family;  ///< which vanishing relation the pair belongs to
  std::vector<IntegralId> first;   ///< summed
  std::vector<IntegralId> second;  ///< summed
  std::string name() const;
};

/// Every vanishing pair asserted for the symmetric case: the central-function
/// relations, P pairs across groups, the within-group relations, and the chain
/// integrals L_{s,k}.
std::vector<BracketPair> vanishing_pairs(const EllipsoidSpec& spec);

struct BracketRecord {
  std::string name;
  std::string family;
  double value;
};

std::vector<BracketRecord> commutation_suite(const SystemSpec& sys, const PhaseState& s,
                                             const std::vector<BracketPair>& pairs,
                                             double ctol = kDefaultCtol);

struct RankReport {
  int rank_F = 0;      ///< rank of {X_f~_s, X_P_{s,ij}}
  int rank_K = 0;      ///< rank of {X_f~_s, X_P_s}
  int expected_F = 0;  ///< 2n - r - rho
  int expected_K = 0;  ///< r + rho
  Vec singular_F;
  Vec singular_K;
  bool pass() const { return rank_F == expected_F && rank_K == expected_K; }
};

/// Numeric ranks of the Hamiltonian vector-field spans; singular values below
/// threshold * sigma_max count as zero. Groups are numbered 0..r, rho counts
/// groups with at least two members.
RankReport rank_dimensions(const SystemSpec& sys, const PhaseState& s, double threshold = 1e-7,
                           double ctol = kDefaultCtol);

}  // namespace confocal

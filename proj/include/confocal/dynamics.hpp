#pragma once

#include "confocal/common.hpp"
#include "confocal/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace confocal {

enum class SystemKind {
  Jacobi,              ///< material point on E^n under the Hook force -sigma x
  DoubleJacobi,        ///< paired flow on T*Sigma, states (x, xi, y, eta)
  ComplexJacobi,       ///< complex flow on E^{2n+1} in C^{n+1}, states (z, p)
  JacobiRosochatius,   ///< Hook + Rosochatius potentials on E^n
  SeparableHierarchy,  ///< V = (1/2) sum_k sigma_k V^(k) + Rosochatius on E^n
  FreeOscillator,      ///< x'' = -sigma x in R^n (motion between billiard impacts)
  FreeJR,              ///< x'' = -sigma x + mu^2 / x^3 in R^n
};

std::string to_string(SystemKind kind);
/// Accepts the snake_case names used in configuration files.
SystemKind parse_system_kind(const std::string& name);

struct SystemSpec {
  SystemKind kind = SystemKind::Jacobi;
  /// Ellipsoid for constrained kinds; for the free kinds only its axes are used
  /// (they enter the Lax matrix, not the equations of motion).
  EllipsoidSpec ellipsoid;
  double sigma = 0.0;
  Vec sigmas;  ///< SeparableHierarchy only: sigma_1 .. sigma_m
  Vec mu;      ///< Rosochatius constants (empty means all zero)

  void validate() const;
  bool constrained() const;
  bool complex() const { return kind == SystemKind::ComplexJacobi; }
  /// mu, or zeros when empty.
  Vec mu_or_zero() const;
  bool has_mu() const;
  /// Coefficients of the polynomial potential part (1/2) sum_k c_k V^(k).
  /// For the Hook kinds this is just (sigma).
  Vec potential_sigmas() const;
};

/// mu_j / x_j, taken as 0 wherever mu_j = 0 (x_j may then vanish).
Vec mu_ratio(const Vec& mu, const Vec& x);

/// Phase-space point. Which members are populated depends on the system kind:
/// real kinds use (x, y); DoubleJacobi adds (xi, eta); ComplexJacobi uses (z, p).
/// The same type also carries velocities (time derivatives).
struct PhaseState {
  Vec x, y;
  Vec xi, eta;
  CVec z, p;
  double t = 0.0;

  PhaseState& add_scaled(double h, const PhaseState& v);
};

struct ConstraintResiduals {
  double first = 0.0;   ///< F_1 (or G_1, or its complex analogue)
  double second = 0.0;  ///< F_2 (or G_2, ...)
  double max_abs() const { return std::max(std::abs(first), std::abs(second)); }
};

ConstraintResiduals constraint_residuals(const SystemSpec& sys, const PhaseState& s);

/// Conserved energy of the system kind.
double energy(const SystemSpec& sys, const PhaseState& s);

/// Time derivative of the state. Throws ConstraintViolationError when the state
/// is off the constraint manifold by more than ctol, SingularAxisError when
/// |x_k| < 1e-9 with mu_k != 0, and MultiplierSingularError when the multiplier
/// denominator vanishes.
PhaseState rhs(const SystemSpec& sys, const PhaseState& s, double ctol = kDefaultCtol);

/// Right-hand side in the reparametrized time dt = <A^{-2}x, xi> d tau of the double flow.
PhaseState reparametrized_rhs(const SystemSpec& sys, const PhaseState& s,
                              double ctol = kDefaultCtol);

struct IntegratorOptions {
  double ctol = kDefaultCtol;
  int projection_iterations = 2;
  /// Keep every k-th state in the returned trajectory (first and last are always kept).
  int record_every = 1;
};

/// One RK4 step of size h followed by projection back onto the constraints.
PhaseState rk4_step(const SystemSpec& sys, const PhaseState& s, double h,
                    const IntegratorOptions& opts = {});

/// Integrates over [t0, t0 + T] with N = ceil(T/h) equal steps of size T/N.
std::vector<PhaseState> integrate(const SystemSpec& sys, const PhaseState& s0, double T,
                                  double h, const IntegratorOptions& opts = {});

/// Orthogonal-style projection onto the constraint manifold (no-op for free kinds).
PhaseState project(const SystemSpec& sys, PhaseState s, const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Torus reduction of the complex flow.

struct TorusReduction {
  Vec x, y;
  Vec mu;      ///< momentum map h_k = (i/2)(z_k conj(p_k) - p_k conj(z_k))
  Vec phases;  ///< arg z_k
};

TorusReduction torus_reduce(const CVec& z, const CVec& p);
/// Inverse of torus_reduce: z_k = x_k e^{i phi_k}, p_k = (y_k + i mu_k / x_k) e^{i phi_k}.
std::pair<CVec, CVec> torus_reconstruct(const TorusReduction& r);

// ---------------------------------------------------------------------------
// Dirac bracket on T*E^n inside R^{2n+2}(x, y).

/// A scalar function of (x, y) on R^{2n+2}.
using PhaseField = std::function<double(const Vec& x, const Vec& y)>;

/// Dirac Poisson tensor in the coordinate order (x_0..x_n, y_0..y_n), from the
/// closed-form coordinate brackets.
Mat dirac_tensor(const EllipsoidSpec& spec, const Vec& x, const Vec& y);

/// The same tensor assembled from the canonical structure and the gradients of
/// F_1 = <A^{-1}x,x> - 1 and F_2 = <A^{-1}x,y>.
Mat dirac_tensor_from_constraints(const EllipsoidSpec& spec, const Vec& x, const Vec& y);

/// Central-difference gradient with step 1e-6 (1 + |coordinate|), ordered (x, y).
Vec phase_gradient(const PhaseField& f, const Vec& x, const Vec& y);

double dirac_bracket(const EllipsoidSpec& spec, const PhaseField& f, const PhaseField& g,
                     const PhaseState& s, double ctol = kDefaultCtol);

/// X_f = Pi_D grad f, ordered (x, y).
Vec hamiltonian_vector_field(const EllipsoidSpec& spec, const PhaseField& f, const PhaseState& s,
                             double ctol = kDefaultCtol);

// ---------------------------------------------------------------------------
// Random states.

struct RandomStateOptions {
  /// Lower bound on |x_k| relative to sqrt(a_k) before normalization.
  double min_coordinate = 0.25;
  double speed = 1.0;
  /// DoubleJacobi: place the state on the invariant variety
  /// <A^{-1}x, eta> = <A^{-1}y, xi> = 0 (required by the big Lax pair).
  bool invariant_variety = true;
  /// DoubleJacobi: size of the random displacement of xi from x. The t-time
  /// flow is singular where <A^{-2}x, xi> = 0, so partners stay close.
  double partner_offset = 0.02;
};

/// Random state on the system's constraint manifold, with every |x_k| bounded
/// away from zero (and x_k > 0 where mu_k != 0).
PhaseState random_state(const SystemSpec& sys, Rng& rng, const RandomStateOptions& opts = {});

}  // namespace confocal

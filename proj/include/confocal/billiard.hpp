#pragma once

#include "confocal/common.hpp"
#include "confocal/dynamics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace confocal {

/// Billiard inside <x, a^{-1}x> = 1 in R^n, with the Hook force -sigma x and
/// Rosochatius walls x_j = 0 wherever mu_j != 0.
struct BilliardSpec {
  Vec axes;
  double sigma = 0.0;
  Vec mu;                  ///< empty means all zero
  double epsilon = 1e-3;   ///< admissibility bound for sigma > 0

  void validate() const;
  Eigen::Index dim() const { return axes.size(); }
  Vec mu_or_zero() const;
  bool has_mu() const;
  /// d = number of nonzero mu_j.
  int charged_count() const;
  bool distinct_axes() const;
  /// The free Jacobi-Rosochatius system (axes enter only the Lax matrix).
  SystemSpec free_system() const;
};

struct ImpactState {
  Vec x;  ///< impact point on the boundary
  Vec y;  ///< outgoing momentum
  int k = 0;
};

/// J = 2<x, a^{-1}y>, K = sigma - <y, a^{-1}y> - <mu/x, a^{-1}mu/x>, nu = sqrt(sigma J^2 + K^2).
struct StepConstants {
  double J = 0.0;
  double K = 0.0;
  double nu = 0.0;
};

StepConstants step_constants(const BilliardSpec& spec, const ImpactState& s);

/// Throws unless x is on the boundary (1e-8), inside the wall domain, and the
/// momentum points inward (J < -1e-8).
void check_impact(const BilliardSpec& spec, const ImpactState& s);

/// Energy (1/2)|y|^2 + (sigma/2)|x|^2 + (1/2) sum mu^2/x^2.
double billiard_energy(const BilliardSpec& spec, const ImpactState& s);

/// h + (sigma/2) min_{E} <x, x> > epsilon, checked when sigma > 0.
bool admissible(const BilliardSpec& spec, const ImpactState& s);

/// Fedorov map of the complex oscillator billiard (no torus reduction).
/// Throws GrazingOrSingularError when nu^2 <= nu2_tol or |J| < 1e-8.
std::pair<CVec, CVec> fedorov_step(const Vec& axes, double sigma, const CVec& z, const CVec& p,
                                   double nu2_tol = 1e-14);

/// Explicit reduced map. The x_j with mu_j != 0 use the positive root, the
/// others the signed linear formula; y_j is the real part of the complex
/// expression, whose imaginary part must vanish (FormulaConsistencyError above
/// imag_tol). The new impact point is rescaled onto the boundary.
ImpactState jr_step(const BilliardSpec& spec, const ImpactState& s, double nu2_tol = 1e-14,
                    double imag_tol = 1e-8);

struct OracleOptions {
  double h = 1e-3;           ///< nominal step; the event scan uses h/4
  double event_tol = 1e-12;  ///< bisection width in time
  double max_time = 1e3;
};

/// Integrates x'' = -sigma x + mu^2/x^3 with RK4 until the boundary function
/// crosses zero from below, bisects the crossing time, and reflects in the
/// normal a^{-1}x.
ImpactState oracle_step(const BilliardSpec& spec, const ImpactState& s,
                        const OracleOptions& opts = {});

/// Flight time to the next impact from the closed-form oscillator solution of
/// the unreduced (complex) system.
double flight_time(const BilliardSpec& spec, const ImpactState& s);

// ---------------------------------------------------------------------------
// Discrete Lax pair.

/// L(lambda) at an impact state (the small Lax matrix of the free system).
Mat billiard_L(const BilliardSpec& spec, const ImpactState& s, double lambda);

/// A_k(lambda) = [[K lambda + J pi, sigma J lambda - K pi], [-J lambda, K lambda]],
/// pi = J / <x', a^{-2} x'>.
Mat billiard_A(const BilliardSpec& spec, const ImpactState& s, const ImpactState& next,
               double lambda);

struct DiscreteLaxReport {
  std::vector<double> lambdas;
  std::vector<double> det_drift;     ///< |det L_{k+1} - det L_k| per lambda
  std::vector<double> conjugation;   ///< max-entry |L_{k+1}A_k - A_k L_k| per lambda, best signs
  std::vector<double> trace;         ///< max |tr L| over both states per lambda
  Vec signs;                         ///< reflection applied to (x', y') for the best residual
  double max_det_drift() const;
  double max_conjugation() const;
};

DiscreteLaxReport discrete_lax_check(const BilliardSpec& spec, const ImpactState& s,
                                     const ImpactState& next, const std::vector<double>& lambdas);

// ---------------------------------------------------------------------------
// Orbits.

/// A step failure inside an orbit; keeps the category of the original error.
class BounceError : public Error {
 public:
  BounceError(const Error& cause, int bounce)
      : Error(cause.category(), "bounce " + std::to_string(bounce) + ": " + cause.what()),
        bounce_(bounce) {}
  int bounce() const noexcept { return bounce_; }

 private:
  int bounce_;
};

enum class BilliardMap { Lemma, Oracle };

struct OrbitOptions {
  BilliardMap map = BilliardMap::Lemma;
  OracleOptions oracle;
  std::vector<double> lax_lambdas;  ///< discrete Lax check per step when nonempty
  bool caustics = false;            ///< caustic parameters per segment
};

struct BilliardOrbit {
  std::vector<ImpactState> impacts;
  std::vector<std::vector<double>> caustics;  ///< roots of Psi per segment
  std::vector<DiscreteLaxReport> lax;         ///< per step
};

/// Runs `bounces` steps from s0. Errors are rethrown with the bounce index prepended.
BilliardOrbit run_orbit(const BilliardSpec& spec, const ImpactState& s0, int bounces,
                        const OrbitOptions& opts = {});

/// Number of caustics: n + d when sigma != 0, n - 1 + d when sigma = 0.
int expected_caustic_count(const BilliardSpec& spec);

/// Real roots of Psi for the segment leaving s.
std::vector<double> caustic_parameters(const BilliardSpec& spec, const ImpactState& s);

struct CausticReport {
  std::vector<double> eta;       ///< first segment
  int expected_count = 0;
  bool count_ok = false;         ///< every segment had the expected number of roots
  double max_deviation = 0.0;    ///< worst |eta_l(segment) - eta_l(first)|
  std::optional<double> max_tangency;  ///< sigma = 0, mu = 0 only
  std::vector<std::string> flags;      ///< count mismatches, by segment
};

CausticReport orbit_caustics(const BilliardSpec& spec, const BilliardOrbit& orbit);

// ---------------------------------------------------------------------------
// Poncelet closure (planar, sigma = 0, mu = 0 for the companion construction).

/// Inward unit directions at boundary point x whose lines are tangent to Q_eta,
/// from a scan of the tangency function over the direction angle.
std::vector<Vec> tangent_directions(const Vec& axes, const Vec& x, double eta, int samples = 720);

struct PonceletResult {
  std::optional<int> period;
  double closure_error = 0.0;  ///< at the reported period (or the best N when none)
  std::optional<double> eta;   ///< caustic used for the companion
  std::optional<ImpactState> companion;
  std::optional<int> companion_period;
  double companion_error = 0.0;
  bool companion_ok() const { return period && companion_period && *period == *companion_period; }
};

/// Smallest N <= maxN returning to (x_0, y_0) within tol. For planar free
/// billiards with a period, also runs a companion orbit tangent to the same
/// caustic from a rotated boundary point.
PonceletResult poncelet_detect(const BilliardSpec& spec, const ImpactState& s0, int maxN,
                               double tol, double companion_offset = 1.1);

/// Planar ellipse billiard: start at the end of the minor axis with the chord
/// tangent to the ellipse caustic Q_eta, eta in (0, min a), and shoot on eta until
/// N bounces wind once around (rotation number 1/N).
ImpactState poncelet_shoot(const Vec& axes, int N, double speed = 1.0);

/// Unwrapped parametric angle travelled over `bounces` impacts (planar only).
double winding_angle(const Vec& axes, const std::vector<ImpactState>& impacts);

// ---------------------------------------------------------------------------
// Random impacts.

struct RandomImpactOptions {
  double min_coordinate = 0.25;  ///< lower bound on |x_j| / sqrt(a_j) before normalization
  double speed = 1.0;
  double min_incidence = 0.1;    ///< lower bound on |J| / (|y| |a^{-1}x| * 2)
};

ImpactState random_impact(const BilliardSpec& spec, Rng& rng, const RandomImpactOptions& opts = {});

}  // namespace confocal

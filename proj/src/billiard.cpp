#include "confocal/billiard.hpp"

#include "confocal/geometry.hpp"
#include "confocal/lax.hpp"
#include "confocal/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace confocal {

namespace {

constexpr double kGrazing = 1e-8;

double boundary_fn(const Vec& ainv, const Vec& x) { return ainv.dot(x.cwiseAbs2()) - 1.0; }

Vec to_boundary(const Vec& ainv, Vec x) {
  x /= std::sqrt(ainv.dot(x.cwiseAbs2()));
  return x;
}

PhaseState as_phase(const ImpactState& s) {
  PhaseState p;
  p.x = s.x;
  p.y = s.y;
  return p;
}

double angle_of(const Vec& axes, const Vec& x) {
  return std::atan2(x[1] / std::sqrt(axes[1]), x[0] / std::sqrt(axes[0]));
}

double wrap(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

double phase_distance(const ImpactState& a, const ImpactState& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm());
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec.

void BilliardSpec::validate() const {
  if (axes.size() < 1) throw InvalidSpecError("billiard needs at least one axis");
  for (Eigen::Index i = 0; i < axes.size(); ++i)
    if (!std::isfinite(axes[i]) || axes[i] <= 0.0)
      throw InvalidSpecError("axis a_" + std::to_string(i) + " must be positive");
  if (!std::isfinite(sigma)) throw InvalidSpecError("sigma must be finite");
  if (mu.size() > 0) {
    require_size(mu.size(), axes.size(), "mu");
    for (Eigen::Index i = 0; i < mu.size(); ++i)
      if (!std::isfinite(mu[i]) || mu[i] < 0.0)
        throw InvalidSpecError("mu_" + std::to_string(i) + " must be finite and >= 0");
  }
  if (!(epsilon > 0.0)) throw InvalidSpecError("epsilon must be positive");
}

Vec BilliardSpec::mu_or_zero() const { return mu.size() ? mu : Vec::Zero(axes.size()); }

bool BilliardSpec::has_mu() const { return mu.size() && (mu.array() != 0.0).any(); }

int BilliardSpec::charged_count() const {
  return mu.size() ? static_cast<int>((mu.array() != 0.0).count()) : 0;
}

bool BilliardSpec::distinct_axes() const {
  for (Eigen::Index i = 0; i < axes.size(); ++i)
    for (Eigen::Index j = i + 1; j < axes.size(); ++j)
      if (axes[i] == axes[j]) return false;
  return true;
}

SystemSpec BilliardSpec::free_system() const {
  SystemSpec sys;
  sys.kind = SystemKind::FreeJR;
  sys.ellipsoid = EllipsoidSpec(axes);
  sys.sigma = sigma;
  sys.mu = mu_or_zero();
  return sys;
}

StepConstants step_constants(const BilliardSpec& spec, const ImpactState& s) {
  const Vec ainv = spec.axes.cwiseInverse();
  const Vec u = mu_ratio(spec.mu_or_zero(), s.x);
  StepConstants c;
  c.J = 2.0 * ainv.cwiseProduct(s.x).dot(s.y);
  c.K = spec.sigma - ainv.dot(s.y.cwiseAbs2()) - ainv.dot(u.cwiseAbs2());
  const double nu2 = spec.sigma * c.J * c.J + c.K * c.K;
  c.nu = nu2 > 0.0 ? std::sqrt(nu2) : 0.0;
  return c;
}

void check_impact(const BilliardSpec& spec, const ImpactState& s) {
  require_size(s.x.size(), spec.dim(), "impact x");
  require_size(s.y.size(), spec.dim(), "impact y");
  const Vec ainv = spec.axes.cwiseInverse();
  if (std::abs(boundary_fn(ainv, s.x)) > 1e-8)
    throw InvalidCoordsError("impact point is off the boundary");
  const Vec mu = spec.mu_or_zero();
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    if (mu[j] != 0.0 && !(s.x[j] > 0.0))
      throw InvalidCoordsError("x_" + std::to_string(j) + " must be positive where mu_j != 0");
  const double J = 2.0 * ainv.cwiseProduct(s.x).dot(s.y);
  if (std::abs(J) < kGrazing) throw GrazingOrSingularError("grazing impact, |J| < 1e-8");
  if (J > 0.0) throw InvalidCoordsError("outgoing momentum points out of the domain (J > 0)");
}

double billiard_energy(const BilliardSpec& spec, const ImpactState& s) {
  const Vec u = mu_ratio(spec.mu_or_zero(), s.x);
  return 0.5 * s.y.squaredNorm() + 0.5 * spec.sigma * s.x.squaredNorm() + 0.5 * u.squaredNorm();
}

bool admissible(const BilliardSpec& spec, const ImpactState& s) {
  if (spec.sigma <= 0.0) return true;
  const double h = billiard_energy(spec, s);
  return h + 0.5 * spec.sigma * spec.axes.minCoeff() > spec.epsilon;
}

// ---------------------------------------------------------------------------
// Maps.

std::pair<CVec, CVec> fedorov_step(const Vec& axes, double sigma, const CVec& z, const CVec& p,
                                   double nu2_tol) {
  require_size(z.size(), axes.size(), "z");
  require_size(p.size(), axes.size(), "p");
  const CVec ainv = axes.cwiseInverse().cast<cplx>();
  const double J = 2.0 * ainv.cwiseProduct(z).dot(p).real();  // dot conjugates z
  const double K = sigma - ainv.dot(p.cwiseAbs2().cast<cplx>()).real();
  const double nu2 = sigma * J * J + K * K;
  if (std::abs(J) < kGrazing) throw GrazingOrSingularError("grazing impact, |J| < 1e-8");
  if (nu2 <= nu2_tol) throw GrazingOrSingularError("nu^2 = " + std::to_string(nu2));
  const double nu = std::sqrt(nu2);

  CVec z1 = -(K * z + J * p) / nu;
  const double pi = J / z1.cwiseAbs2().cwiseQuotient(axes.cwiseAbs2()).sum();
  CVec p1 =
      -(K * (p + pi * ainv.cwiseProduct(z)) + J * (pi * ainv.cwiseProduct(p) - sigma * z)) / nu;
  return {std::move(z1), std::move(p1)};
}

ImpactState jr_step(const BilliardSpec& spec, const ImpactState& s, double nu2_tol,
                    double imag_tol) {
  check_impact(spec, s);
  const Vec& a = spec.axes;
  const Vec mu = spec.mu_or_zero();
  const Eigen::Index n = a.size();
  const StepConstants c = step_constants(spec, s);
  const double J = c.J, K = c.K, sigma = spec.sigma;
  const double nu2 = sigma * J * J + K * K;
  if (nu2 <= nu2_tol) throw GrazingOrSingularError("nu^2 = " + std::to_string(nu2));
  const double nu = std::sqrt(nu2);
  const cplx I(0.0, 1.0);

  Vec x1(n);
  Vec delta = Vec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lin = K * s.x[j] + J * s.y[j];
    if (mu[j] != 0.0) {
      const double m = J * mu[j] / s.x[j];
      x1[j] = std::sqrt(lin * lin + m * m) / nu;
      delta[j] = std::arg(cplx(-lin, -m));
      if (x1[j] < 1e-9) throw SingularAxisError("x_" + std::to_string(j) + " reaches the wall");
    } else {
      x1[j] = -lin / nu;
    }
  }
  const double pi = J / x1.cwiseAbs2().cwiseQuotient(a.cwiseAbs2()).sum();

  Vec y1(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = s.x[j], y = s.y[j];
    const double u = mu[j] != 0.0 ? mu[j] / x : 0.0;
    const double u1 = mu[j] != 0.0 ? mu[j] / x1[j] : 0.0;
    const cplx rot = std::exp(-I * delta[j]);
    const cplx w = -rot / nu * (K * (pi / a[j] * x + y + I * u)) -
                   J * rot / nu * (pi / a[j] * y - sigma * x + I * (pi * u / a[j])) - I * u1;
    if (std::abs(w.imag()) > imag_tol)
      throw FormulaConsistencyError("imaginary part " + std::to_string(w.imag()) + " in y_" +
                                    std::to_string(j));
    y1[j] = w.real();
  }

  ImpactState out;
  out.x = to_boundary(a.cwiseInverse(), x1);
  out.y = std::move(y1);
  out.k = s.k + 1;
  return out;
}

double flight_time(const BilliardSpec& spec, const ImpactState& s) {
  check_impact(spec, s);
  const StepConstants c = step_constants(spec, s);
  if (spec.sigma == 0.0) return c.J / c.K;
  const double w = std::sqrt(std::abs(spec.sigma));
  if (spec.sigma > 0.0) return std::atan2(-w * c.J, -c.K) / w;
  return std::atanh(w * c.J / c.K) / w;
}

ImpactState oracle_step(const BilliardSpec& spec, const ImpactState& s, const OracleOptions& opts) {
  check_impact(spec, s);
  const SystemSpec sys = spec.free_system();
  const Vec ainv = spec.axes.cwiseInverse();
  double he = opts.h / 4.0;

  PhaseState cur = as_phase(s);
  // Shrink the first step until it stays inside (very short chords).
  PhaseState next = rk4_step(sys, cur, he);
  while (boundary_fn(ainv, next.x) >= 0.0) {
    he *= 0.5;
    if (he < opts.event_tol) throw GrazingOrSingularError("chord shorter than the event tolerance");
    next = rk4_step(sys, cur, he);
  }
  double t = he;
  cur = next;
  for (;;) {
    next = rk4_step(sys, cur, he);
    if (boundary_fn(ainv, next.x) >= 0.0) break;
    cur = next;
    t += he;
    if (t > opts.max_time)
      throw EscapeError("no boundary crossing before t = " + std::to_string(opts.max_time));
  }

  double lo = 0.0, hi = he;
  while (hi - lo > opts.event_tol) {
    const double mid = 0.5 * (lo + hi);
    if (boundary_fn(ainv, rk4_step(sys, cur, mid).x) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const PhaseState hit = rk4_step(sys, cur, 0.5 * (lo + hi));

  const Vec nrm = ainv.cwiseProduct(hit.x);
  ImpactState out;
  out.x = to_boundary(ainv, hit.x);
  out.y = hit.y - 2.0 * (hit.y.dot(nrm) / nrm.squaredNorm()) * nrm;
  out.k = s.k + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Discrete Lax pair.

Mat billiard_L(const BilliardSpec& spec, const ImpactState& s, double lambda) {
  return build_lax(spec.free_system(), as_phase(s), LaxForm::Small, lambda).L;
}

Mat billiard_A(const BilliardSpec& spec, const ImpactState& s, const ImpactState& next,
               double lambda) {
  const StepConstants c = step_constants(spec, s);
  const double pi = c.J / next.x.cwiseAbs2().cwiseQuotient(spec.axes.cwiseAbs2()).sum();
  Mat A(2, 2);
  A << c.K * lambda + c.J * pi, spec.sigma * c.J * lambda - c.K * pi,  //
      -c.J * lambda, c.K * lambda;
  return A;
}

double DiscreteLaxReport::max_det_drift() const {
  return det_drift.empty() ? 0.0 : *std::max_element(det_drift.begin(), det_drift.end());
}

double DiscreteLaxReport::max_conjugation() const {
  return conjugation.empty() ? 0.0 : *std::max_element(conjugation.begin(), conjugation.end());
}

DiscreteLaxReport discrete_lax_check(const BilliardSpec& spec, const ImpactState& s,
                                     const ImpactState& next, const std::vector<double>& lambdas) {
  const Vec mu = spec.mu_or_zero();
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    if (mu[j] == 0.0) free_idx.push_back(j);

  DiscreteLaxReport rep;
  rep.lambdas = lambdas;
  rep.signs = Vec::Ones(spec.dim());
  std::vector<Mat> A, L0;
  for (double lam : lambdas) {
    A.push_back(billiard_A(spec, s, next, lam));
    if (std::abs(A.back().determinant()) < 1e-14)
      throw GrazingOrSingularError("A_k(lambda) singular at lambda = " + std::to_string(lam));
    L0.push_back(billiard_L(spec, s, lam));
  }

  double best = std::numeric_limits<double>::infinity();
  const std::size_t combos = std::size_t{1} << free_idx.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    ImpactState r = next;
    Vec sg = Vec::Ones(spec.dim());
    for (std::size_t b = 0; b < free_idx.size(); ++b)
      if (mask >> b & 1U) sg[free_idx[b]] = -1.0;
    r.x = r.x.cwiseProduct(sg);
    r.y = r.y.cwiseProduct(sg);
    std::vector<double> res;
    double worst = 0.0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const Mat L1 = billiard_L(spec, r, lambdas[l]);
      res.push_back((L1 * A[l] - A[l] * L0[l]).cwiseAbs().maxCoeff());
      worst = std::max(worst, res.back());
    }
    if (worst < best) {
      best = worst;
      rep.conjugation = res;
      rep.signs = sg;
    }
  }

  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const Mat L1 = billiard_L(spec, next, lambdas[l]);
    rep.det_drift.push_back(std::abs(L1.determinant() - L0[l].determinant()));
    rep.trace.push_back(std::max(std::abs(L1.trace()), std::abs(L0[l].trace())));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Orbits and caustics.

int expected_caustic_count(const BilliardSpec& spec) {
  const int n = static_cast<int>(spec.dim());
  return (spec.sigma != 0.0 ? n : n - 1) + spec.charged_count();
}

std::vector<double> caustic_parameters(const BilliardSpec& spec, const ImpactState& s) {
  return psi_roots(spec.free_system(), as_phase(s));
}

BilliardOrbit run_orbit(const BilliardSpec& spec, const ImpactState& s0, int bounces,
                        const OrbitOptions& opts) {
  spec.validate();
  BilliardOrbit orbit;
  orbit.impacts.reserve(static_cast<std::size_t>(bounces) + 1);
  orbit.impacts.push_back(s0);
  for (int b = 0; b < bounces; ++b) {
    const ImpactState& cur = orbit.impacts.back();
    try {
      if (opts.caustics) orbit.caustics.push_back(caustic_parameters(spec, cur));
      ImpactState nxt = opts.map == BilliardMap::Lemma ? jr_step(spec, cur)
                                                       : oracle_step(spec, cur, opts.oracle);
      if (!opts.lax_lambdas.empty())
        orbit.lax.push_back(discrete_lax_check(spec, cur, nxt, opts.lax_lambdas));
      orbit.impacts.push_back(std::move(nxt));
    } catch (const BounceError&) {
      throw;
    } catch (const Error& e) {
      throw BounceError(e, cur.k);
    }
  }
  return orbit;
}

CausticReport orbit_caustics(const BilliardSpec& spec, const BilliardOrbit& orbit) {
  CausticReport rep;
  rep.expected_count = expected_caustic_count(spec);
  if (!spec.distinct_axes()) throw SymmetricSpecError("caustic report needs distinct axes");
  std::vector<std::vector<double>> roots = orbit.caustics;
  if (roots.empty())
    for (std::size_t k = 0; k + 1 < orbit.impacts.size(); ++k)
      roots.push_back(caustic_parameters(spec, orbit.impacts[k]));
  if (roots.empty()) return rep;

  rep.eta = roots.front();
  rep.count_ok = true;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (static_cast<int>(roots[k].size()) != rep.expected_count) {
      rep.count_ok = false;
      rep.flags.push_back("segment " + std::to_string(k) + ": " + std::to_string(roots[k].size()) +
                          " roots, expected " + std::to_string(rep.expected_count));
    }
    if (roots[k].size() != rep.eta.size()) {
      rep.max_deviation = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t l = 0; l < rep.eta.size(); ++l)
      rep.max_deviation = std::max(rep.max_deviation, std::abs(roots[k][l] - rep.eta[l]));
  }

  if (spec.sigma == 0.0 && !spec.has_mu()) {
    double worst = 0.0;
    for (std::size_t k = 0; k < roots.size() && k < orbit.impacts.size(); ++k)
      for (double eta : rep.eta) {
        // Orbits in a coordinate plane have eta on an axis; the quadric degenerates there.
        if (((spec.axes.array() - eta).abs() < 1e-9 * (1.0 + spec.axes.array().abs())).any()) continue;
        worst = std::max(worst, std::abs(tangency_value(spec.axes, orbit.impacts[k].x,
                                                        orbit.impacts[k].y, eta, 0.0)));
      }
    rep.max_tangency = worst;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Poncelet closure.

std::vector<Vec> tangent_directions(const Vec& axes, const Vec& x, double eta, int samples) {
  require_size(axes.size(), 2, "tangent_directions axes");
  require_size(x.size(), 2, "tangent_directions x");
  const Vec ainv = axes.cwiseInverse();
  auto dir = [](double phi) {
    Vec d(2);
    d << std::cos(phi), std::sin(phi);
    return d;
  };
  auto f = [&](double phi) { return tangency_value(axes, x, dir(phi), eta, 0.0); };
  std::vector<Vec> out;
  for (double phi : poly::sign_change_roots(f, 0.0, 2.0 * M_PI, samples)) {
    Vec d = dir(phi);
    if (ainv.cwiseProduct(x).dot(d) < -kGrazing) out.push_back(std::move(d));
  }
  return out;
}

double winding_angle(const Vec& axes, const std::vector<ImpactState>& impacts) {
  require_size(axes.size(), 2, "winding_angle axes");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < impacts.size(); ++k)
    total += wrap(angle_of(axes, impacts[k + 1].x) - angle_of(axes, impacts[k].x));
  return total;
}

namespace {

ImpactState minor_axis_start(const Vec& axes, double eta, double speed) {
  const Eigen::Index m = axes[0] < axes[1] ? 0 : 1;
  ImpactState s;
  s.x = Vec::Zero(2);
  s.x[m] = std::sqrt(axes[m]);
  // Of the two inward tangents, keep the one that turns counterclockwise.
  for (const Vec& d : tangent_directions(axes, s.x, eta))
    if (s.x[0] * d[1] - s.x[1] * d[0] > 0.0) s.y = speed * d;
  if (s.y.size() == 0) throw GrazingOrSingularError("no tangent from the minor-axis vertex");
  return s;
}

double winding_after(const Vec& axes, double eta, int N) {
  BilliardSpec spec;
  spec.axes = axes;
  const BilliardOrbit orbit = run_orbit(spec, minor_axis_start(axes, eta, 1.0), N);
  return winding_angle(axes, orbit.impacts);
}

}  // namespace

ImpactState poncelet_shoot(const Vec& axes, int N, double speed) {
  require_size(axes.size(), 2, "poncelet_shoot axes");
  if (N < 3) throw InvalidSpecError("shooting needs N >= 3");
  const double b = axes.minCoeff();
  double lo = 1e-4 * b, hi = b * (1.0 - 1e-4);
  auto g = [&](double eta) { return winding_after(axes, eta, N) - 2.0 * M_PI; };
  if (!(g(lo) < 0.0 && g(hi) > 0.0)) throw GrazingOrSingularError("no closing caustic bracketed");
  while (hi - lo > 1e-15 * b) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return minor_axis_start(axes, 0.5 * (lo + hi), speed);
}

PonceletResult poncelet_detect(const BilliardSpec& spec, const ImpactState& s0, int maxN,
                               double tol, double companion_offset) {
  PonceletResult res;
  const BilliardOrbit orbit = run_orbit(spec, s0, maxN);
  res.closure_error = std::numeric_limits<double>::infinity();
  for (int N = 1; N <= maxN; ++N) {
    const double e = phase_distance(orbit.impacts[static_cast<std::size_t>(N)], s0);
    if (e < tol) {
      res.period = N;
      res.closure_error = e;
      break;
    }
    res.closure_error = std::min(res.closure_error, e);
  }
  if (!res.period || spec.dim() != 2 || spec.sigma != 0.0 || spec.has_mu()) return res;

  // Degenerate caustics (axis orbits) have no companion construction.
  try {
    const auto eta = caustic_parameters(spec, s0);
    if (eta.size() != 1) return res;
    res.eta = eta.front();
    const double orient = s0.x[0] * s0.y[1] - s0.x[1] * s0.y[0];
    const double speed = s0.y.norm();
    const double theta0 = angle_of(spec.axes, s0.x);
    for (int attempt = 0; attempt < 8 && !res.companion; ++attempt) {
      const double th = theta0 + companion_offset + 0.37 * attempt;
      ImpactState c;
      c.x = Vec(2);
      c.x << std::sqrt(spec.axes[0]) * std::cos(th), std::sqrt(spec.axes[1]) * std::sin(th);
      for (const Vec& d : tangent_directions(spec.axes, c.x, *res.eta))
        if ((c.x[0] * d[1] - c.x[1] * d[0]) * orient > 0.0) c.y = speed * d;
      if (c.y.size() == 2) res.companion = c;
    }
  } catch (const PoleError&) {
    return res;
  } catch (const GrazingOrSingularError&) {
    return res;
  }
  if (!res.companion) return res;

  const BilliardOrbit comp = run_orbit(spec, *res.companion, maxN);
  res.companion_error =
      phase_distance(comp.impacts[static_cast<std::size_t>(*res.period)], *res.companion);
  for (int N = 1; N <= maxN; ++N)
    if (phase_distance(comp.impacts[static_cast<std::size_t>(N)], *res.companion) < tol) {
      res.companion_period = N;
      break;
    }
  return res;
}

// ---------------------------------------------------------------------------
// Random impacts.

ImpactState random_impact(const BilliardSpec& spec, Rng& rng, const RandomImpactOptions& opts) {
  spec.validate();
  const Vec& a = spec.axes;
  const Vec ainv = a.cwiseInverse();
  const Vec mu = spec.mu_or_zero();
  const Eigen::Index n = a.size();
  const double lo = std::clamp(opts.min_coordinate, 0.0, 0.99);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec x(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mag = rng.uniform(lo, 1.0);
      const double sg = mu[j] != 0.0 ? 1.0 : rng.sign();
      x[j] = sg * mag * std::sqrt(a[j]);
    }
    x = to_boundary(ainv, x);
    Vec y = rng.normal_vector(n);
    y *= opts.speed / y.norm();
    const Vec nrm = ainv.cwiseProduct(x);
    double J = 2.0 * nrm.dot(y);
    if (J > 0.0) {
      y = -y;
      J = -J;
    }
    if (std::abs(J) < 2.0 * opts.min_incidence * y.norm() * nrm.norm()) continue;
    ImpactState s{x, y, 0};
    const StepConstants c = step_constants(spec, s);
    if (spec.sigma * c.J * c.J + c.K * c.K <= 1e-10) continue;
    if (!admissible(spec, s)) continue;
    return s;
  }
  throw GrazingOrSingularError("no admissible random impact found");
}

}  // namespace confocal

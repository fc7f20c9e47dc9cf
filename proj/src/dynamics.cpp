#include "confocal/dynamics.hpp"

#include "confocal/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace confocal {

namespace {

struct KindName {
  SystemKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {SystemKind::Jacobi, "jacobi"},
    {SystemKind::DoubleJacobi, "double_jacobi"},
    {SystemKind::ComplexJacobi, "complex_jacobi"},
    {SystemKind::JacobiRosochatius, "jacobi_rosochatius"},
    {SystemKind::SeparableHierarchy, "separable_hierarchy"},
    {SystemKind::FreeOscillator, "free_oscillator"},
    {SystemKind::FreeJR, "free_jr"},
};

constexpr double kSingularAxis = 1e-9;

bool uses_mu(SystemKind k) {
  return k == SystemKind::JacobiRosochatius || k == SystemKind::SeparableHierarchy ||
         k == SystemKind::FreeJR;
}

void check_axes_clear(const SystemSpec& sys, const Vec& x) {
  if (!sys.has_mu()) return;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (sys.mu[k] != 0.0 && std::abs(x[k]) < kSingularAxis)
      throw SingularAxisError("|x_" + std::to_string(k) + "| < 1e-9 with mu_k != 0");
}

double checked_denominator(double d, double scale) {
  if (!std::isfinite(d) || std::abs(d) <= 1e-14 * scale)
    throw MultiplierSingularError("multiplier denominator vanishes");
  return d;
}

void require_state(const SystemSpec& sys, const PhaseState& s) {
  const Eigen::Index N = sys.ellipsoid.size();
  if (sys.complex()) {
    require_size(s.z.size(), N, "state z");
    require_size(s.p.size(), N, "state p");
    return;
  }
  require_size(s.x.size(), N, "state x");
  require_size(s.y.size(), N, "state y");
  if (sys.kind == SystemKind::DoubleJacobi) {
    require_size(s.xi.size(), N, "state xi");
    require_size(s.eta.size(), N, "state eta");
  }
}

// Total potential gradient of the real single-copy kinds.
Vec potential_gradient(const SystemSpec& sys, const Vec& x) {
  Vec g = sys.kind == SystemKind::SeparableHierarchy
              ? hierarchy_potential(sys.ellipsoid.axes(), sys.sigmas, x).gradient
              : Vec(sys.sigma * x);
  if (sys.has_mu()) g += rosochatius_potential(sys.mu, x).gradient;
  return g;
}

// The flow equations without the on-manifold precondition (RK stages sit
// slightly off the constraints).
PhaseState raw_rhs(const SystemSpec& sys, const PhaseState& s) {
  const Vec& a = sys.ellipsoid.axes();
  const Vec ainv = a.cwiseInverse();
  PhaseState v;
  v.t = 1.0;
  switch (sys.kind) {
    case SystemKind::Jacobi:
    case SystemKind::JacobiRosochatius:
    case SystemKind::SeparableHierarchy: {
      check_axes_clear(sys, s.x);
      const Vec Ax = ainv.cwiseProduct(s.x);
      const double D = checked_denominator(Ax.squaredNorm(), 1.0);
      double num = s.y.dot(ainv.cwiseProduct(s.y));
      Vec force;
      if (sys.kind == SystemKind::SeparableHierarchy) {
        force = -potential_gradient(sys, s.x);
        num += force.dot(Ax);
      } else {
        force = -sys.sigma * s.x;
        num -= sys.sigma;
        if (sys.has_mu()) {
          const Vec r = mu_ratio(sys.mu, s.x);
          num += r.dot(ainv.cwiseProduct(r));
          force += r.cwiseAbs2().cwiseProduct(mu_ratio(sys.mu.cwiseAbs().cwiseSign(), s.x));
        }
      }
      v.x = s.y;
      v.y = -(num / D) * Ax + force;
      break;
    }
    case SystemKind::DoubleJacobi: {
      const Vec Ax = ainv.cwiseProduct(s.x);
      const Vec Axi = ainv.cwiseProduct(s.xi);
      const double D = checked_denominator(Ax.dot(Axi), Ax.norm() * Axi.norm());
      const double m = (s.y.dot(ainv.cwiseProduct(s.eta)) - sys.sigma) / D;
      v.x = s.y;
      v.xi = s.eta;
      v.y = -m * Ax - sys.sigma * s.x;
      v.eta = -m * Axi - sys.sigma * s.xi;
      break;
    }
    case SystemKind::ComplexJacobi: {
      const CVec Az = ainv.cast<cplx>().cwiseProduct(s.z);
      const double D = checked_denominator(Az.squaredNorm(), 1.0);
      // <A^{-1}p, conj p> is real: sum |p_i|^2 / a_i.
      const double m = (ainv.dot(s.p.cwiseAbs2()) - sys.sigma) / D;
      v.z = s.p;
      v.p = -m * Az - sys.sigma * s.z;
      break;
    }
    case SystemKind::FreeOscillator:
      v.x = s.y;
      v.y = -sys.sigma * s.x;
      break;
    case SystemKind::FreeJR: {
      check_axes_clear(sys, s.x);
      v.x = s.y;
      v.y = -sys.sigma * s.x;
      if (sys.has_mu())
        v.y += mu_ratio(sys.mu, s.x).cwiseAbs2().cwiseProduct(mu_ratio(sys.mu.cwiseAbs().cwiseSign(), s.x));
      break;
    }
  }
  return v;
}

void require_on_shell(const SystemSpec& sys, const PhaseState& s, double ctol) {
  const auto r = constraint_residuals(sys, s);
  if (!(r.max_abs() <= ctol))
    throw ConstraintViolationError("state is off the constraint manifold (residual " +
                                   std::to_string(r.max_abs()) + ")");
}

}  // namespace

std::string to_string(SystemKind kind) {
  for (const auto& e : kKindNames)
    if (e.kind == kind) return e.name;
  return "unknown";
}

SystemKind parse_system_kind(const std::string& name) {
  for (const auto& e : kKindNames)
    if (name == e.name) return e.kind;
  throw ConfigError("unknown system kind '" + name + "'");
}

bool SystemSpec::constrained() const {
  return kind != SystemKind::FreeOscillator && kind != SystemKind::FreeJR;
}

bool SystemSpec::has_mu() const { return mu.size() > 0 && mu.cwiseAbs().maxCoeff() > 0.0; }

Vec mu_ratio(const Vec& mu, const Vec& x) {
  Vec r = Vec::Zero(x.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    if (mu[j] != 0.0) r[j] = mu[j] / x[j];
  return r;
}

Vec SystemSpec::mu_or_zero() const { return mu.size() > 0 ? mu : Vec::Zero(ellipsoid.size()); }

Vec SystemSpec::potential_sigmas() const {
  if (kind == SystemKind::SeparableHierarchy) return sigmas;
  return Vec::Constant(1, sigma);
}

void SystemSpec::validate() const {
  const Eigen::Index N = ellipsoid.size();
  if (N < (constrained() ? 2 : 1))
    throw InvalidSpecError("system '" + to_string(kind) + "' needs more axes");
  if (!std::isfinite(sigma)) throw InvalidSpecError("sigma must be finite");
  if (mu.size() > 0) {
    require_size(mu.size(), N, "mu");
    for (Eigen::Index i = 0; i < N; ++i)
      if (!std::isfinite(mu[i]) || mu[i] < 0.0)
        throw InvalidSpecError("mu_" + std::to_string(i) + " must be finite and >= 0");
    if (has_mu() && !uses_mu(kind))
      throw InvalidSpecError("system '" + to_string(kind) + "' takes no Rosochatius constants");
  }
  if (kind == SystemKind::SeparableHierarchy) {
    if (sigmas.size() < 1) throw InvalidSpecError("separable hierarchy needs sigma_1..sigma_m, m >= 1");
    if (!sigmas.allFinite()) throw InvalidSpecError("sigmas must be finite");
  } else if (sigmas.size() > 0) {
    throw InvalidSpecError("sigmas apply only to the separable hierarchy");
  }
}

PhaseState& PhaseState::add_scaled(double h, const PhaseState& v) {
  if (v.x.size()) x += h * v.x;
  if (v.y.size()) y += h * v.y;
  if (v.xi.size()) xi += h * v.xi;
  if (v.eta.size()) eta += h * v.eta;
  if (v.z.size()) z += h * v.z;
  if (v.p.size()) p += h * v.p;
  t += h * v.t;
  return *this;
}

ConstraintResiduals constraint_residuals(const SystemSpec& sys, const PhaseState& s) {
  require_state(sys, s);
  const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
  ConstraintResiduals r;
  switch (sys.kind) {
    case SystemKind::FreeOscillator:
    case SystemKind::FreeJR:
      break;
    case SystemKind::DoubleJacobi: {
      const Vec Axi = ainv.cwiseProduct(s.xi);
      r.first = s.x.dot(Axi) - 1.0;
      r.second = s.y.dot(Axi) + s.x.dot(ainv.cwiseProduct(s.eta));
      break;
    }
    case SystemKind::ComplexJacobi: {
      r.first = ainv.dot(s.z.cwiseAbs2()) - 1.0;
      r.second = 2.0 * (ainv.cast<cplx>().cwiseProduct(s.z).cwiseProduct(s.p.conjugate())).sum().real();
      break;
    }
    default: {
      const Vec Ax = ainv.cwiseProduct(s.x);
      r.first = Ax.dot(s.x) - 1.0;
      r.second = Ax.dot(s.y);
      break;
    }
  }
  return r;
}

double energy(const SystemSpec& sys, const PhaseState& s) {
  require_state(sys, s);
  switch (sys.kind) {
    case SystemKind::DoubleJacobi:
      return s.y.dot(s.eta) + sys.sigma * s.x.dot(s.xi);
    case SystemKind::ComplexJacobi:
      return 0.5 * s.p.squaredNorm() + 0.5 * sys.sigma * s.z.squaredNorm();
    case SystemKind::SeparableHierarchy: {
      double H = 0.5 * s.y.squaredNorm() +
                 hierarchy_potential(sys.ellipsoid.axes(), sys.sigmas, s.x).value;
      if (sys.has_mu()) H += rosochatius_potential(sys.mu, s.x).value;
      return H;
    }
    default: {
      double H = 0.5 * s.y.squaredNorm() + 0.5 * sys.sigma * s.x.squaredNorm();
      if (sys.has_mu()) H += rosochatius_potential(sys.mu, s.x).value;
      return H;
    }
  }
}

PhaseState rhs(const SystemSpec& sys, const PhaseState& s, double ctol) {
  require_state(sys, s);
  require_on_shell(sys, s, ctol);
  return raw_rhs(sys, s);
}

PhaseState reparametrized_rhs(const SystemSpec& sys, const PhaseState& s, double ctol) {
  if (sys.kind != SystemKind::DoubleJacobi)
    throw InvalidSpecError("reparametrized_rhs is defined for the double Jacobi flow");
  require_state(sys, s);
  require_on_shell(sys, s, ctol);
  const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
  const Vec Ax = ainv.cwiseProduct(s.x);
  const Vec Axi = ainv.cwiseProduct(s.xi);
  const double D = checked_denominator(Ax.dot(Axi), Ax.norm() * Axi.norm());
  const double c = sys.sigma - s.y.dot(ainv.cwiseProduct(s.eta));
  PhaseState v;
  v.t = D;
  v.x = D * s.y;
  v.xi = D * s.eta;
  v.y = c * Ax - sys.sigma * D * s.x;
  v.eta = c * Axi - sys.sigma * D * s.xi;
  return v;
}

PhaseState project(const SystemSpec& sys, PhaseState s, const IntegratorOptions& opts) {
  const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
  switch (sys.kind) {
    case SystemKind::FreeOscillator:
    case SystemKind::FreeJR:
      return s;
    case SystemKind::DoubleJacobi: {
      // x += alpha A^{-1} xi, xi += alpha A^{-1} x (Newton on G_1), then the
      // exact shift y += beta A^{-1} xi, eta += beta A^{-1} x for G_2.
      for (int it = 0; it < opts.projection_iterations; ++it) {
        const Vec Ax = ainv.cwiseProduct(s.x), Axi = ainv.cwiseProduct(s.xi);
        const double g = s.x.dot(Axi) - 1.0;
        const double dg = Axi.squaredNorm() + Ax.squaredNorm();
        const double alpha = -g / dg;
        s.x += alpha * Axi;
        s.xi += alpha * Ax;
      }
      const Vec Ax = ainv.cwiseProduct(s.x), Axi = ainv.cwiseProduct(s.xi);
      const double beta = -(s.y.dot(Axi) + s.eta.dot(Ax)) / (Axi.squaredNorm() + Ax.squaredNorm());
      s.y += beta * Axi;
      s.eta += beta * Ax;
      break;
    }
    case SystemKind::ComplexJacobi: {
      const CVec ac = ainv.cast<cplx>();
      for (int it = 0; it < opts.projection_iterations; ++it) {
        const CVec Az = ac.cwiseProduct(s.z);
        const double g = ainv.dot(s.z.cwiseAbs2()) - 1.0;
        const double dg = 2.0 * Az.squaredNorm();
        s.z += (-g / dg) * Az;
      }
      const CVec Az = ac.cwiseProduct(s.z);
      const double beta = -Az.cwiseProduct(s.p.conjugate()).sum().real() / Az.squaredNorm();
      s.p += beta * Az;
      break;
    }
    default: {
      // x += alpha A^{-1} x (Newton on F_1), then y += beta A^{-1} x (exact for F_2).
      for (int it = 0; it < opts.projection_iterations; ++it) {
        const Vec Ax = ainv.cwiseProduct(s.x);
        const double f = Ax.dot(s.x) - 1.0;
        s.x += (-f / (2.0 * Ax.squaredNorm())) * Ax;
      }
      const Vec Ax = ainv.cwiseProduct(s.x);
      s.y -= (Ax.dot(s.y) / Ax.squaredNorm()) * Ax;
      break;
    }
  }
  const auto r = constraint_residuals(sys, s);
  if (!(r.max_abs() <= opts.ctol))
    throw ProjectionError("projection did not reach ctol (residual " +
                          std::to_string(r.max_abs()) + ")");
  return s;
}

PhaseState rk4_step(const SystemSpec& sys, const PhaseState& s, double h,
                    const IntegratorOptions& opts) {
  const PhaseState k1 = raw_rhs(sys, s);
  PhaseState s2 = s;
  s2.add_scaled(0.5 * h, k1);
  const PhaseState k2 = raw_rhs(sys, s2);
  PhaseState s3 = s;
  s3.add_scaled(0.5 * h, k2);
  const PhaseState k3 = raw_rhs(sys, s3);
  PhaseState s4 = s;
  s4.add_scaled(h, k3);
  const PhaseState k4 = raw_rhs(sys, s4);
  PhaseState out = s;
  out.add_scaled(h / 6.0, k1).add_scaled(h / 3.0, k2).add_scaled(h / 3.0, k3).add_scaled(h / 6.0, k4);
  out.t = s.t + h;
  out = project(sys, std::move(out), opts);
  check_axes_clear(sys, sys.complex() ? Vec() : out.x);
  return out;
}

std::vector<PhaseState> integrate(const SystemSpec& sys, const PhaseState& s0, double T, double h,
                                  const IntegratorOptions& opts) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidSpecError("step h must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidSpecError("duration T must be >= 0");
  require_state(sys, s0);
  require_on_shell(sys, s0, opts.ctol);
  const long steps = T == 0.0 ? 0 : static_cast<long>(std::ceil(T / h - 1e-9));
  const double dt = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  const int every = std::max(1, opts.record_every);
  std::vector<PhaseState> out{s0};
  PhaseState s = s0;
  for (long k = 1; k <= steps; ++k) {
    s = rk4_step(sys, s, dt, opts);
    s.t = s0.t + static_cast<double>(k) * dt;
    if (k % every == 0 || k == steps) out.push_back(s);
  }
  return out;
}

TorusReduction torus_reduce(const CVec& z, const CVec& p) {
  require_size(p.size(), z.size(), "torus_reduce");
  const Eigen::Index N = z.size();
  TorusReduction r{Vec(N), Vec(N), Vec(N), Vec(N)};
  for (Eigen::Index k = 0; k < N; ++k) {
    const double h = (p[k] * std::conj(z[k])).imag();
    r.mu[k] = h;
    r.x[k] = std::abs(z[k]);
    if (r.x[k] == 0.0) {
      if (h != 0.0) throw ReductionSingularError("z_" + std::to_string(k) + " = 0 with h_k != 0");
      r.phases[k] = 0.0;
      r.y[k] = p[k].real();
      continue;
    }
    r.phases[k] = std::arg(z[k]);
    r.y[k] = (p[k] * std::polar(1.0, -r.phases[k])).real();
  }
  return r;
}

std::pair<CVec, CVec> torus_reconstruct(const TorusReduction& r) {
  const Eigen::Index N = r.x.size();
  require_size(r.y.size(), N, "torus_reconstruct y");
  require_size(r.mu.size(), N, "torus_reconstruct mu");
  require_size(r.phases.size(), N, "torus_reconstruct phases");
  CVec z(N), p(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const cplx e = std::polar(1.0, r.phases[k]);
    z[k] = r.x[k] * e;
    if (r.x[k] == 0.0) {
      if (r.mu[k] != 0.0) throw ReductionSingularError("x_" + std::to_string(k) + " = 0 with mu_k != 0");
      p[k] = r.y[k] * e;
    } else {
      p[k] = cplx(r.y[k], r.mu[k] / r.x[k]) * e;
    }
  }
  return {z, p};
}

Mat dirac_tensor(const EllipsoidSpec& spec, const Vec& x, const Vec& y) {
  const Eigen::Index N = spec.size();
  require_size(x.size(), N, "dirac_tensor x");
  require_size(y.size(), N, "dirac_tensor y");
  const Vec u = spec.axes().cwiseInverse().cwiseProduct(x);  // A^{-1}x
  const Vec w = spec.axes().cwiseInverse().cwiseProduct(y);  // A^{-1}y
  const double D = checked_denominator(u.squaredNorm(), 1.0);
  Mat P = Mat::Zero(2 * N, 2 * N);
  const Mat xy = Mat::Identity(N, N) - u * u.transpose() / D;
  const Mat yy = -(u * w.transpose() - w * u.transpose()) / D;
  P.topRightCorner(N, N) = xy;
  P.bottomLeftCorner(N, N) = -xy.transpose();
  P.bottomRightCorner(N, N) = yy;
  return P;
}

Mat dirac_tensor_from_constraints(const EllipsoidSpec& spec, const Vec& x, const Vec& y) {
  const Eigen::Index N = spec.size();
  require_size(x.size(), N, "dirac_tensor x");
  require_size(y.size(), N, "dirac_tensor y");
  const Vec ainv = spec.axes().cwiseInverse();
  Mat J = Mat::Zero(2 * N, 2 * N);
  J.topRightCorner(N, N).setIdentity();
  J.bottomLeftCorner(N, N) = -Mat::Identity(N, N);
  Vec g1(2 * N), g2(2 * N);
  g1 << 2.0 * ainv.cwiseProduct(x), Vec::Zero(N);
  g2 << ainv.cwiseProduct(y), ainv.cwiseProduct(x);
  const Vec u1 = J * g1, u2 = J * g2;
  const double c = checked_denominator(g1.dot(u2), 1.0);
  return J + (u2 * u1.transpose() - u1 * u2.transpose()) / c;
}

Vec phase_gradient(const PhaseField& f, const Vec& x, const Vec& y) {
  const Eigen::Index N = x.size();
  require_size(y.size(), N, "phase_gradient");
  Vec g(2 * N);
  Vec xp = x, yp = y;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp, y);
    xp[i] = x[i] - h;
    const double fm = f(xp, y);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    const double h = 1e-6 * (1.0 + std::abs(y[i]));
    yp[i] = y[i] + h;
    const double fp = f(x, yp);
    yp[i] = y[i] - h;
    const double fm = f(x, yp);
    yp[i] = y[i];
    g[N + i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

namespace {

void require_on_ellipsoid_shell(const EllipsoidSpec& spec, const PhaseState& s, double ctol) {
  require_size(s.x.size(), spec.size(), "state x");
  require_size(s.y.size(), spec.size(), "state y");
  const Vec Ax = spec.axes().cwiseInverse().cwiseProduct(s.x);
  const double r = std::max(std::abs(Ax.dot(s.x) - 1.0), std::abs(Ax.dot(s.y)));
  if (!(r <= ctol))
    throw ConstraintViolationError("state is off T*E^n (residual " + std::to_string(r) + ")");
}

}  // namespace

double dirac_bracket(const EllipsoidSpec& spec, const PhaseField& f, const PhaseField& g,
                     const PhaseState& s, double ctol) {
  require_on_ellipsoid_shell(spec, s, ctol);
  const Vec gf = phase_gradient(f, s.x, s.y);
  const Vec gg = phase_gradient(g, s.x, s.y);
  return gf.dot(dirac_tensor(spec, s.x, s.y) * gg);
}

Vec hamiltonian_vector_field(const EllipsoidSpec& spec, const PhaseField& f, const PhaseState& s,
                             double ctol) {
  require_on_ellipsoid_shell(spec, s, ctol);
  return dirac_tensor(spec, s.x, s.y) * phase_gradient(f, s.x, s.y);
}

namespace {

// Random coordinates with |u_k| in [lo, 1] and positive entries where required.
Vec bounded_coordinates(Rng& rng, Eigen::Index N, double lo, const Vec& positive_mask) {
  Vec u(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double mag = rng.uniform(lo, 1.0);
    const double sg = rng.sign();
    u[k] = (positive_mask.size() && positive_mask[k] != 0.0) ? mag : sg * mag;
  }
  return u;
}

// Component of v orthogonal to n.
Vec orthogonal_part(const Vec& v, const Vec& n) { return v - (v.dot(n) / n.squaredNorm()) * n; }

}  // namespace

PhaseState random_state(const SystemSpec& sys, Rng& rng, const RandomStateOptions& opts) {
  sys.validate();
  const Vec& a = sys.ellipsoid.axes();
  const Vec ainv = a.cwiseInverse();
  const Eigen::Index N = a.size();
  const double lo = std::clamp(opts.min_coordinate, 0.0, 0.99);
  PhaseState s;
  switch (sys.kind) {
    case SystemKind::ComplexJacobi: {
      const Vec mag = bounded_coordinates(rng, N, lo, Vec::Ones(N));
      CVec z(N);
      for (Eigen::Index k = 0; k < N; ++k)
        z[k] = std::polar(mag[k] * std::sqrt(a[k]), rng.uniform(0.0, 2.0 * M_PI));
      z /= std::sqrt(ainv.dot(z.cwiseAbs2()));
      CVec p(N);
      for (Eigen::Index k = 0; k < N; ++k) p[k] = cplx(rng.normal(), rng.normal());
      const CVec Az = ainv.cast<cplx>().cwiseProduct(z);
      p -= (Az.cwiseProduct(p.conjugate()).sum().real() / Az.squaredNorm()) * Az;
      p *= opts.speed / p.norm();
      s.z = z;
      s.p = p;
      return s;
    }
    case SystemKind::FreeOscillator:
    case SystemKind::FreeJR: {
      // Interior point of the ellipsoid <x, a^{-1}x> <= 1 (half-way to the boundary).
      const Vec u = bounded_coordinates(rng, N, lo, sys.mu_or_zero());
      s.x = 0.5 * u.cwiseProduct(a.cwiseSqrt()) / u.norm();
      s.y = opts.speed * rng.normal_vector(N).normalized();
      return s;
    }
    default:
      break;
  }

  const Vec u = bounded_coordinates(rng, N, lo, sys.mu_or_zero());
  s.x = u.cwiseProduct(a.cwiseSqrt()) / u.norm();
  const Vec Ax = ainv.cwiseProduct(s.x);
  s.y = orthogonal_part(rng.normal_vector(N), Ax);
  s.y *= opts.speed / s.y.norm();
  if (sys.kind != SystemKind::DoubleJacobi) return s;

  // A nearby partner xi keeps <A^{-2}x, xi> well away from zero.
  Vec xi = s.x + opts.partner_offset * rng.normal_vector(N).cwiseProduct(a.cwiseSqrt()) / std::sqrt(double(N));
  xi /= s.x.dot(ainv.cwiseProduct(xi));
  s.xi = xi;
  const Vec Axi = ainv.cwiseProduct(xi);
  // Momenta are displaced by the same relative amount as the positions.
  const Vec base = s.y;
  const Vec partner = base + opts.partner_offset * rng.normal_vector(N) / std::sqrt(double(N));
  if (opts.invariant_variety) {
    s.y = orthogonal_part(base, Axi);
    s.eta = orthogonal_part(partner, Ax);
  } else {
    s.y = base;
    s.eta = partner;
    const double g2 = s.y.dot(Axi) + s.x.dot(ainv.cwiseProduct(s.eta));
    s.y -= (g2 / Axi.squaredNorm()) * Axi;
  }
  const double scale = opts.speed / std::sqrt(0.5 * (s.y.squaredNorm() + s.eta.squaredNorm()));
  s.y *= scale;
  s.eta *= scale;
  return s;
}

}  // namespace confocal

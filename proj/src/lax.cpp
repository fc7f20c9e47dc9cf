#include "confocal/lax.hpp"

#include "confocal/polynomial.hpp"
#include "confocal/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace confocal {

namespace {

bool single_real_kind(const SystemSpec& sys) {
  return sys.kind != SystemKind::DoubleJacobi && sys.kind != SystemKind::ComplexJacobi;
}

void check_lambda(const SystemSpec& sys, double lambda, bool need_A) {
  const Vec& a = sys.ellipsoid.axes();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(lambda - a[i]) <= 1e-12 * (1.0 + std::abs(a[i])))
      throw PoleError("lambda coincides with axis " + std::to_string(i));
  if (need_A && sys.constrained() && std::abs(lambda) <= 1e-14)
    throw PoleError("A(lambda) has a pole at lambda = 0");
}

// mu / x, with zero wherever mu vanishes.
Vec mu_over_x(const SystemSpec& sys, const Vec& x) {
  Vec u = Vec::Zero(x.size());
  if (!sys.has_mu()) return u;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (sys.mu[i] != 0.0) u[i] = sys.mu[i] / x[i];
  return u;
}

// Polynomial entry of L_12: Delta(x, lambda) for the hierarchy, sigma otherwise.
double delta_total(const SystemSpec& sys, const Vec& x, double lambda) {
  if (sys.kind != SystemKind::SeparableHierarchy) return sys.sigma;
  double d = 0.0;
  for (int k = 1; k <= sys.sigmas.size(); ++k)
    if (sys.sigmas[k - 1] != 0.0)
      d += sys.sigmas[k - 1] * poly::eval(delta_coefficients(sys.ellipsoid.axes(), x, k), lambda);
  return d;
}

// sum_k sigma_k Omega_k(x, lambda), or sigma.
double omega_total(const SystemSpec& sys, const Vec& x, double lambda) {
  if (sys.kind != SystemKind::SeparableHierarchy) return sys.sigma;
  double w = 0.0;
  for (int k = 1; k <= sys.sigmas.size(); ++k)
    if (sys.sigmas[k - 1] != 0.0)
      w += sys.sigmas[k - 1] * poly::eval(omega_coefficients(sys.ellipsoid.axes(), x, k), lambda);
  return w;
}

// Value of sum_k sigma_k lambda^{k-1} (sigma for the Hook kinds).
double polynomial_part(const SystemSpec& sys, double lambda) {
  if (sys.kind != SystemKind::SeparableHierarchy) return sys.sigma;
  return poly::eval(sys.sigmas, lambda);
}

int polynomial_degree(const SystemSpec& sys) {
  const Vec c = sys.potential_sigmas();
  for (Eigen::Index k = c.size() - 1; k >= 0; --k)
    if (c[k] != 0.0) return static_cast<int>(k);
  return -1;
}

Mat small_L_real(const SystemSpec& sys, const PhaseState& s, double lambda) {
  const Vec& a = sys.ellipsoid.axes();
  Mat L(2, 2);
  if (sys.kind == SystemKind::DoubleJacobi) {
    L(0, 0) = q_form<double>(a, lambda, s.x, s.eta);
    L(0, 1) = q_form<double>(a, lambda, s.y, s.eta) + sys.sigma;
    L(1, 0) = -1.0 - q_form<double>(a, lambda, s.x, s.xi);
    L(1, 1) = -q_form<double>(a, lambda, s.y, s.xi);
    return L;
  }
  const Vec u = mu_over_x(sys, s.x);
  const double qxy = q_form<double>(a, lambda, s.x, s.y);
  L(0, 0) = qxy;
  L(0, 1) = q_form<double>(a, lambda, s.y, s.y) + q_form<double>(a, lambda, u, u) +
            delta_total(sys, s.x, lambda);
  L(1, 0) = -1.0 - q_form<double>(a, lambda, s.x, s.x);
  L(1, 1) = -qxy;
  return L;
}

Mat small_A_real(const SystemSpec& sys, const PhaseState& s, double lambda) {
  Mat A = Mat::Zero(2, 2);
  A(1, 0) = 1.0;
  if (!sys.constrained()) {
    A(0, 1) = -sys.sigma;
    return A;
  }
  const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
  const Vec Ax = ainv.cwiseProduct(s.x);
  if (sys.kind == SystemKind::DoubleJacobi) {
    const double D = Ax.dot(ainv.cwiseProduct(s.xi));
    const double c = sys.sigma - s.y.dot(ainv.cwiseProduct(s.eta));
    A(0, 1) = (c / lambda - sys.sigma * D) / D;
    return A;
  }
  const double D = Ax.squaredNorm();
  const Vec u = mu_over_x(sys, s.x);
  double c = -s.y.dot(ainv.cwiseProduct(s.y)) - u.dot(ainv.cwiseProduct(u));
  if (sys.kind == SystemKind::SeparableHierarchy)
    c += hierarchy_potential(sys.ellipsoid.axes(), sys.sigmas, s.x).gradient.dot(Ax);
  else
    c += sys.sigma;
  A(0, 1) = (c / lambda - D * omega_total(sys, s.x, lambda)) / D;
  return A;
}

LaxPair<double> big_lax(const SystemSpec& sys, const PhaseState& s, double lambda,
                        double variety_tol) {
  const bool dbl = sys.kind == SystemKind::DoubleJacobi;
  if (sys.kind != SystemKind::Jacobi && !dbl)
    throw InvalidSpecError("the big Lax pair is available for the Jacobi and double Jacobi flows");
  const Vec& a = sys.ellipsoid.axes();
  const Vec ainv = a.cwiseInverse();
  const Vec& x = s.x;
  const Vec& y = s.y;
  const Vec& xi = dbl ? s.xi : s.x;
  const Vec& eta = dbl ? s.eta : s.y;
  const double v1 = ainv.cwiseProduct(x).dot(eta), v2 = ainv.cwiseProduct(y).dot(xi);
  if (std::max(std::abs(v1), std::abs(v2)) > variety_tol)
    throw InvariantVarietyError("<A^{-1}x,eta> or <A^{-1}y,xi> is nonzero");
  const Vec Ax = ainv.cwiseProduct(x), Axi = ainv.cwiseProduct(xi);
  const double D = Ax.dot(Axi);
  LaxPair<double> P;
  P.L = lambda * (y * xi.transpose() - x * eta.transpose()) + y * eta.transpose() +
        sys.sigma * x * xi.transpose();
  P.L.diagonal() -= (sys.sigma + lambda * lambda) * a;
  P.A = ainv.cwiseProduct(y) * Axi.transpose() - Ax * ainv.cwiseProduct(eta).transpose();
  P.A.diagonal() += lambda * ainv;
  P.A /= D;
  return P;
}

Matrix<cplx> complex_L(const SystemSpec& sys, const PhaseState& s, double lambda) {
  const Vec& a = sys.ellipsoid.axes();
  const CVec zb = s.z.conjugate(), pb = s.p.conjugate();
  Matrix<cplx> L(2, 2);
  L(0, 0) = q_form<cplx>(a, lambda, s.z, pb);
  L(0, 1) = q_form<cplx>(a, lambda, s.p, pb) + sys.sigma;
  L(1, 0) = -1.0 - q_form<cplx>(a, lambda, s.z, zb);
  L(1, 1) = -q_form<cplx>(a, lambda, s.p, zb);
  return L;
}

void require_on_shell(const SystemSpec& sys, const PhaseState& s, double ctol) {
  const double r = constraint_residuals(sys, s).max_abs();
  if (!(r <= ctol))
    throw ConstraintViolationError("state is off the constraint manifold (residual " +
                                   std::to_string(r) + ")");
}

template <class Scalar, class Build>
double residual_impl(const SystemSpec& sys, const PhaseState& s, LaxForm form, double h,
                     const IntegratorOptions& opts, Build build) {
  if (!(h > 0.0)) throw InvalidSpecError("lax_residual: h must be positive");
  require_on_shell(sys, s, opts.ctol);
  const PhaseState fwd = rk4_step(sys, s, h, opts);
  const PhaseState bwd = rk4_step(sys, s, -h, opts);
  const LaxPair<Scalar> P0 = build(s);
  const Matrix<Scalar> dL = (build(fwd).L - build(bwd).L) / Scalar(2.0 * h);
  const Matrix<Scalar> comm =
      form == LaxForm::Small ? Matrix<Scalar>(P0.L * P0.A - P0.A * P0.L)
                             : Matrix<Scalar>(P0.A * P0.L - P0.L * P0.A);
  return (dL - comm).cwiseAbs().maxCoeff();
}

}  // namespace

LaxPair<double> build_lax(const SystemSpec& sys, const PhaseState& s, LaxForm form,
                          double lambda, double variety_tol) {
  if (sys.complex()) throw InvalidSpecError("use build_complex_lax for the complex flow");
  check_lambda(sys, lambda, true);
  if (form == LaxForm::Big) return big_lax(sys, s, lambda, variety_tol);
  return {small_L_real(sys, s, lambda), small_A_real(sys, s, lambda)};
}

LaxPair<cplx> build_complex_lax(const SystemSpec& sys, const PhaseState& s, double lambda) {
  if (!sys.complex()) throw InvalidSpecError("build_complex_lax needs the complex flow");
  check_lambda(sys, lambda, true);
  const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
  const double D = ainv.cwiseAbs2().dot(s.z.cwiseAbs2());
  const double c = sys.sigma - ainv.dot(s.p.cwiseAbs2());
  Matrix<cplx> A = Matrix<cplx>::Zero(2, 2);
  A(0, 1) = (c / lambda - sys.sigma * D) / D;
  A(1, 0) = 1.0;
  return {complex_L(sys, s, lambda), A};
}

double lax_residual(const SystemSpec& sys, const PhaseState& s, LaxForm form, double lambda,
                    double h, const IntegratorOptions& opts) {
  check_lambda(sys, lambda, true);
  if (sys.complex()) {
    if (form == LaxForm::Big) throw InvalidSpecError("no big Lax pair for the complex flow");
    return residual_impl<cplx>(sys, s, form, h, opts,
                               [&](const PhaseState& t) { return build_complex_lax(sys, t, lambda); });
  }
  return residual_impl<double>(sys, s, form, h, opts,
                               [&](const PhaseState& t) { return build_lax(sys, t, form, lambda); });
}

double det_L(const SystemSpec& sys, const PhaseState& s, double lambda) {
  check_lambda(sys, lambda, false);
  if (sys.complex()) return complex_L(sys, s, lambda).determinant().real();
  return small_L_real(sys, s, lambda).determinant();
}

// ---------------------------------------------------------------------------
// Integrals.

double rosochatius_pair(const Vec& x, const Vec& y, const Vec& mu, int i, int j) {
  const double w = y[i] * x[j] - x[i] * y[j];
  double P = w * w;
  if (mu.size() > 0) {
    if (mu[i] != 0.0) P += mu[i] * mu[i] * x[j] * x[j] / (x[i] * x[i]);
    if (mu[j] != 0.0) P += mu[j] * mu[j] * x[i] * x[i] / (x[j] * x[j]);
  }
  return P;
}

namespace {

// Potential share of f_i: sum_k sigma_k F_i^(k) (sigma x_i^2 for the Hook kinds).
Vec potential_parts(const SystemSpec& sys, const Vec& x) {
  if (sys.kind != SystemKind::SeparableHierarchy) return sys.sigma * x.cwiseAbs2();
  const int m = static_cast<int>(sys.sigmas.size());
  const auto t = hierarchy_eval(sys.ellipsoid.axes(), x, m);
  Vec p = Vec::Zero(x.size());
  for (int k = 0; k < m; ++k) p += sys.sigmas[k] * t.F[static_cast<std::size_t>(k)];
  return p;
}

// Diagonal part y_i^2 + potential_i + mu_i^2 / x_i^2.
Vec diagonal_parts(const SystemSpec& sys, const Vec& x, const Vec& y) {
  Vec d = y.cwiseAbs2() + potential_parts(sys, x);
  if (sys.has_mu())
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (sys.mu[i] != 0.0) d[i] += sys.mu[i] * sys.mu[i] / (x[i] * x[i]);
  return d;
}

double f_single(const SystemSpec& sys, const Vec& x, const Vec& y, int i) {
  const Vec& a = sys.ellipsoid.axes();
  const Vec mu = sys.mu_or_zero();
  double f = diagonal_parts(sys, x, y)[i];
  for (int j = 0; j < x.size(); ++j)
    if (j != i) f += rosochatius_pair(x, y, mu, i, j) / (a[i] - a[j]);
  return f;
}

double f_tilde_single(const SystemSpec& sys, const Vec& x, const Vec& y, int s) {
  const Vec& a = sys.ellipsoid.axes();
  const Vec mu = sys.mu_or_zero();
  const auto& group = sys.ellipsoid.partition()[static_cast<std::size_t>(s)];
  const auto& owner = sys.ellipsoid.group_of();
  const Vec d = diagonal_parts(sys, x, y);
  double f = 0.0;
  for (int i : group) {
    f += d[i];
    for (int j = 0; j < x.size(); ++j)
      if (owner[static_cast<std::size_t>(j)] != s) f += rosochatius_pair(x, y, mu, i, j) / (a[i] - a[j]);
  }
  return f;
}

// Sum of P_ij over i < j among the first `count` members of group s.
double chain_sum(const SystemSpec& sys, const Vec& x, const Vec& y, int s, std::size_t count) {
  const auto& group = sys.ellipsoid.partition()[static_cast<std::size_t>(s)];
  const Vec mu = sys.mu_or_zero();
  double P = 0.0;
  for (std::size_t u = 0; u < count; ++u)
    for (std::size_t v = u + 1; v < count; ++v) P += rosochatius_pair(x, y, mu, group[u], group[v]);
  return P;
}

void require_distinct(const SystemSpec& sys) {
  if (!sys.ellipsoid.distinct())
    throw SymmetricSpecError("f_i needs distinct axes; use the group integrals f~_s instead");
}

// f_i of the double flow, also used for the complex flow through the
// substitution x = z, xi = conj z, y = p, eta = conj p.
template <class Scalar>
Vec double_f(const SystemSpec& sys, const Vector<Scalar>& x, const Vector<Scalar>& xi,
             const Vector<Scalar>& y, const Vector<Scalar>& eta) {
  const Vec& a = sys.ellipsoid.axes();
  const Eigen::Index N = a.size();
  Vec f(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Scalar v = y[i] * eta[i] + sys.sigma * x[i] * xi[i];
    for (Eigen::Index j = 0; j < N; ++j)
      if (j != i)
        v += (y[i] * x[j] - y[j] * x[i]) * (eta[i] * xi[j] - eta[j] * xi[i]) / (a[i] - a[j]);
    f[i] = std::real(v);
  }
  return f;
}

}  // namespace

Vec integrals_f(const SystemSpec& sys, const PhaseState& s) {
  require_distinct(sys);
  if (sys.kind == SystemKind::DoubleJacobi) return double_f<double>(sys, s.x, s.xi, s.y, s.eta);
  if (sys.complex())
    return double_f<cplx>(sys, s.z, CVec(s.z.conjugate()), s.p, CVec(s.p.conjugate()));
  Vec f(s.x.size());
  for (int i = 0; i < s.x.size(); ++i) f[i] = f_single(sys, s.x, s.y, i);
  return f;
}

IntegralFamily integral_family(const SystemSpec& sys, const PhaseState& s) {
  IntegralFamily F;
  F.energy = energy(sys, s);
  const auto& groups = sys.ellipsoid.partition();
  const int G = static_cast<int>(groups.size());
  if (!single_real_kind(sys)) {
    F.f = integrals_f(sys, s);
    F.f_tilde = F.f;
    F.P = Vec::Zero(G);
    F.P_pair.assign(static_cast<std::size_t>(G), Mat::Zero(1, 1));
    F.L_chain.assign(static_cast<std::size_t>(G), Vec());
    if (sys.kind == SystemKind::DoubleJacobi) F.g = s.y.cwiseProduct(s.xi) - s.x.cwiseProduct(s.eta);
    if (sys.complex()) {
      const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
      const double D = ainv.cwiseAbs2().dot(s.z.cwiseAbs2());
      F.J = ainv.dot(s.p.cwiseAbs2()) * D - sys.sigma * D;
    }
    return F;
  }
  if (sys.ellipsoid.distinct()) F.f = integrals_f(sys, s);
  const Vec mu = sys.mu_or_zero();
  F.f_tilde.resize(G);
  F.P.resize(G);
  for (int g = 0; g < G; ++g) {
    const auto& grp = groups[static_cast<std::size_t>(g)];
    const auto k = grp.size();
    F.f_tilde[g] = f_tilde_single(sys, s.x, s.y, g);
    F.P[g] = chain_sum(sys, s.x, s.y, g, k);
    Mat Pp = Mat::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t u = 0; u < k; ++u)
      for (std::size_t v = u + 1; v < k; ++v)
        Pp(u, v) = Pp(v, u) = rosochatius_pair(s.x, s.y, mu, grp[u], grp[v]);
    F.P_pair.push_back(Pp);
    Vec Lc(static_cast<Eigen::Index>(k) - 1);
    for (std::size_t lvl = 1; lvl < k; ++lvl) Lc[static_cast<Eigen::Index>(lvl) - 1] = chain_sum(sys, s.x, s.y, g, lvl + 1);
    F.L_chain.push_back(Lc);
  }
  return F;
}

double det_L_from_integrals(const SystemSpec& sys, const PhaseState& s, double lambda) {
  check_lambda(sys, lambda, false);
  const IntegralFamily F = integral_family(sys, s);
  const Vec& alpha = sys.ellipsoid.group_values();
  double d = polynomial_part(sys, lambda);
  for (Eigen::Index g = 0; g < alpha.size(); ++g) {
    const double w = 1.0 / (lambda - alpha[g]);
    d += F.f_tilde[g] * w + F.P[g] * w * w;
  }
  if (single_real_kind(sys) && sys.has_mu()) {
    const Vec& a = sys.ellipsoid.axes();
    for (Eigen::Index i = 0; i < a.size(); ++i) d += sys.mu[i] * sys.mu[i] / std::pow(lambda - a[i], 2);
  }
  return d;
}

std::pair<double, double> alpha_relation(const SystemSpec& sys, const PhaseState& s) {
  if (!sys.constrained()) throw InvalidSpecError("the alpha relation holds on the ellipsoid");
  const IntegralFamily F = integral_family(sys, s);
  const Vec& alpha = sys.ellipsoid.group_values();
  double lhs = 0.0, rhs = polynomial_part(sys, 0.0);
  for (Eigen::Index g = 0; g < alpha.size(); ++g) {
    lhs += F.f_tilde[g] / alpha[g];
    rhs += F.P[g] / (alpha[g] * alpha[g]);
  }
  if (single_real_kind(sys) && sys.has_mu()) {
    const Vec& a = sys.ellipsoid.axes();
    rhs += sys.mu.cwiseAbs2().cwiseQuotient(a.cwiseAbs2()).sum();
  }
  if (sys.complex()) {
    // det L(0) = -|<A^{-1}z, conj p>|^2 here: the constraint only kills the real part.
    const Vec ainv = sys.ellipsoid.axes().cwiseInverse();
    rhs += std::norm(ainv.cast<cplx>().cwiseProduct(s.z).dot(s.p));
  }
  return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Spectral polynomial.

std::vector<int> psi_pole_orders(const SystemSpec& sys) {
  std::vector<int> delta;
  const Vec mu = sys.mu_or_zero();
  for (const auto& grp : sys.ellipsoid.partition()) {
    bool charged = false;
    if (single_real_kind(sys))
      for (int i : grp) charged = charged || mu[i] != 0.0;
    delta.push_back(grp.size() >= 2 || charged ? 2 : 1);
  }
  return delta;
}

double psi_eval(const SystemSpec& sys, const PhaseState& s, double lambda) {
  const Vec& alpha = sys.ellipsoid.group_values();
  const auto delta = psi_pole_orders(sys);
  double w = det_L(sys, s, lambda);
  for (Eigen::Index g = 0; g < alpha.size(); ++g)
    w *= std::pow(lambda - alpha[g], delta[static_cast<std::size_t>(g)]);
  return w;
}

PsiPolynomial psi_poly(const SystemSpec& sys, const PhaseState& s) {
  PsiPolynomial out;
  out.alphas = sys.ellipsoid.group_values();
  out.delta = psi_pole_orders(sys);
  int total = 0;
  for (int d : out.delta) total += d;
  const int pd = polynomial_degree(sys);
  out.degree = pd >= 0 ? total + pd : total - 1;

  std::vector<double> sorted(out.alphas.data(), out.alphas.data() + out.alphas.size());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const double width = std::max(hi - lo, 0.5 * std::max(1.0, std::abs(hi)));
  const int wanted = 2 * (out.degree + 1) + 4;
  std::vector<double> nodes;
  for (std::size_t g = 0; g + 1 < sorted.size(); ++g)
    for (double frac : {0.2, 0.4, 0.6, 0.8}) nodes.push_back(sorted[g] + frac * (sorted[g + 1] - sorted[g]));
  const int outside = std::max(2, (wanted - static_cast<int>(nodes.size()) + 1) / 2);
  for (int k = 1; k <= outside; ++k) {
    nodes.push_back(lo - 0.35 * k * width);
    nodes.push_back(hi + 0.35 * k * width);
  }
  Vec t(static_cast<Eigen::Index>(nodes.size())), v(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t[i] = nodes[static_cast<std::size_t>(i)];
    v[i] = psi_eval(sys, s, t[i]);
  }
  out.coeffs = poly::fit(t, v, out.degree);
  return out;
}

std::vector<double> psi_roots(const SystemSpec& sys, const PhaseState& s) {
  const PsiPolynomial P = psi_poly(sys, s);
  const Vec c = P.coeffs;
  auto refine = [&](double lambda) {
    try {
      return psi_eval(sys, s, lambda);
    } catch (const PoleError&) {
      return poly::eval(c, lambda);
    }
  };
  return poly::real_roots(c, 1e-7, refine);
}

// ---------------------------------------------------------------------------
// Commutation surface.

std::string IntegralId::name() const {
  switch (kind) {
    case IntegralKind::F:
      return "f_" + std::to_string(s);
    case IntegralKind::FTilde:
      return "f~_" + std::to_string(s);
    case IntegralKind::GroupP:
      return "P_" + std::to_string(s);
    case IntegralKind::PairP:
      return "P_{" + std::to_string(s) + ";" + std::to_string(i) + "," + std::to_string(j) + "}";
    case IntegralKind::ChainL:
      return "L_{" + std::to_string(s) + "," + std::to_string(k) + "}";
  }
  return "?";
}

double evaluate_integral(const SystemSpec& sys, const IntegralId& id, const Vec& x, const Vec& y) {
  if (!single_real_kind(sys) || !sys.constrained())
    throw InvalidSpecError("the commutation surface covers the real ellipsoid kinds");
  switch (id.kind) {
    case IntegralKind::F:
      require_distinct(sys);
      return f_single(sys, x, y, id.s);
    case IntegralKind::FTilde:
      return f_tilde_single(sys, x, y, id.s);
    case IntegralKind::GroupP:
      return chain_sum(sys, x, y, id.s, sys.ellipsoid.partition()[static_cast<std::size_t>(id.s)].size());
    case IntegralKind::PairP:
      return rosochatius_pair(x, y, sys.mu_or_zero(), id.i, id.j);
    case IntegralKind::ChainL:
      return chain_sum(sys, x, y, id.s, static_cast<std::size_t>(id.k) + 1);
  }
  return 0.0;
}

PhaseField integral_field(const SystemSpec& sys, const std::vector<IntegralId>& sum) {
  return [sys, sum](const Vec& x, const Vec& y) {
    double v = 0.0;
    for (const auto& id : sum) v += evaluate_integral(sys, id, x, y);
    return v;
  };
}

std::string BracketPair::name() const {
  auto side = [](const std::vector<IntegralId>& ids) {
    std::string out;
    for (std::size_t t = 0; t < ids.size(); ++t) out += (t ? "+" : "") + ids[t].name();
    return out;
  };
  return "{" + side(first) + ", " + side(second) + "}";
}

std::vector<BracketPair> vanishing_pairs(const EllipsoidSpec& spec) {
  const auto& groups = spec.partition();
  const int G = static_cast<int>(groups.size());
  auto ft = [](int s) { return IntegralId{IntegralKind::FTilde, s, 0, 0, 0}; };
  auto gp = [](int s) { return IntegralId{IntegralKind::GroupP, s, 0, 0, 0}; };
  auto pp = [](int s, int i, int j) {
    return IntegralId{IntegralKind::PairP, s, std::min(i, j), std::max(i, j), 0};
  };
  auto lc = [](int s, int k) { return IntegralId{IntegralKind::ChainL, s, 0, 0, k}; };
  auto big = [&](int s) { return groups[static_cast<std::size_t>(s)].size() >= 2; };
  auto pairs_of = [&](int s) {
    std::vector<IntegralId> out;
    const auto& g = groups[static_cast<std::size_t>(s)];
    for (std::size_t u = 0; u < g.size(); ++u)
      for (std::size_t v = u + 1; v < g.size(); ++v) out.push_back(pp(s, g[u], g[v]));
    return out;
  };

  std::vector<BracketPair> out;
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = s1 + 1; s2 < G; ++s2) out.push_back({"f~,f~", {ft(s1)}, {ft(s2)}});
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = 0; s2 < G; ++s2)
      if (big(s2)) out.push_back({"f~,P", {ft(s1)}, {gp(s2)}});
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = s1 + 1; s2 < G; ++s2)
      if (big(s1) && big(s2)) out.push_back({"P,P", {gp(s1)}, {gp(s2)}});
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = 0; s2 < G; ++s2)
      for (const auto& q : pairs_of(s2)) out.push_back({"f~,P_ij", {ft(s1)}, {q}});
  for (int s1 = 0; s1 < G; ++s1)
    if (big(s1))
      for (int s2 = 0; s2 < G; ++s2)
        for (const auto& q : pairs_of(s2)) out.push_back({"P,P_ij", {gp(s1)}, {q}});
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = s1 + 1; s2 < G; ++s2)
      for (const auto& q1 : pairs_of(s1))
        for (const auto& q2 : pairs_of(s2)) out.push_back({"P_ij,P_kl across groups", {q1}, {q2}});
  for (int s = 0; s < G; ++s) {
    const auto& g = groups[static_cast<std::size_t>(s)];
    for (std::size_t u = 0; u < g.size(); ++u)
      for (std::size_t v = u + 1; v < g.size(); ++v)
        for (std::size_t w = 0; w < g.size(); ++w) {
          if (w == u || w == v) continue;
          out.push_back({"P_ij,P_ik+P_jk", {pp(s, g[u], g[v])},
                         {pp(s, g[u], g[w]), pp(s, g[v], g[w])}});
          for (std::size_t z = w + 1; z < g.size(); ++z)
            if (z != u && z != v)
              out.push_back({"P_ij,P_kl within group", {pp(s, g[u], g[v])}, {pp(s, g[w], g[z])}});
        }
    for (std::size_t k = 1; k < g.size(); ++k) {
      for (std::size_t u = 0; u <= k; ++u)
        for (std::size_t v = u + 1; v <= k; ++v)
          out.push_back({"P_ij,L_k", {pp(s, g[u], g[v])}, {lc(s, static_cast<int>(k))}});
      for (std::size_t k2 = k + 1; k2 < g.size(); ++k2)
        out.push_back({"L,L", {lc(s, static_cast<int>(k))}, {lc(s, static_cast<int>(k2))}});
    }
  }
  for (int s1 = 0; s1 < G; ++s1)
    for (int s2 = s1 + 1; s2 < G; ++s2)
      for (std::size_t k1 = 1; k1 < groups[static_cast<std::size_t>(s1)].size(); ++k1)
        for (std::size_t k2 = 1; k2 < groups[static_cast<std::size_t>(s2)].size(); ++k2)
          out.push_back({"L,L", {lc(s1, static_cast<int>(k1))}, {lc(s2, static_cast<int>(k2))}});
  return out;
}

std::vector<BracketRecord> commutation_suite(const SystemSpec& sys, const PhaseState& s,
                                             const std::vector<BracketPair>& pairs, double ctol) {
  std::vector<BracketRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double v = dirac_bracket(sys.ellipsoid, integral_field(sys, p.first),
                                   integral_field(sys, p.second), s, ctol);
    out.push_back({p.name(), p.family, v});
  }
  return out;
}

namespace {

std::pair<int, Vec> numeric_rank(const Mat& M, double threshold) {
  if (M.cols() == 0) return {0, Vec()};
  const Vec sv = Eigen::JacobiSVD<Mat>(M).singularValues();
  const double cut = threshold * sv.maxCoeff();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  return {r, sv};
}

}  // namespace

RankReport rank_dimensions(const SystemSpec& sys, const PhaseState& s, double threshold,
                           double ctol) {
  const auto& groups = sys.ellipsoid.partition();
  const int G = static_cast<int>(groups.size());
  std::vector<Vec> fields_F, fields_K;
  auto field = [&](IntegralId id) {
    return hamiltonian_vector_field(sys.ellipsoid, integral_field(sys, {id}), s, ctol);
  };
  int rho = 0;
  for (int g = 0; g < G; ++g) {
    const Vec X = field({IntegralKind::FTilde, g, 0, 0, 0});
    fields_F.push_back(X);
    fields_K.push_back(X);
    const auto& grp = groups[static_cast<std::size_t>(g)];
    if (grp.size() < 2) continue;
    ++rho;
    fields_K.push_back(field({IntegralKind::GroupP, g, 0, 0, 0}));
    for (std::size_t u = 0; u < grp.size(); ++u)
      for (std::size_t v = u + 1; v < grp.size(); ++v)
        fields_F.push_back(field({IntegralKind::PairP, g, grp[u], grp[v], 0}));
  }
  auto stack = [](const std::vector<Vec>& cols) {
    Mat M(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) M.col(static_cast<Eigen::Index>(c)) = cols[c];
    return M;
  };
  RankReport R;
  const int n = static_cast<int>(sys.ellipsoid.dim());
  const int r = G - 1;
  R.expected_F = 2 * n - r - rho;
  R.expected_K = r + rho;
  std::tie(R.rank_F, R.singular_F) = numeric_rank(stack(fields_F), threshold);
  std::tie(R.rank_K, R.singular_K) = numeric_rank(stack(fields_K), threshold);
  return R;
}

}  // namespace confocal

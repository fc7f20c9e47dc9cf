#include "confocal/potentials.hpp"

#include <cmath>

namespace confocal {

HierarchyTables hierarchy_eval(const Vec& axes, const Vec& x, int m) {
  require_size(x.size(), axes.size(), "hierarchy_eval");
  if (m < 1) throw InvalidSpecError("hierarchy_eval: m must be at least 1");
  const Eigen::Index N = x.size();
  HierarchyTables t;
  Vec F = x.array().square();
  Mat dF = Mat::Zero(N, N);  // dF(i, j) = d F_i / d x_j
  dF.diagonal() = 2.0 * x;
  for (int k = 1; k <= m; ++k) {
    const double V = F.sum();
    const Vec dV = dF.colwise().sum().transpose();
    t.V.push_back(V);
    t.F.push_back(F);
    t.grad_V.push_back(dV);
    if (k == m) break;
    // F_i <- a_i F_i - x_i^2 V
    Mat dNext = axes.asDiagonal() * dF - x.array().square().matrix() * dV.transpose();
    dNext.diagonal() -= 2.0 * V * x;
    F = axes.array() * F.array() - x.array().square() * V;
    dF = std::move(dNext);
  }
  return t;
}

RosochatiusValue rosochatius_eval(const Vec& axes, const Vec& x, int s, int degree) {
  require_size(x.size(), axes.size(), "rosochatius_eval");
  if (s < 0 || s >= x.size()) throw DimensionError("rosochatius_eval: index out of range");
  if (degree != -1 && degree != -2)
    throw InvalidSpecError("rosochatius_eval: degree must be -1 or -2");
  if (x[s] == 0.0) throw SingularAxisError("x_" + std::to_string(s) + " = 0");
  const Eigen::Index N = x.size();
  for (Eigen::Index i = 0; i < N; ++i) {
    if (i != s && axes[i] == axes[s])
      throw SymmetricSpecError("Rosochatius basis needs a_i != a_s");
  }
  const double xs2 = x[s] * x[s];
  RosochatiusValue r;
  r.F = Vec::Zero(N);
  if (degree == -1) {
    r.V = 1.0 / xs2;
    for (Eigen::Index i = 0; i < N; ++i)
      if (i != s) r.F[i] = x[i] * x[i] / ((axes[i] - axes[s]) * xs2);
  } else {
    double bracket = 1.0;
    for (Eigen::Index j = 0; j < N; ++j)
      if (j != s) bracket += x[j] * x[j] / (axes[s] - axes[j]);
    r.V = bracket / (xs2 * xs2);
    for (Eigen::Index i = 0; i < N; ++i)
      if (i != s) r.F[i] = 2.0 * x[i] * x[i] * bracket / ((axes[i] - axes[s]) * xs2 * xs2);
  }
  r.F[s] = r.V - (r.F.sum() - r.F[s]);
  return r;
}

namespace {

// Fourth-order central difference of g at 0.
template <class G>
double d1(const G& g, double h) {
  return (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
}

}  // namespace

double bd_residual(const Vec& axes, const PointField& V, const Vec& x, int i, int j) {
  require_size(x.size(), axes.size(), "bd_residual");
  if (i == j) throw DimensionError("bd_residual: i must differ from j");
  const double h = 1e-3 * std::max(1.0, x.cwiseAbs().maxCoeff());
  const Eigen::Index N = x.size();
  auto ei = [&](Eigen::Index k) { return Vec::Unit(N, k); };

  // d^2 V / dx_i dx_j
  auto dj_at = [&](const Vec& p) {
    return d1([&](double s) { return V(p + s * ei(j)); }, h);
  };
  const double mixed = d1([&](double s) { return dj_at(x + s * ei(i)); }, h);

  // W = 2V + sum_k x_k d_k V; the Euler term is d/dt V(t p) at t = 1.
  auto W = [&](const Vec& p) {
    return 2.0 * V(p) + d1([&](double s) { return V((1.0 + s) * p); }, h);
  };
  // (x_i d_j - x_j d_i) W is the derivative of W along v = x_i e_j - x_j e_i.
  const Vec v = x[i] * ei(j) - x[j] * ei(i);
  const double rot = d1([&](double s) { return W(x + s * v); }, h);
  return (axes[j] - axes[i]) * mixed + rot;
}

Vec delta_coefficients(const Vec& axes, const Vec& x, int k) {
  if (k < 1) throw InvalidSpecError("delta_coefficients: k must be at least 1");
  Vec c = Vec::Zero(k);
  c[k - 1] = 1.0;
  if (k >= 2) {
    const auto t = hierarchy_eval(axes, x, k - 1);
    for (int j = 1; j <= k - 1; ++j) c[k - 1 - j] = -t.V[j - 1];
  }
  return c;
}

Vec omega_coefficients(const Vec& axes, const Vec& x, int k) {
  const Vec delta = delta_coefficients(axes, x, k);
  // 1 + q_lambda(x,x) = 1 + sum_{m>=0} <A^m x, x> w^{m+1}, w = 1/lambda.
  // Its reciprocal r(w) = sum_l r_l w^l is needed up to w^{k-1}.
  std::vector<double> c(static_cast<std::size_t>(k), 0.0);  // c[m] = <A^m x, x>
  Vec ax = x;
  for (int m = 0; m < k; ++m) {
    c[static_cast<std::size_t>(m)] = ax.dot(x);
    ax = axes.cwiseProduct(ax);
  }
  std::vector<double> r(static_cast<std::size_t>(k), 0.0);
  r[0] = 1.0;
  for (int l = 1; l < k; ++l) {
    double s = 0.0;
    for (int m = 0; m + 1 <= l; ++m) s += c[static_cast<std::size_t>(m)] * r[static_cast<std::size_t>(l - m - 1)];
    r[static_cast<std::size_t>(l)] = -s;
  }
  // Polynomial part of Delta(lambda) * r(1/lambda).
  Vec omega = Vec::Zero(k);
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) omega[j] += delta[i] * r[static_cast<std::size_t>(i - j)];
  return omega;
}

namespace {

void check_off_poles(const Vec& axes, double lambda) {
  for (Eigen::Index i = 0; i < axes.size(); ++i)
    if (std::abs(lambda - axes[i]) <= 1e-12 * (1.0 + std::abs(axes[i])))
      throw PoleError("lambda coincides with axis " + std::to_string(i));
}

}  // namespace

DeltaOmega delta_omega(const Vec& axes, const Vec& x, double lambda, int k) {
  require_size(x.size(), axes.size(), "delta_omega");
  check_off_poles(axes, lambda);
  return {poly::eval(delta_coefficients(axes, x, k), lambda),
          poly::eval(omega_coefficients(axes, x, k), lambda)};
}

double omega_identity_residual(const Vec& axes, const Vec& x, double lambda, int k) {
  const auto [delta, omega] = delta_omega(axes, x, lambda, k);
  const Vec inv = (lambda - axes.array()).inverse();
  const double q = (x.array().square() * inv.array()).sum();
  const Vec grad = hierarchy_eval(axes, x, k).grad_V.back();
  const double cross = (inv.array() * x.array() * grad.array()).sum();
  return 2.0 * omega * (1.0 + q) - 2.0 * delta - cross;
}

double hierarchy_from_elliptic(const Vec& axes, const Vec& lambda, int k) {
  require_size(lambda.size(), axes.size(), "hierarchy_from_elliptic");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    double num = std::pow(lambda[j], k - 1), den = 1.0;
    for (Eigen::Index i = 0; i < axes.size(); ++i) {
      num *= lambda[j] - axes[i];
      if (i != j) den *= lambda[j] - lambda[i];
    }
    sum += num / den;
  }
  return -sum;
}

PotentialValue hierarchy_potential(const Vec& axes, const Vec& sigmas, const Vec& x) {
  PotentialValue out{0.0, Vec::Zero(x.size())};
  if (sigmas.size() == 0) return out;
  const auto t = hierarchy_eval(axes, x, static_cast<int>(sigmas.size()));
  for (int k = 0; k < sigmas.size(); ++k) {
    out.value += 0.5 * sigmas[k] * t.V[static_cast<std::size_t>(k)];
    out.gradient += 0.5 * sigmas[k] * t.grad_V[static_cast<std::size_t>(k)];
  }
  return out;
}

PotentialValue rosochatius_potential(const Vec& mu, const Vec& x) {
  require_size(mu.size(), x.size(), "rosochatius_potential");
  PotentialValue out{0.0, Vec::Zero(x.size())};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (mu[i] == 0.0) continue;
    const double x2 = x[i] * x[i];
    out.value += 0.5 * mu[i] * mu[i] / x2;
    out.gradient[i] = -mu[i] * mu[i] / (x2 * x[i]);
  }
  return out;
}

}  // namespace confocal

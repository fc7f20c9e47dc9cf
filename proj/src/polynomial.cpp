#include "confocal/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace confocal::poly {

double eval(const Vec& coeffs, double t) {
  double acc = 0.0;
  for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) acc = acc * t + coeffs[i];
  return acc;
}

Vec trim(const Vec& coeffs, double tol) {
  if (coeffs.size() == 0) return coeffs;
  const double cut = tol * coeffs.cwiseAbs().maxCoeff();
  Eigen::Index n = coeffs.size();
  while (n > 1 && std::abs(coeffs[n - 1]) <= cut) --n;
  return coeffs.head(n);
}

Vec multiply(const Vec& p, const Vec& q) {
  if (p.size() == 0 || q.size() == 0) return Vec();
  Vec r = Vec::Zero(p.size() + q.size() - 1);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    for (Eigen::Index j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

namespace {

// Horner composition p(alpha + beta * t).
Vec compose_affine(const Vec& coeffs, double alpha, double beta) {
  Vec acc = Vec::Zero(1);
  const Vec lin = (Vec(2) << alpha, beta).finished();
  for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) {
    acc = multiply(acc, lin);
    acc[0] += coeffs[j];
  }
  return acc.head(std::max<Eigen::Index>(coeffs.size(), 1));
}

}  // namespace

Vec to_local(const Vec& coeffs, double center, double scale) {
  return compose_affine(coeffs, center, scale);
}

Vec from_local(const Vec& local, double center, double scale) {
  return compose_affine(local, -center / scale, 1.0 / scale);
}

Vec fit(const Vec& nodes, const Vec& values, int degree) {
  require_size(values.size(), nodes.size(), "poly::fit values");
  if (nodes.size() < degree + 1) throw DimensionError("poly::fit: not enough nodes");
  const double lo = nodes.minCoeff(), hi = nodes.maxCoeff();
  const double center = 0.5 * (lo + hi);
  const double scale = std::max(0.5 * (hi - lo), 1e-300);
  Mat V(nodes.size(), degree + 1);
  for (Eigen::Index r = 0; r < nodes.size(); ++r) {
    const double t = (nodes[r] - center) / scale;
    double pw = 1.0;
    for (int c = 0; c <= degree; ++c, pw *= t) V(r, c) = pw;
  }
  const Vec local = V.colPivHouseholderQr().solve(values);
  return from_local(local, center, scale);
}

CVec companion_roots(const Vec& coeffs) {
  const Vec c = trim(coeffs);
  const Eigen::Index d = c.size() - 1;
  if (d <= 0) return CVec();
  if (d == 1) return CVec::Constant(1, cplx(-c[0] / c[1], 0.0));
  Mat C = Mat::Zero(d, d);
  C.block(1, 0, d - 1, d - 1).setIdentity();
  for (Eigen::Index i = 0; i < d; ++i) C(i, d - 1) = -c[i] / c[d];
  Eigen::EigenSolver<Mat> es(C, false);
  return es.eigenvalues();
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi, double flo,
              double xtol) {
  for (int it = 0; it < 200 && hi - lo > xtol * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> real_roots(const Vec& coeffs, double imag_tol,
                               const std::function<double(double)>& refine) {
  const Vec c = trim(coeffs);
  std::function<double(double)> f = refine;
  if (!f) f = [c](double t) { return eval(c, t); };
  const CVec raw = companion_roots(c);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double re = raw[i].real();
    if (std::abs(raw[i].imag()) > imag_tol * (1.0 + std::abs(re))) continue;
    double r = re;
    for (double width : {1e-9, 1e-7, 1e-5}) {
      const double d = width * (1.0 + std::abs(re));
      const double fl = f(re - d), fh = f(re + d);
      if (fl == 0.0) {
        r = re - d;
        break;
      }
      if ((fl < 0.0) != (fh < 0.0)) {
        r = bisect(f, re - d, re + d, fl, 1e-16);
        break;
      }
    }
    out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo,
                                      double hi, int samples, double xtol) {
  std::vector<double> out;
  const double step = (hi - lo) / samples;
  double a = lo, fa = f(lo);
  for (int k = 1; k <= samples; ++k) {
    const double b = lo + k * step;
    const double fb = f(b);
    if (fa == 0.0) {
      out.push_back(a);
    } else if (std::isfinite(fa) && std::isfinite(fb) && (fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      out.push_back(bisect(f, a, b, fa, xtol));
    }
    a = b;
    fa = fb;
  }
  return out;
}

}  // namespace confocal::poly

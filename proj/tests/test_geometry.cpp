#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confocal/geometry.hpp"
#include "confocal/polynomial.hpp"
#include "support.hpp"

#include <complex>

using namespace confocal;
using namespace confocal::test;

namespace {

// Root of f on [lo, hi] by plain bisection; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("ellipsoid spec partitions equal axes") {
  const EllipsoidSpec e(vec({2, 1, 2, 3, 1}));
  REQUIRE(e.partition().size() == 3);
  CHECK(e.partition()[0] == std::vector<int>{0, 2});
  CHECK(e.partition()[1] == std::vector<int>{1, 4});
  CHECK(e.partition()[2] == std::vector<int>{3});
  CHECK(e.symmetric_group_count() == 2);
  CHECK_FALSE(e.distinct());
  CHECK(e.dim() == 4);
  CHECK_THROWS_AS(EllipsoidSpec(vec({1, -2})), InvalidSpecError);
  CHECK_THROWS_AS(EllipsoidSpec{Vec()}, InvalidSpecError);
  CHECK_THROWS_AS(make_system(SystemKind::Jacobi, vec({1})), InvalidSpecError);
}

TEST_CASE("on_ellipsoid") {
  CHECK(on_ellipsoid(EllipsoidSpec(vec({1, 1})), vec({1, 0}), 1e-12));
  const EllipsoidSpec e(vec({2, 1}));
  CHECK_FALSE(on_ellipsoid(e, vec({1, 1}), 1e-12));
  CHECK(ellipsoid_residual(e, vec({1, 1})) == doctest::Approx(0.5));
  CHECK_THROWS_AS(on_ellipsoid(e, vec({1, 1, 1}), 1e-12), DimensionError);

  const EllipsoidSpec e3(vec({1, 2, 3}));
  EllipticCoords ec;
  ec.lambda = vec({0.0, 1.5, 2.5});
  ec.signs = vec({1, -1, 1});
  CHECK(on_ellipsoid(e3, coords_from_elliptic(e3, ec), 1e-12));
}

TEST_CASE("elliptic coordinates: examples") {
  const EllipsoidSpec e(vec({1, 2, 3}));
  SUBCASE("point on the ellipsoid has lambda_0 = 0") {
    Rng rng(3);
    const Vec x = ellipsoid_point(rng, e.axes());
    CHECK(std::abs(elliptic_coords(e, x).lambda[0]) < 1e-12);
  }
  SUBCASE("bisection oracle at (0.5, 0.5, 0.5)") {
    const Vec x = vec({0.5, 0.5, 0.5});
    auto f = [&](double l) { return confocal_residual(e, x, l); };
    const EllipticCoords ec = elliptic_coords(e, x);
    const double eps = 1e-12;
    CHECK(ec.lambda[0] == doctest::Approx(bisect(f, -100.0, 1.0 - eps)).epsilon(1e-12));
    CHECK(ec.lambda[1] == doctest::Approx(bisect(f, 1.0 + eps, 2.0 - eps)).epsilon(1e-12));
    CHECK(ec.lambda[2] == doctest::Approx(bisect(f, 2.0 + eps, 3.0 - eps)).epsilon(1e-12));
  }
  SUBCASE("chart errors") {
    CHECK_THROWS_AS(elliptic_coords(EllipsoidSpec(vec({1, 2})), vec({1, 0})), DegenerateChartError);
    CHECK_THROWS_AS(elliptic_coords(EllipsoidSpec(vec({1, 1, 2})), vec({0.5, 0.5, 0.5})), SymmetricChartError);
  }
  SUBCASE("sign flip") {
    EllipticCoords ec;
    ec.lambda = vec({-0.5, 1.5, 2.5});
    ec.signs = vec({1, 1, 1});
    const Vec x = coords_from_elliptic(e, ec);
    ec.signs[1] = -1;
    const Vec y = coords_from_elliptic(e, ec);
    CHECK(y[0] == x[0]);
    CHECK(y[1] == -x[1]);
    CHECK(y[2] == x[2]);
  }
  SUBCASE("interlacing violated") {
    EllipticCoords ec;
    ec.lambda = vec({1.5, 0.5, 2.5});
    ec.signs = vec({1, 1, 1});
    CHECK_THROWS_AS(coords_from_elliptic(e, ec), InvalidCoordsError);
  }
}

TEST_CASE("elliptic coordinates: interlacing and round trip (property)") {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Rng rng(seed);
    const Eigen::Index N = 2 + static_cast<Eigen::Index>(seed % 4);
    Vec a = distinct_axes(rng, N, 0.05);
    // Unsorted storage exercises the permutation handling.
    if (seed % 3 == 0) std::swap(a[0], a[N - 1]);
    const EllipsoidSpec e(a);
    const Vec x = generic_point(rng, N, 0.05, 1.5);
    const EllipticCoords ec = elliptic_coords(e, x);
    const auto order = e.sorted_order();
    for (Eigen::Index i = 0; i < N; ++i) {
      const double ai = a[order[static_cast<std::size_t>(i)]];
      REQUIRE(ec.lambda[i] < ai);
      if (i > 0) REQUIRE(ec.lambda[i] > a[order[static_cast<std::size_t>(i - 1)]]);
      REQUIRE(std::abs(confocal_residual(e, x, ec.lambda[i])) < 1e-9);
    }
    const Vec back = coords_from_elliptic(e, ec);
    REQUIRE((back - x).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + x.cwiseAbs().maxCoeff()));
    const EllipticCoords again = elliptic_coords(e, back);
    REQUIRE((again.lambda - ec.lambda).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + a.maxCoeff()));
  }
}

TEST_CASE("tangency_value") {
  const Vec a = vec({2, 1});
  SUBCASE("tangent direction at a point of the quadric") {
    const double eta = 0.5;
    for (double t : {0.3, 1.1, 2.5, 4.0}) {
      const Vec x = vec({std::sqrt(2 - eta) * std::cos(t), std::sqrt(1 - eta) * std::sin(t)});
      const Vec y = vec({-std::sqrt(2 - eta) * std::sin(t), std::sqrt(1 - eta) * std::cos(t)});
      CHECK(std::abs(tangency_value(a, x, y, eta, 0.0)) < 1e-14);
    }
  }
  SUBCASE("discriminant oracle for chords through the center") {
    Rng rng(17);
    for (int it = 0; it < 50; ++it) {
      const double phi = rng.uniform(0, 2 * M_PI);
      const Vec x = vec({std::sqrt(2.0) * std::cos(phi), std::sin(phi)});
      const Vec y = -x;
      const double eta = rng.uniform(-3.0, 0.9);
      // Line x + s y against the conic sum u_i^2/(a_i - eta) = 1.
      double A = 0, B = 0, C = -1;
      for (int i = 0; i < 2; ++i) {
        A += y[i] * y[i] / (a[i] - eta);
        B += x[i] * y[i] / (a[i] - eta);
        C += x[i] * x[i] / (a[i] - eta);
      }
      CHECK(tangency_value(a, x, y, eta, 0.0) == doctest::Approx(A * C - B * B).epsilon(1e-12));
    }
  }
  SUBCASE("sign agrees with sampled intersections") {
    Rng rng(23);
    for (int it = 0; it < 200; ++it) {
      const Vec x = generic_point(rng, 2, 0.0, 1.0);
      const Vec y = generic_point(rng, 2, 0.1, 1.0);
      const double eta = rng.uniform(-2.0, 0.95);
      const double v = tangency_value(a, x, y, eta, 0.0);
      if (std::abs(v) < 1e-6) continue;
      bool crosses = false;
      const double f0 = confocal_residual(EllipsoidSpec(a), x, eta);
      for (int k = -4000; k <= 4000 && !crosses; ++k) {
        const double s = k * 0.01;
        if ((confocal_residual(EllipsoidSpec(a), x + s * y, eta) < 0) != (f0 < 0)) crosses = true;
      }
      // A line meeting an ellipse (or hyperbola) at two points has negative value.
      if (crosses) CHECK(v < 0);
    }
  }
  SUBCASE("pole") { CHECK_THROWS_AS(tangency_value(a, vec({1, 0}), vec({0, 1}), 1.0, 0.0), PoleError); }
  SUBCASE("numerator degree and root count (property)") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      Rng rng(seed);
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 3);
      const Vec ax = distinct_axes(rng, n);
      const Vec x = ellipsoid_point(rng, ax);
      const Vec y = generic_point(rng, n, 0.2, 1.0);
      auto cleared = [&](double eta) {
        double p = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) p *= eta - ax[i];
        return p * tangency_value(ax, x, y, eta, 0.0);
      };
      // Degree n - 1: n samples determine it, an extra one confirms.
      Vec nodes(n), vals(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        nodes[k] = -1.0 - 0.7 * static_cast<double>(k);
        vals[k] = cleared(nodes[k]);
      }
      const Vec c = poly::fit(nodes, vals, static_cast<int>(n - 1));
      const double probe = ax.maxCoeff() + 1.7;
      REQUIRE(poly::eval(c, probe) == doctest::Approx(cleared(probe)).epsilon(1e-8));
      // A chord leaving the ellipse is tangent to n - 1 confocal quadrics.
      REQUIRE(poly::real_roots(c).size() == static_cast<std::size_t>(n - 1));
    }
  }
}

TEST_CASE("projective metric") {
  Rng rng(5);
  auto rc = [&](Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
    return v;
  };
  const Vec a = vec({1, 2, 3.5});
  for (int it = 0; it < 20; ++it) {
    const CVec w = rc(3), X = rc(3);
    const auto base = projective_metric_eval(a, w, X, 0.7);
    CHECK(base.metric >= -1e-12);
    const cplx c(rng.normal(), rng.normal());
    CHECK(std::abs(projective_metric_eval(a, w, c * w, 0.7).metric) < 1e-12);
    const cplx s(rng.normal(), rng.normal());
    const auto scaled = projective_metric_eval(a, s * w, s * X, 0.7);
    CHECK(scaled.metric == doctest::Approx(base.metric).epsilon(1e-10));
    CHECK(scaled.potential == doctest::Approx(base.potential).epsilon(1e-12));
    const cplx ph = std::polar(1.0, rng.uniform(0, 6.28));
    CHECK(projective_metric_eval(a, ph * w, ph * X, 0.7).metric == doctest::Approx(base.metric).epsilon(1e-10));
  }
  SUBCASE("identity axes give the Fubini-Study form") {
    const Vec one = Vec::Ones(3);
    for (int it = 0; it < 20; ++it) {
      const CVec w = rc(3), X = rc(3);
      double ww = 0;
      cplx xw = 0;
      double xx = 0;
      for (int i = 0; i < 3; ++i) {
        ww += std::norm(w[i]);
        xx += std::norm(X[i]);
        xw += X[i] * std::conj(w[i]);
      }
      const double fs = (ww * xx - std::norm(xw)) / (ww * ww);
      CHECK(projective_metric_eval(one, w, X).metric == doctest::Approx(fs).epsilon(1e-12));
    }
  }
  CHECK_THROWS(projective_metric_eval(a, CVec::Zero(3), rc(3)));
}

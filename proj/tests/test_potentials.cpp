#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confocal/geometry.hpp"
#include "confocal/potentials.hpp"
#include "support.hpp"

using namespace confocal;
using namespace confocal::test;

namespace {

double ax_dot(const Vec& a, const Vec& x, int power) {
  return (a.array().pow(power) * x.array().square()).sum();
}

}  // namespace

TEST_CASE("hierarchy examples") {
  Rng rng(1);
  for (int it = 0; it < 50; ++it) {
    const Vec a = distinct_axes(rng, 4);
    const Vec x = generic_point(rng, 4);
    const auto t = hierarchy_eval(a, x, 3);
    const double xx = x.squaredNorm();
    CHECK(t.V[0] == doctest::Approx(xx).epsilon(1e-14));
    CHECK(max_abs(t.F[0] - x.cwiseAbs2()) == 0.0);
    const double v2 = ax_dot(a, x, 1) - xx * xx;
    CHECK(t.V[1] == doctest::Approx(v2).epsilon(1e-12));
    CHECK(max_abs(t.F[1] - x.cwiseAbs2().cwiseProduct((a.array() - xx).matrix())) < 1e-13);
    const double v3 = ax_dot(a, x, 2) - xx * ax_dot(a, x, 1) - v2 * xx;
    CHECK(t.V[2] == doctest::Approx(v3).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hierarchy_eval(vec({1, 2}), vec({1, 2, 3}), 2), DimensionError);
  CHECK_THROWS(hierarchy_eval(vec({1, 2}), vec({1, 2}), 0));
}

TEST_CASE("recurrence closure (property)") {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 5);
    const Vec a = distinct_axes(rng, n);
    const auto t = hierarchy_eval(a, generic_point(rng, n), 6);
    for (int k = 0; k < 6; ++k) REQUIRE(t.V[static_cast<std::size_t>(k)] == t.F[static_cast<std::size_t>(k)].sum());
  }
}

TEST_CASE("hierarchy gradients agree with finite differences") {
  Rng rng(2);
  const Vec a = vec({0.7, 1.6, 2.4});
  for (int it = 0; it < 20; ++it) {
    const Vec x = generic_point(rng, 3);
    const auto t = hierarchy_eval(a, x, 5);
    for (int k = 0; k < 5; ++k)
      for (int i = 0; i < 3; ++i) {
        const double h = 1e-5;
        const Vec e = Vec::Unit(3, i);
        const double fd = (hierarchy_eval(a, x + h * e, 5).V[static_cast<std::size_t>(k)] -
                           hierarchy_eval(a, x - h * e, 5).V[static_cast<std::size_t>(k)]) /
                          (2 * h);
        REQUIRE(t.grad_V[static_cast<std::size_t>(k)][i] == doctest::Approx(fd).epsilon(1e-7));
      }
  }
}

TEST_CASE("elliptic closed form of the hierarchy") {
  Rng rng(3);
  for (int it = 0; it < 100; ++it) {
    const Vec a = distinct_axes(rng, 3);
    const EllipsoidSpec e(a);
    const Vec x = generic_point(rng, 3, 0.1, 1.0);
    const Vec lam = elliptic_coords(e, x).lambda;
    const auto t = hierarchy_eval(a, x, 4);
    for (int k = 1; k <= 4; ++k)
      REQUIRE(hierarchy_from_elliptic(a, lam, k) ==
              doctest::Approx(t.V[static_cast<std::size_t>(k - 1)]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("Rosochatius basis") {
  const Vec a = vec({1, 2, 3.5});
  CHECK(rosochatius_eval(a, vec({2, 0.3, -0.4}), 0, -1).V == 0.25);
  SUBCASE("closure for both degrees (property)") {
    Rng rng(4);
    for (int it = 0; it < 200; ++it) {
      const Vec x = generic_point(rng, 3);
      for (int s = 0; s < 3; ++s)
        for (int deg : {-1, -2}) {
          const auto r = rosochatius_eval(a, x, s, deg);
          REQUIRE(r.F.sum() == doctest::Approx(r.V).epsilon(1e-12));
        }
    }
  }
  SUBCASE("degree -2 in the plane by hand") {
    const Vec a2 = vec({1.3, 0.4});
    const Vec x = vec({0.8, -0.6});
    // (1 + x1^2/(a0 - a1)) / x0^4
    const double want = (1.0 + 0.36 / 0.9) / (0.8 * 0.8 * 0.8 * 0.8);
    const auto r = rosochatius_eval(a2, x, 0, -2);
    CHECK(r.V == doctest::Approx(want).epsilon(1e-14));
    // F_{0,1} = 2 x1^2 (1 + x1^2/(a0 - a1)) / ((a1 - a0) x0^4)
    CHECK(r.F[1] == doctest::Approx(2.0 * 0.36 * want / (0.4 - 1.3)).epsilon(1e-14));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rosochatius_eval(a, vec({0, 1, 1}), 0, -1), SingularAxisError);
    CHECK_THROWS_AS(rosochatius_eval(vec({1, 1, 2}), vec({1, 1, 1}), 0, -2), SymmetricSpecError);
    CHECK_THROWS(rosochatius_eval(a, vec({1, 1, 1}), 0, -3));
  }
}

TEST_CASE("Bertrand-Darboux residual") {
  const Vec a = vec({0.9, 1.7, 2.6});
  Rng rng(5);
  SUBCASE("constant") {
    const Vec x = generic_point(rng, 3, 0.5, 1.2);
    CHECK(std::abs(bd_residual(a, [](const Vec&) { return 4.2; }, x, 0, 1)) < 1e-12);
  }
  SUBCASE("V1") {
    const Vec x = generic_point(rng, 3, 0.5, 1.2);
    CHECK(std::abs(bd_residual(a, [](const Vec& p) { return p.squaredNorm(); }, x, 0, 2)) < 1e-7);
  }
  SUBCASE("non-separable monomial against hand differentiation") {
    for (int it = 0; it < 10; ++it) {
      const Vec x = generic_point(rng, 3, 0.5, 1.2);
      const double x0 = x[0], x1 = x[1];
      // V = x0^3 x1 is homogeneous of degree 4, so 2V + E V = 6V.
      const double want = (a[1] - a[0]) * 3 * x0 * x0 + 6 * (x0 * x0 * x0 * x0 - 3 * x0 * x0 * x1 * x1);
      const double got = bd_residual(a, [](const Vec& p) { return p[0] * p[0] * p[0] * p[1]; }, x, 0, 1);
      CHECK(std::abs(got) > 1e-3);
      CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(bd_residual(a, [](const Vec&) { return 0.0; }, vec({1, 1, 1}), 1, 1), DimensionError);
}

TEST_CASE("Bertrand-Darboux annihilation (property)") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 3);
    const Vec a = distinct_axes(rng, n);
    const Vec x = generic_point(rng, n, 0.5, 1.2);
    std::vector<PointField> fields;
    for (int k = 1; k <= 4; ++k)
      fields.push_back([a, k](const Vec& p) { return hierarchy_eval(a, p, k).V.back(); });
    for (int s = 0; s < n; ++s)
      for (int deg : {-1, -2}) fields.push_back([a, s, deg](const Vec& p) { return rosochatius_eval(a, p, s, deg).V; });
    Vec w(static_cast<Eigen::Index>(fields.size()));
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = rng.uniform(0.0, 1.0);
    fields.push_back([fields, w](const Vec& p) {
      double acc = 0;
      for (std::size_t k = 0; k < fields.size(); ++k) acc += w[static_cast<Eigen::Index>(k)] * fields[k](p);
      return acc;
    });
    for (std::size_t f = 0; f < fields.size(); ++f)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          CAPTURE(f);
          REQUIRE(std::abs(bd_residual(a, fields[f], x, i, j)) < 1e-6);
        }
  }
}

TEST_CASE("Delta and Omega") {
  const Vec a = vec({1, 2, 3.5});
  Rng rng(6);
  const Vec x = generic_point(rng, 3);
  const double lam = 0.37, xx = x.squaredNorm();
  auto d1 = delta_omega(a, x, lam, 1);
  CHECK(d1.delta == 1.0);
  CHECK(d1.omega == 1.0);
  auto d2 = delta_omega(a, x, lam, 2);
  CHECK(d2.delta == doctest::Approx(lam - xx).epsilon(1e-14));
  CHECK(d2.omega == doctest::Approx(lam - 2 * xx).epsilon(1e-14));
  for (int it = 0; it < 50; ++it) {
    const Vec p = generic_point(rng, 3);
    const double l = rng.uniform(-4, 6);
    const double pp = p.squaredNorm(), app = ax_dot(a, p, 1);
    auto d3 = delta_omega(a, p, l, 3);
    CHECK(d3.delta == doctest::Approx(l * l - l * pp - app + pp * pp).epsilon(1e-12));
    CHECK(d3.omega == doctest::Approx(l * l - 2 * l * pp - 2 * app + 3 * pp * pp).epsilon(1e-12));
  }
  CHECK_THROWS_AS(delta_omega(a, x, 2.0, 2), PoleError);
}

TEST_CASE("Omega defining identity (property)") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 3);
    const Vec a = distinct_axes(rng, n);
    const Vec x = generic_point(rng, n);
    for (int k = 1; k <= 5; ++k)
      for (int l = 0; l < 20; ++l) {
        double lam = rng.uniform(-3.0, a.maxCoeff() + 2.0);
        if ((a.array() - lam).abs().minCoeff() < 0.05) continue;
        REQUIRE(std::abs(omega_identity_residual(a, x, lam, k)) < 1e-9);
      }
  }
}

TEST_CASE("potential evaluators") {
  const Vec a = vec({1, 2, 3});
  const Vec x = vec({0.3, -0.7, 0.5});
  const auto t = hierarchy_eval(a, x, 2);
  const auto hp = hierarchy_potential(a, vec({0.4, -1.2}), x);
  CHECK(hp.value == doctest::Approx(0.5 * (0.4 * t.V[0] - 1.2 * t.V[1])));
  CHECK(max_abs(hp.gradient - 0.5 * (0.4 * t.grad_V[0] - 1.2 * t.grad_V[1])) < 1e-15);
  CHECK(hierarchy_potential(a, Vec(), x).value == 0.0);
  const auto rp = rosochatius_potential(vec({0.2, 0, 0.3}), x);
  CHECK(rp.value == doctest::Approx(0.5 * (0.04 / 0.09 + 0.09 / 0.25)));
  CHECK(rp.gradient[1] == 0.0);
  CHECK(rp.gradient[0] == doctest::Approx(-0.04 / 0.027));
}

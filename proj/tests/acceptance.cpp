// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

#include "confocal/billiard.hpp"
#include "confocal/conservation.hpp"
#include "confocal/lax.hpp"
#include "confocal/potentials.hpp"
#include "support.hpp"

#include <cstdio>
#include <functional>
#include <future>
#include <string>
#include <vector>

using namespace confocal;
using namespace confocal::test;

namespace {

// Pinned tolerances.
constexpr double kLaxResidual = 1e-7;
constexpr double kLaxH = 1e-5;
constexpr double kLaxDecay = 3.0;        // r(h) / r(h/2), ideal 4
constexpr double kLaxRoundoff = 1e-10;   // below this r(1e-2) is already at the floor
constexpr double kDrift = 1e-7;
constexpr double kBracket = 1e-6;
constexpr double kAlphaRelation = 1e-9;
constexpr double kRankFraction = 0.95;
constexpr double kOracle = 1e-6;
constexpr double kCausticConstancy = 1e-7;
constexpr double kTangency = 1e-8;
constexpr double kPonceletClosure = 1e-6;
constexpr double kDetInvariance = 1e-8;
constexpr double kBD = 1e-6;
constexpr double kClosedForm = 1e-12;
constexpr double kOmegaIdentity = 1e-9;
constexpr double kReduction = 1e-7;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// 1 ------------------------------------------------------------------------
Outcome lax_residuals() {
  struct Case {
    std::string name;
    SystemSpec sys;
    LaxForm form;
  };
  const Vec a = vec({1, 2, 3.5});
  const std::vector<Case> cases{
      {"jacobi sigma=0", make_system(SystemKind::Jacobi, a), LaxForm::Small},
      {"jacobi sigma=0.6", make_system(SystemKind::Jacobi, a, 0.6), LaxForm::Small},
      {"jacobi big", make_system(SystemKind::Jacobi, a, 0.6), LaxForm::Big},
      {"jacobi-rosochatius", make_system(SystemKind::JacobiRosochatius, a, 0.4, vec({0.2, 0, 0.3})), LaxForm::Small},
      {"double small", make_system(SystemKind::DoubleJacobi, a, 0.5), LaxForm::Small},
      {"double big", make_system(SystemKind::DoubleJacobi, a, 0.5), LaxForm::Big},
      {"complex", make_system(SystemKind::ComplexJacobi, a, 0.5), LaxForm::Small},
      {"hierarchy m=1", make_system(SystemKind::SeparableHierarchy, a, 0, Vec(), vec({0.7})), LaxForm::Small},
      {"hierarchy m=2", make_system(SystemKind::SeparableHierarchy, a, 0, vec({0.1, 0, 0.2}), vec({0.3, 0.5})), LaxForm::Small},
      {"hierarchy m=3", make_system(SystemKind::SeparableHierarchy, a, 0, Vec(), vec({0.3, 0.2, 0.1})), LaxForm::Small},
  };
  Outcome out;
  double worst = 0, min_ratio = 1e300;
  int floored = 0;
  std::string worst_case;
  Rng rng(101);
  for (const auto& c : cases) {
    const auto lambdas = probe_lambdas(c.sys, 3);
    for (int it = 0; it < 20; ++it) {
      const PhaseState s = random_state(c.sys, rng);
      for (double lam : lambdas) {
        const double r = lax_residual(c.sys, s, c.form, lam, kLaxH);
        if (r > worst) {
          worst = r;
          worst_case = c.name;
        }
      }
      const double r1 = lax_residual(c.sys, s, c.form, lambdas[0], 1e-2);
      const double r2 = lax_residual(c.sys, s, c.form, lambdas[0], 5e-3);
      if (r1 > kLaxRoundoff) {
        min_ratio = std::min(min_ratio, r1 / r2);
      } else {
        ++floored;
      }
    }
  }
  out.pass = worst < kLaxResidual && min_ratio >= kLaxDecay;
  out.detail = fmt("max residual %.2e (< %.0e), min halving ratio %.2f", worst, kLaxResidual, min_ratio) +
               fmt(" (>= %.0f), %.0f at roundoff floor", kLaxDecay, floored) + ", worst " + worst_case;
  return out;
}

// 2 ------------------------------------------------------------------------
Outcome conservation() {
  const std::vector<SystemSpec> systems{
      make_system(SystemKind::Jacobi, vec({1, 2, 3}), 0.5),
      make_system(SystemKind::Jacobi, vec({1, 1, 2, 2}), 0.7),
      make_system(SystemKind::JacobiRosochatius, vec({1, 2, 3.5}), 0.4, vec({0.2, 0, 0.3})),
      make_system(SystemKind::JacobiRosochatius, vec({1, 1, 2, 2, 3}), -0.3, vec({0.1, 0.2, 0, 0.15, 0.1})),
      make_system(SystemKind::SeparableHierarchy, vec({1, 2, 3}), 0, vec({0.1, 0, 0.2}), vec({0.5, 0.3})),
      make_system(SystemKind::DoubleJacobi, vec({1, 2, 3}), 0.5),
      make_system(SystemKind::ComplexJacobi, vec({1, 2, 3}), 0.5),
  };
  std::vector<std::future<std::pair<double, std::size_t>>> jobs;
  for (std::size_t k = 0; k < systems.size(); ++k)
    jobs.push_back(std::async(std::launch::async, [&systems, k] {
      const auto& sys = systems[k];
      Rng rng(200 + k);
      IntegratorOptions opts;
      opts.record_every = 20;
      double worst = 0;
      std::size_t names = 0;
      for (int it = 0; it < 2; ++it) {
        const auto traj = integrate(sys, random_state(sys, rng), 10.0, 1e-3, opts);
        const DriftReport d = conservation_drift(sys, traj, probe_lambdas(sys, 5));
        worst = std::max(worst, d.worst());
        names = d.names.size();
      }
      return std::pair{worst, names};
    }));
  double worst = 0;
  std::size_t quantities = 0;
  for (auto& j : jobs) {
    const auto [w, n] = j.get();
    worst = std::max(worst, w);
    quantities += n;
  }
  return {worst < kDrift, fmt("max relative drift %.2e (< %.0e) over %.0f quantities in 7 systems, T=10, h=1e-3", worst,
                              kDrift, static_cast<double>(quantities))};
}

// Symmetric specs: two groups of size two, and the same with a singleton added.
std::vector<SystemSpec> symmetric_specs() {
  return {make_system(SystemKind::JacobiRosochatius, vec({1, 1, 2, 2}), 0.3, vec({0.1, 0.2, 0.15, 0.05})),
          make_system(SystemKind::JacobiRosochatius, vec({1, 1, 2, 2, 3}), 0.3, vec({0.1, 0.2, 0.15, 0.05, 0.1}))};
}

// 3 ------------------------------------------------------------------------
Outcome commutation() {
  double worst = 0;
  std::size_t pairs_total = 0;
  std::string worst_name;
  Rng rng(301);
  for (const auto& sys : symmetric_specs()) {
    const auto pairs = vanishing_pairs(sys.ellipsoid);
    pairs_total += pairs.size();
    for (int it = 0; it < 100; ++it)
      for (const auto& r : commutation_suite(sys, random_state(sys, rng), pairs))
        if (std::abs(r.value) > worst) {
          worst = std::abs(r.value);
          worst_name = r.name;
        }
  }
  return {worst < kBracket, fmt("max |bracket| %.2e (< %.0e) over %.0f pairs x 100 states", worst, kBracket,
                                static_cast<double>(pairs_total)) +
                                ", worst " + worst_name};
}

// 4 ------------------------------------------------------------------------
Outcome alpha_rel() {
  std::vector<SystemSpec> systems = symmetric_specs();
  systems.push_back(make_system(SystemKind::JacobiRosochatius, vec({1, 2, 3.5}), -0.4, vec({0.2, 0, 0.3})));
  systems.push_back(make_system(SystemKind::Jacobi, vec({0.7, 1.3, 2.2, 4}), 0.5));
  Rng rng(401);
  double worst = 0;
  for (int it = 0; it < 1000; ++it) {
    const auto& sys = systems[static_cast<std::size_t>(it) % systems.size()];
    const auto [lhs, rhs] = alpha_relation(sys, random_state(sys, rng));
    worst = std::max(worst, rel(lhs, rhs));
  }
  return {worst < kAlphaRelation, fmt("max mismatch %.2e (< %.0e) at 1000 states", worst, kAlphaRelation)};
}

// 5 ------------------------------------------------------------------------
Outcome rank() {
  const auto sys = symmetric_specs()[0];
  Rng rng(501);
  int good = 0;
  RankReport sample;
  for (int it = 0; it < 200; ++it) {
    const RankReport r = rank_dimensions(sys, random_state(sys, rng));
    if (r.pass()) ++good;
    sample = r;
  }
  const double frac = good / 200.0;
  return {frac >= kRankFraction, fmt("%.1f%% of 200 draws (>= %.0f%%), ranks ", 100 * frac, 100 * kRankFraction) +
                                     std::to_string(sample.rank_F) + "/" + std::to_string(sample.expected_F) + " and " +
                                     std::to_string(sample.rank_K) + "/" + std::to_string(sample.expected_K)};
}

std::vector<Vec> mu_patterns(Eigen::Index n) {
  Vec one = Vec::Zero(n), all(n);
  one[n - 1] = 0.2;
  for (Eigen::Index i = 0; i < n; ++i) all[i] = 0.1 + 0.05 * static_cast<double>(i);
  return {Vec::Zero(n), one, all};
}

ImpactState usable_impact(const BilliardSpec& spec, Rng& rng) {
  for (;;) {
    const ImpactState s = random_impact(spec, rng);
    const StepConstants c = step_constants(spec, s);
    if (c.nu * c.nu <= 1e-6) continue;
    if (spec.sigma > 0 && !admissible(spec, s)) continue;
    return s;
  }
}

// 6 ------------------------------------------------------------------------
Outcome oracle() {
  std::vector<BilliardSpec> specs;
  for (Eigen::Index n : {2, 3})
    for (double sigma : {-1.0, 0.0, 0.3})
      for (const Vec& mu : mu_patterns(n))
        specs.push_back(make_billiard(n == 2 ? vec({2, 1}) : vec({1, 2, 3.5}), sigma, mu));
  std::vector<std::future<double>> jobs;
  for (std::size_t k = 0; k < specs.size(); ++k)
    jobs.push_back(std::async(std::launch::async, [&specs, k] {
      const auto& spec = specs[k];
      Rng rng(600 + k);
      ImpactState s = usable_impact(spec, rng);
      double worst = 0;
      for (int b = 0; b < 100; ++b) {
        const ImpactState m = jr_step(spec, s), o = oracle_step(spec, s);
        worst = std::max({worst, (m.x - o.x).cwiseAbs().maxCoeff(), (m.y - o.y).cwiseAbs().maxCoeff()});
        s = m;
      }
      return worst;
    }));
  double worst = 0;
  for (auto& j : jobs) worst = std::max(worst, j.get());
  return {worst < kOracle, fmt("max per-bounce deviation %.2e (< %.0e), 18 configurations x 100 bounces", worst, kOracle)};
}

// 7 ------------------------------------------------------------------------
Outcome caustics() {
  Outcome out;
  double dev = 0, tang = 0;
  int configs = 0, bad = 0;
  for (Eigen::Index n : {2, 3})
    for (double sigma : {0.0, 0.3, -0.5})
      for (const Vec& mu : mu_patterns(n)) {
        const auto spec = make_billiard(n == 2 ? vec({2, 1}) : vec({1, 2, 3.5}), sigma, mu);
        Rng rng(700 + static_cast<std::uint64_t>(configs));
        OrbitOptions opts;
        opts.caustics = true;
        const auto orbit = run_orbit(spec, usable_impact(spec, rng), 50, opts);
        const CausticReport rep = orbit_caustics(spec, orbit);
        ++configs;
        if (!rep.count_ok || static_cast<int>(rep.eta.size()) != expected_caustic_count(spec)) ++bad;
        dev = std::max(dev, rep.max_deviation);
        if (rep.max_tangency) tang = std::max(tang, *rep.max_tangency);
      }
  out.pass = bad == 0 && dev < kCausticConstancy && tang < kTangency;
  out.detail = fmt("count mismatches %.0f of %.0f orbits, max drift of eta %.2e", bad, configs, dev) +
               fmt(" (< %.0e), max tangency %.2e (< %.0e)", kCausticConstancy, tang, kTangency);
  return out;
}

// 8 ------------------------------------------------------------------------
Outcome poncelet() {
  const auto spec = make_billiard(vec({2, 1}));
  for (int N = 3; N <= 12; ++N) {
    const PonceletResult r = poncelet_detect(spec, poncelet_shoot(spec.axes, N), 12, kPonceletClosure);
    if (r.period && r.companion_ok() && r.companion_error < kPonceletClosure)
      return {true, "period " + std::to_string(*r.period) + fmt(", closure %.2e, companion closure %.2e", r.closure_error,
                                                                 r.companion_error) +
                        fmt(" (< %.0e), eta %.6f", kPonceletClosure, *r.eta)};
  }
  return {false, "no periodic orbit with a closing companion for N <= 12"};
}

// 9 ------------------------------------------------------------------------
Outcome discrete_lax() {
  const std::vector<double> lambdas{-0.7, 0.45, 1.3, 2.7, 4.9};
  std::vector<BilliardSpec> specs{
      make_billiard(vec({2, 1})),
      make_billiard(vec({2, 1}), 0.0, vec({0, 0.3})),
      make_billiard(vec({1, 2, 3.5}), 0.3, vec({0.1, 0, 0.2})),
      make_billiard(vec({1, 2, 3.5}), -0.5, vec({0.1, 0.15, 0.2})),
  };
  double worst = 0;
  Rng rng(901);
  for (const auto& spec : specs) {
    OrbitOptions opts;
    opts.lax_lambdas = lambdas;
    for (const auto& r : run_orbit(spec, usable_impact(spec, rng), 100, opts).lax) worst = std::max(worst, r.max_det_drift());
  }
  return {worst < kDetInvariance, fmt("max per-step det L drift %.2e (< %.0e), 5 lambdas x 100 bounces x 4 billiards",
                                      worst, kDetInvariance)};
}

// 10 -----------------------------------------------------------------------
Outcome potentials() {
  double bd = 0, closed = 0, omega = 0;
  Rng rng(1001);
  for (int it = 0; it < 100; ++it) {
    const Vec a = distinct_axes(rng, 3);
    const Vec x = generic_point(rng, 3, 0.5, 1.2);
    std::vector<PointField> fields;
    for (int k = 1; k <= 4; ++k) fields.push_back([a, k](const Vec& p) { return hierarchy_eval(a, p, k).V.back(); });
    for (int s = 0; s < 3; ++s)
      for (int deg : {-1, -2}) fields.push_back([a, s, deg](const Vec& p) { return rosochatius_eval(a, p, s, deg).V; });
    for (const auto& f : fields)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j) bd = std::max(bd, std::abs(bd_residual(a, f, x, i, j)));

    const double xx = x.squaredNorm(), axx = (a.array() * x.array().square()).sum(),
                 a2xx = (a.array().square() * x.array().square()).sum();
    const auto t = hierarchy_eval(a, x, 3);
    const double v2 = axx - xx * xx, v3 = a2xx - xx * axx - v2 * xx;
    closed = std::max({closed, rel(t.V[1], v2), rel(t.V[2], v3)});
    const double l = rng.uniform(-3, 6);
    if ((a.array() - l).abs().minCoeff() > 0.05) {
      const auto d1 = delta_omega(a, x, l, 1), d2 = delta_omega(a, x, l, 2), d3 = delta_omega(a, x, l, 3);
      closed = std::max({closed, rel(d1.delta, 1), rel(d1.omega, 1), rel(d2.delta, l - xx), rel(d2.omega, l - 2 * xx),
                         rel(d3.delta, l * l - l * xx - axx + xx * xx),
                         rel(d3.omega, l * l - 2 * l * xx - 2 * axx + 3 * xx * xx)});
    }
    for (int k = 1; k <= 5; ++k)
      for (int s = 0; s < 20; ++s) {
        const double lam = rng.uniform(-3, a.maxCoeff() + 2);
        if ((a.array() - lam).abs().minCoeff() < 0.05) continue;
        omega = std::max(omega, std::abs(omega_identity_residual(a, x, lam, k)));
      }
  }
  return {bd < kBD && closed < kClosedForm && omega < kOmegaIdentity,
          fmt("BD %.2e (< %.0e), closed forms %.2e", bd, kBD, closed) +
              fmt(" (< %.0e), Omega identity %.2e", kClosedForm, omega) + fmt(" (< %.0e)", kOmegaIdentity)};
}

// 11 -----------------------------------------------------------------------
Outcome reduction() {
  const Vec a = vec({1, 2, 3.5});
  const double T = 5.0, h = 2.5e-4;
  std::vector<std::future<double>> jobs;
  for (double sigma : {0.0, 0.5, -0.4})
    jobs.push_back(std::async(std::launch::async, [a, sigma, T, h] {
      const auto cx = make_system(SystemKind::ComplexJacobi, a, sigma);
      Rng rng(1100 + static_cast<std::uint64_t>(10 * (sigma + 1)));
      const PhaseState c0 = random_state(cx, rng);
      const TorusReduction r0 = torus_reduce(c0.z, c0.p);
      const auto jr = make_system(SystemKind::JacobiRosochatius, a, sigma, r0.mu.cwiseAbs());
      PhaseState s0;
      s0.x = r0.x;
      s0.y = r0.y;
      const auto tc = integrate(cx, c0, T, h), tr = integrate(jr, s0, T, h);
      double worst = 0;
      for (std::size_t k = 0; k < std::min(tc.size(), tr.size()); ++k) {
        const TorusReduction r = torus_reduce(tc[k].z, tc[k].p);
        worst = std::max({worst, (r.x - tr[k].x).cwiseAbs().maxCoeff(), (r.y - tr[k].y).cwiseAbs().maxCoeff()});
      }
      return worst;
    }));
  double worst = 0;
  for (auto& j : jobs) worst = std::max(worst, j.get());
  return {worst < kReduction, fmt("max pointwise gap %.2e (< %.0e) over T=5, h=2.5e-4, 3 states", worst, kReduction)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"lax residual", lax_residuals},
      {"conservation", conservation},
      {"Dirac-bracket commutation", commutation},
      {"alpha relation", alpha_rel},
      {"rank dimensions", rank},
      {"billiard map vs oracle", oracle},
      {"caustic counts and constancy", caustics},
      {"Poncelet closure", poncelet},
      {"discrete Lax invariance", discrete_lax},
      {"potentials", potentials},
      {"reduction compatibility", reduction},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

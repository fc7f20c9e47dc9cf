#include "confocal/cli/commands.hpp"

#include "confocal/conservation.hpp"
#include "confocal/geometry.hpp"
#include "confocal/lax.hpp"
#include "confocal/potentials.hpp"

#include <algorithm>
#include <filesystem>
#include <cmath>
#include <functional>
#include <future>
#include <map>

namespace confocal::cli {

using nlohmann::json;

namespace {

const SystemSpec& require_system(const RunConfig& cfg, const std::string& suite) {
  if (!cfg.system) throw ConfigError("/system: required by suite '" + suite + "'");
  return *cfg.system;
}

bool real_ellipsoid_kind(const SystemSpec& sys) {
  return sys.kind == SystemKind::Jacobi || sys.kind == SystemKind::JacobiRosochatius ||
         sys.kind == SystemKind::SeparableHierarchy;
}

std::uint64_t suite_seed(const RunConfig& cfg, const std::string& name) {
  const auto& all = known_suites();
  const auto idx = static_cast<std::uint64_t>(std::find(all.begin(), all.end(), name) - all.begin());
  return cfg.seed * 1000003ULL + 7919ULL * (idx + 1);
}

std::vector<PhaseState> draw_states(const SystemSpec& sys, Rng& rng, int count) {
  std::vector<PhaseState> out;
  for (int i = 0; i < count; ++i) out.push_back(random_state(sys, rng));
  return out;
}

double rel(double got, double want) { return std::abs(got - want) / (1.0 + std::abs(want)); }

// ---------------------------------------------------------------------------

std::vector<CheckRecord> suite_lax(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "lax-residual");
  Rng rng(suite_seed(cfg, "lax-residual"));
  const auto states = draw_states(sys, rng, cfg.states);
  const auto lambdas = probe_lambdas(sys, 3);
  const double h = cfg.tol("lax_h", 1e-5);
  const bool big = sys.kind == SystemKind::Jacobi || sys.kind == SystemKind::DoubleJacobi;
  IntegratorOptions opts;
  opts.ctol = cfg.integrator.ctol;

  std::vector<CheckRecord> out;
  std::vector<LaxForm> forms{LaxForm::Small};
  if (big) forms.push_back(LaxForm::Big);
  for (LaxForm form : forms) {
    const std::string tag = form == LaxForm::Small ? "small" : "big";
    double worst = 0.0;
    for (const auto& s : states)
      for (double l : lambdas) worst = std::max(worst, lax_residual(sys, s, form, l, h, opts));
    out.push_back(at_most("lax-residual/" + tag, worst, cfg.tol("lax_residual", 1e-7)));
    // O(h^2): halving the step should divide the residual by about four.
    const double r1 = lax_residual(sys, states.front(), form, lambdas.front(), 1e-2, opts);
    const double r2 = lax_residual(sys, states.front(), form, lambdas.front(), 5e-3, opts);
    // Flows where the difference quotient is already exact sit at roundoff.
    if (r1 > 1e-10)
      out.push_back(at_least("lax-decay-ratio/" + tag, r1 / r2, cfg.tol("lax_decay_ratio", 3.0)));
    else
      out.push_back(at_most("lax-decay-floor/" + tag, r1, 1e-10));
  }
  return out;
}

std::vector<CheckRecord> suite_brackets(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "bracket-commutation");
  if (!real_ellipsoid_kind(sys)) return {};
  Rng rng(suite_seed(cfg, "bracket-commutation"));
  const auto pairs = vanishing_pairs(sys.ellipsoid);
  std::map<std::string, double> worst;
  for (const auto& s : draw_states(sys, rng, cfg.states))
    for (const auto& r : commutation_suite(sys, s, pairs, cfg.integrator.ctol))
      worst[r.family] = std::max(worst[r.family], std::abs(r.value));
  std::vector<CheckRecord> out;
  for (const auto& [family, v] : worst)
    out.push_back(at_most("bracket/" + family, v, cfg.tol("bracket", 1e-6)));
  return out;
}

std::vector<CheckRecord> suite_bd(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "bd-residual");
  const Vec& a = sys.ellipsoid.axes();
  const auto N = a.size();
  Rng rng(suite_seed(cfg, "bd-residual"));
  std::vector<Vec> points;
  for (int i = 0; i < std::min(cfg.states, 10); ++i) {
    // Moderate magnitudes keep the nested central differences near their best accuracy.
    Vec x(N);
    for (Eigen::Index k = 0; k < N; ++k) x[k] = rng.sign() * rng.uniform(0.5, 1.2);
    points.push_back(x);
  }
  auto worst_over = [&](const PointField& V) {
    double w = 0.0;
    for (const Vec& x : points)
      for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) w = std::max(w, std::abs(bd_residual(a, V, x, i, j)));
    return w;
  };
  const double tol = cfg.tol("bd", 1e-6);
  std::vector<CheckRecord> out;
  for (int k = 1; k <= 4; ++k)
    out.push_back(at_most("bd/V" + std::to_string(k),
                          worst_over([&, k](const Vec& x) { return hierarchy_eval(a, x, k).V.back(); }), tol));
  std::vector<int> degrees;
  if (sys.ellipsoid.distinct()) degrees = {-1, -2};
  for (int d : degrees) {
    double w = 0.0;
    for (int s = 0; s < N; ++s)
      w = std::max(w, worst_over([&, s, d](const Vec& x) { return rosochatius_eval(a, x, s, d).V; }));
    out.push_back(at_most("bd/rosochatius" + std::to_string(d), w, tol));
  }
  return out;
}

std::vector<CheckRecord> suite_hierarchy(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "hierarchy-identities");
  const Vec& a = sys.ellipsoid.axes();
  const auto N = a.size();
  Rng rng(suite_seed(cfg, "hierarchy-identities"));
  const Vec ainv = a.cwiseInverse();
  double closed = 0.0, omega_id = 0.0, elliptic = 0.0;
  const auto lambdas = probe_lambdas(sys, 3);
  for (int it = 0; it < std::min(cfg.states, 20); ++it) {
    Vec x = rng.normal_vector(N);
    x /= std::sqrt(ainv.dot(x.cwiseAbs2()));
    const double xx = x.squaredNorm(), Axx = x.dot(a.cwiseProduct(x)), AAxx = x.dot(a.cwiseAbs2().cwiseProduct(x));
    const auto H = hierarchy_eval(a, x, 5);
    const double V2 = Axx - xx * xx, V3 = AAxx - xx * Axx - V2 * xx;
    closed = std::max({closed, rel(H.V[1], V2), rel(H.V[2], V3)});
    const Vec d2 = delta_coefficients(a, x, 2), d3 = delta_coefficients(a, x, 3);
    const Vec o2 = omega_coefficients(a, x, 2), o3 = omega_coefficients(a, x, 3);
    closed = std::max({closed, rel(delta_coefficients(a, x, 1)[0], 1.0), rel(omega_coefficients(a, x, 1)[0], 1.0),
                       rel(d2[0], -xx), rel(d2[1], 1.0), rel(d3[0], -Axx + xx * xx), rel(d3[1], -xx), rel(d3[2], 1.0),
                       rel(o2[0], -2.0 * xx), rel(o2[1], 1.0), rel(o3[0], -2.0 * Axx + 3.0 * xx * xx),
                       rel(o3[1], -2.0 * xx), rel(o3[2], 1.0)});
    for (int k = 1; k <= 5; ++k)
      for (double l : lambdas) {
        const auto [dv, ov] = delta_omega(a, x, l, k);
        omega_id = std::max(omega_id, std::abs(omega_identity_residual(a, x, l, k)) / (1.0 + std::abs(dv) + std::abs(ov)));
      }
    if (sys.ellipsoid.distinct() && (x.array().abs() > 1e-3).all()) {
      const EllipticCoords ec = elliptic_coords(sys.ellipsoid, x);
      for (int k = 1; k <= 4; ++k) elliptic = std::max(elliptic, rel(hierarchy_from_elliptic(a, ec.lambda, k), H.V[static_cast<std::size_t>(k - 1)]));
    }
  }
  std::vector<CheckRecord> out;
  out.push_back(at_most("closed-forms", closed, cfg.tol("closed_form", 1e-12)));
  out.push_back(at_most("omega-identity", omega_id, cfg.tol("omega_identity", 1e-9)));
  if (sys.ellipsoid.distinct()) out.push_back(at_most("elliptic-closed-form", elliptic, cfg.tol("elliptic", 1e-9)));

  // det L against the integral family, and the relation at lambda = 0.
  double detl = 0.0, alpha = 0.0;
  const bool has_alpha = sys.constrained();
  for (const auto& s : draw_states(sys, rng, cfg.states)) {
    for (double l : probe_lambdas(sys)) detl = std::max(detl, rel(det_L_from_integrals(sys, s, l), det_L(sys, s, l)));
    if (has_alpha) {
      const auto [lhs, rhs] = alpha_relation(sys, s);
      alpha = std::max(alpha, rel(lhs, rhs));
    }
  }
  out.push_back(at_most("detL-vs-integrals", detl, cfg.tol("detL", 1e-9)));
  if (has_alpha) out.push_back(at_most("alpha-relation", alpha, cfg.tol("alpha", 1e-9)));
  return out;
}

std::vector<CheckRecord> suite_reduction(const RunConfig& cfg) {
  const SystemSpec& base = require_system(cfg, "reduction-compatibility");
  SystemSpec cx = base;
  cx.kind = SystemKind::ComplexJacobi;
  cx.mu = Vec();
  cx.sigmas = Vec();
  Rng rng(suite_seed(cfg, "reduction-compatibility"));
  // Small |mu_k| makes the reduced flow stiff near x_k = 0; a finer step keeps
  // both integrators well inside the comparison tolerance.
  const double T = cfg.tol("reduction_T", 5.0), h = std::min(cfg.integrator.h, cfg.tol("reduction_h", 2.5e-4));
  IntegratorOptions opts;
  opts.ctol = cfg.integrator.ctol;
  double worst = 0.0;
  for (int it = 0; it < std::min(cfg.states, 3); ++it) {
    const PhaseState c0 = random_state(cx, rng);
    const TorusReduction r0 = torus_reduce(c0.z, c0.p);
    SystemSpec jr;
    jr.kind = SystemKind::JacobiRosochatius;
    jr.ellipsoid = base.ellipsoid;
    jr.sigma = base.sigma;
    jr.mu = r0.mu.cwiseAbs();
    PhaseState s0;
    s0.x = r0.x;
    s0.y = r0.y;
    const auto tc = integrate(cx, c0, T, h, opts);
    const auto tr = integrate(jr, s0, T, h, opts);
    for (std::size_t k = 0; k < std::min(tc.size(), tr.size()); ++k) {
      const TorusReduction r = torus_reduce(tc[k].z, tc[k].p);
      worst = std::max({worst, (r.x - tr[k].x).cwiseAbs().maxCoeff(), (r.y - tr[k].y).cwiseAbs().maxCoeff()});
    }
  }
  return {at_most("reduction", worst, cfg.tol("reduction", 1e-7))};
}

std::vector<CheckRecord> suite_rank(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "rank-dimension");
  if (!real_ellipsoid_kind(sys)) return {};
  Rng rng(suite_seed(cfg, "rank-dimension"));
  int good = 0;
  for (const auto& s : draw_states(sys, rng, cfg.states))
    if (rank_dimensions(sys, s, 1e-7, cfg.integrator.ctol).pass()) ++good;
  return {at_least("rank-fraction", static_cast<double>(good) / cfg.states, cfg.tol("rank_fraction", 0.95))};
}

std::vector<CheckRecord> drift_records(const RunConfig& cfg, const SystemSpec& sys, const std::string& suite,
                                       double T, bool f_only) {
  Rng rng(suite_seed(cfg, suite));
  IntegratorOptions opts;
  opts.ctol = cfg.integrator.ctol;
  opts.record_every = 10;
  const auto lambdas = probe_lambdas(sys);
  std::map<std::string, double> worst;
  for (int it = 0; it < std::min(cfg.states, 3); ++it) {
    const PhaseState s0 = random_state(sys, rng);
    if (f_only) {
      const Vec f0 = integrals_f(sys, s0);
      const double scale = 2.0 * energy(sys, s0);
      for (const auto& s : integrate(sys, s0, T, cfg.integrator.h, opts)) {
        const Vec f = integrals_f(sys, s);
        for (Eigen::Index i = 0; i < f.size(); ++i) {
          double& w = worst["f_" + std::to_string(i)];
          w = std::max(w, relative_drift(f[i], f0[i], scale));
        }
      }
    } else {
      const DriftReport d = conservation_drift(sys, integrate(sys, s0, T, cfg.integrator.h, opts), lambdas);
      for (std::size_t i = 0; i < d.names.size(); ++i) {
        double& w = worst[d.names[i]];
        w = std::max(w, d.max_drift[static_cast<Eigen::Index>(i)]);
      }
    }
  }
  std::vector<CheckRecord> out;
  for (const auto& [name, v] : worst) out.push_back(at_most(suite + "/" + name, v, cfg.tol("drift", 1e-7)));
  return out;
}

std::vector<CheckRecord> suite_conservation(const RunConfig& cfg) {
  return drift_records(cfg, require_system(cfg, "conservation"), "conservation", cfg.integrator.T, false);
}

std::vector<CheckRecord> suite_f(const RunConfig& cfg) {
  const SystemSpec& sys = require_system(cfg, "f-integrals");
  // Surfaces SymmetricSpecError for symmetric axes before any integration.
  if (!sys.ellipsoid.distinct()) {
    Rng rng(suite_seed(cfg, "f-integrals"));
    integrals_f(sys, random_state(sys, rng));
  }
  return drift_records(cfg, sys, "f-integrals", 1.0, true);
}

using SuiteFn = std::function<std::vector<CheckRecord>(const RunConfig&)>;

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> r{
      {"lax-residual", suite_lax},
      {"bracket-commutation", suite_brackets},
      {"bd-residual", suite_bd},
      {"hierarchy-identities", suite_hierarchy},
      {"reduction-compatibility", suite_reduction},
      {"rank-dimension", suite_rank},
      {"conservation", suite_conservation},
      {"f-integrals", suite_f},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"lax-residual",     "bracket-commutation",    "bd-residual",
                                          "hierarchy-identities", "reduction-compatibility", "rank-dimension",
                                          "conservation",     "f-integrals"};
  return s;
}

const std::vector<std::string>& default_suites() {
  static const std::vector<std::string> s{"lax-residual",         "bracket-commutation",
                                          "bd-residual",          "hierarchy-identities",
                                          "reduction-compatibility", "rank-dimension"};
  return s;
}

std::vector<CheckRecord> run_suite(const std::string& name, const RunConfig& cfg) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown suite '" + name + "'");
  return it->second(cfg);
}

RunReport cmd_verify(const RunConfig& cfg) {
  std::vector<std::string> suites = cfg.suites;
  if (suites.empty() && !cfg.suites_given) suites = default_suites();
  for (const auto& s : suites)
    if (!registry().count(s)) throw ConfigError("/verify/suites: unknown suite '" + s + "'");

  std::vector<std::future<std::vector<CheckRecord>>> jobs;
  for (const auto& s : suites) jobs.push_back(std::async(std::launch::async, run_suite, s, std::cref(cfg)));

  RunReport rep;
  rep.command = "verify";
  json per_suite = json::object();
  // Merge in selection order; get() rethrows a suite's error here.
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto recs = jobs[i].get();
    per_suite[suites[i]] = recs.size();
    rep.checks.insert(rep.checks.end(), recs.begin(), recs.end());
  }
  rep.details["suites"] = suites;
  rep.details["records_per_suite"] = per_suite;
  rep.details["seed"] = cfg.seed;
  rep.details["states"] = cfg.states;
  const std::string dir = cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = (std::filesystem::path(dir) / "report.json").string();
  rep.files.push_back(path);
  write_json(path, rep.to_json());
  return rep;
}

}  // namespace confocal::cli

#include "confocal/cli/commands.hpp"

#include "confocal/billiard.hpp"
#include "confocal/cli/svg.hpp"
#include "confocal/conservation.hpp"
#include "confocal/lax.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace confocal::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCategory c) { return c == ErrorCategory::Numeric ? 3 : 2; }

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");
  return (fs::path(cfg.out_dir) / name).string();
}

void write_table(const RunConfig& cfg, RunReport& rep, const std::string& stem, const Table& t) {
  const std::string path = out_path(cfg, stem + "." + cfg.format);
  if (cfg.format == "json")
    write_table_json(path, t.header, t.rows);
  else
    write_csv(path, t.header, t.rows);
  rep.files.push_back(path);
}

void finish(const RunConfig& cfg, RunReport& rep, const std::string& name) {
  const std::string path = out_path(cfg, name);
  rep.files.push_back(path);
  write_json(path, rep.to_json());
}

std::vector<std::string> state_header(const SystemSpec& sys) {
  std::vector<std::string> h;
  const auto N = sys.ellipsoid.size();
  auto add = [&](const std::string& base) {
    for (Eigen::Index i = 0; i < N; ++i) h.push_back(base + "_" + std::to_string(i));
  };
  if (sys.complex()) {
    add("z_re");
    add("z_im");
    add("p_re");
    add("p_im");
  } else {
    add("x");
    add("y");
    if (sys.kind == SystemKind::DoubleJacobi) {
      add("xi");
      add("eta");
    }
  }
  return h;
}

void append_state(const SystemSpec& sys, const PhaseState& s, std::vector<double>& row) {
  auto push = [&](const auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
  };
  if (sys.complex()) {
    push(s.z.real());
    push(s.z.imag());
    push(s.p.real());
    push(s.p.imag());
  } else {
    push(s.x);
    push(s.y);
    if (sys.kind == SystemKind::DoubleJacobi) {
      push(s.xi);
      push(s.eta);
    }
  }
}

double state_distance(const SystemSpec& sys, const PhaseState& a, const PhaseState& b) {
  if (sys.complex()) return std::sqrt((a.z - b.z).squaredNorm() + (a.p - b.p).squaredNorm());
  double d = (a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm();
  if (sys.kind == SystemKind::DoubleJacobi) d += (a.xi - b.xi).squaredNorm() + (a.eta - b.eta).squaredNorm();
  return std::sqrt(d);
}

/// First close approach to the initial state after the trajectory has left it.
json return_estimate(const SystemSpec& sys, const std::vector<PhaseState>& traj) {
  std::vector<double> d;
  for (const auto& s : traj) d.push_back(state_distance(sys, s, traj.front()));
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, v);
  bool left = false;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    left = left || d[k] > 0.5 * dmax;
    if (!left || !(d[k] <= d[k - 1] && d[k] <= d[k + 1]) || d[k] > 0.1 * dmax) continue;
    // Parabola through the squared distances around the sample minimum.
    const double f0 = d[k - 1] * d[k - 1], f1 = d[k] * d[k], f2 = d[k + 1] * d[k + 1];
    const double dt = traj[k + 1].t - traj[k].t;
    const double den = f0 - 2.0 * f1 + f2;
    const double off = den > 0.0 ? 0.5 * (f0 - f2) / den : 0.0;
    const double fmin = std::max(0.0, f1 - 0.25 * (f0 - f2) * off);
    return {{"time", traj[k].t + off * dt}, {"distance", std::sqrt(fmin)}, {"sample_time", traj[k].t}};
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------

RunReport cmd_simulate(const RunConfig& cfg) {
  if (!cfg.system) throw ConfigError("/system: required for simulate");
  const SystemSpec& sys = *cfg.system;
  const PhaseState s0 = initial_state(cfg);
  IntegratorOptions opts;
  opts.ctol = cfg.integrator.ctol;
  opts.record_every = cfg.integrator.record_every;
  const auto traj = integrate(sys, s0, cfg.integrator.T, cfg.integrator.h, opts);
  const auto lambdas = probe_lambdas(sys);

  Table t;
  t.header = {"t"};
  for (auto& h : state_header(sys)) t.header.push_back(h);
  t.header.insert(t.header.end(), {"F1", "F2"});
  const auto names = conserved_quantities(sys, s0, lambdas);
  for (const auto& q : names)
    if (q.name.rfind("detL_", 0) != 0) t.header.push_back(q.name);
  for (const PhaseState& s : traj) {
    std::vector<double> row{s.t};
    append_state(sys, s, row);
    const auto c = constraint_residuals(sys, s);
    row.push_back(c.first);
    row.push_back(c.second);
    for (const auto& q : conserved_quantities(sys, s, lambdas))
      if (q.name.rfind("detL_", 0) != 0) row.push_back(q.value);
    t.rows.push_back(std::move(row));
  }

  RunReport rep;
  rep.command = "simulate";
  const DriftReport drift = conservation_drift(sys, traj, lambdas);
  const double dtol = cfg.tol("drift", 1e-7);
  json drifts = json::object();
  for (std::size_t i = 0; i < drift.names.size(); ++i) {
    const double v = drift.max_drift[static_cast<Eigen::Index>(i)];
    drifts[drift.names[i]] = v;
    rep.checks.push_back(at_most("drift/" + drift.names[i], v, dtol));
  }
  if (sys.constrained())
    rep.checks.push_back(at_most("constraint", drift.max_constraint, cfg.tol("constraint", cfg.integrator.ctol)));
  rep.details["system"] = to_string(sys.kind);
  rep.details["steps"] = static_cast<long long>(std::ceil(cfg.integrator.T / cfg.integrator.h - 1e-9));
  rep.details["lambdas"] = lambdas;
  rep.details["max_drift"] = drifts;
  rep.details["max_constraint"] = drift.max_constraint;
  rep.details["return"] = return_estimate(sys, traj);

  write_table(cfg, rep, "trajectory", t);
  finish(cfg, rep, "summary.json");
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> billiard_lambdas(const BilliardSpec& spec) {
  SystemSpec sys = spec.free_system();
  std::vector<double> out;
  for (double l : probe_lambdas(sys, 8)) {
    const double w = std::max(1.0, spec.axes.maxCoeff() - spec.axes.minCoeff());
    if (std::abs(l) < 0.05 * w) continue;
    out.push_back(l);
    if (out.size() == 5) break;
  }
  return out;
}

}  // namespace

RunReport cmd_billiard(const RunConfig& cfg) {
  if (!cfg.billiard) throw ConfigError("/billiard: required for billiard");
  const BilliardRun& b = *cfg.billiard;
  const BilliardSpec& spec = b.spec;
  const ImpactState s0 = initial_impact(cfg);

  OrbitOptions opts;
  opts.map = b.map;
  opts.caustics = b.caustics && spec.distinct_axes();
  opts.lax_lambdas = b.lax_lambdas.empty() ? billiard_lambdas(spec) : b.lax_lambdas;
  const BilliardOrbit orbit = run_orbit(spec, s0, b.bounces, opts);

  RunReport rep;
  rep.command = "billiard";
  rep.details["bounces"] = b.bounces;
  rep.details["map"] = b.map == BilliardMap::Lemma ? "lemma" : "oracle";
  rep.details["lax_lambdas"] = opts.lax_lambdas;

  // det L invariance, both per step and accumulated.
  double det_step = 0.0, conj = 0.0, det_total = 0.0;
  for (const auto& r : orbit.lax) {
    det_step = std::max(det_step, r.max_det_drift());
    conj = std::max(conj, r.max_conjugation());
  }
  for (double lam : opts.lax_lambdas) {
    const double d0 = billiard_L(spec, orbit.impacts.front(), lam).determinant();
    for (const auto& s : orbit.impacts)
      det_total = std::max(det_total, std::abs(billiard_L(spec, s, lam).determinant() - d0));
  }
  rep.checks.push_back(at_most("det-invariance", det_step, cfg.tol("det_invariance", 1e-8)));
  rep.checks.push_back(at_most("det-persistence", det_total, cfg.tol("det_persistence", 1e-7)));
  rep.details["conjugation_residual"] = conj;

  // |J| is an integral of the map.
  double J0 = std::abs(step_constants(spec, s0).J), jdrift = 0.0;
  for (const auto& s : orbit.impacts)
    jdrift = std::max(jdrift, std::abs(std::abs(step_constants(spec, s).J) - J0) / J0);
  rep.checks.push_back(at_most("J-persistence", jdrift, cfg.tol("J_persistence", 1e-7)));

  std::vector<double> eta0;
  if (opts.caustics) {
    const CausticReport cr = orbit_caustics(spec, orbit);
    eta0 = cr.eta;
    rep.details["caustics"] = cr.eta;
    rep.details["caustic_count"] = cr.eta.size();
    rep.details["expected_caustic_count"] = cr.expected_count;
    rep.details["caustic_count_ok"] = cr.count_ok;
    rep.details["caustic_flags"] = cr.flags;
    if (orbit.impacts.size() > 1)
      rep.checks.push_back(at_most("caustic-constancy", cr.max_deviation, cfg.tol("caustic", 1e-7)));
    if (cr.max_tangency)
      rep.checks.push_back(at_most("caustic-tangency", *cr.max_tangency, cfg.tol("tangency", 1e-8)));
  }

  if (b.oracle_check) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < orbit.impacts.size(); ++k) {
      ImpactState o;
      try {
        o = oracle_step(spec, orbit.impacts[k]);
      } catch (const Error& e) {
        throw BounceError(e, orbit.impacts[k].k);
      }
      const ImpactState& m = orbit.impacts[k + 1];
      worst = std::max(worst, std::max((o.x - m.x).cwiseAbs().maxCoeff(), (o.y - m.y).cwiseAbs().maxCoeff()));
    }
    rep.checks.push_back(at_most("map-vs-oracle", worst, cfg.tol("oracle", 1e-6)));
  }

  if (b.poncelet) {
    const PonceletResult pr = poncelet_detect(spec, s0, b.poncelet->max_period, b.poncelet->tol);
    json pj;
    pj["period"] = pr.period ? json(*pr.period) : json(nullptr);
    pj["closure_error"] = std::isfinite(pr.closure_error) ? json(pr.closure_error) : json(nullptr);
    pj["eta"] = pr.eta ? json(*pr.eta) : json(nullptr);
    pj["companion_period"] = pr.companion_period ? json(*pr.companion_period) : json(nullptr);
    if (pr.companion) {
      pj["companion_x"] = std::vector<double>(pr.companion->x.data(), pr.companion->x.data() + 2);
      pj["companion_y"] = std::vector<double>(pr.companion->y.data(), pr.companion->y.data() + 2);
      pj["companion_error"] = pr.companion_error;
      rep.checks.push_back(at_most("poncelet-companion", pr.companion_error, b.poncelet->tol));
      rep.checks.push_back(at_most("poncelet-same-period", pr.companion_ok() ? 0.0 : 1.0, 0.0));
    }
    rep.details["poncelet"] = pj;
  }

  Table t;
  const auto n = spec.dim();
  t.header = {"k"};
  for (Eigen::Index i = 0; i < n; ++i) t.header.push_back("x_" + std::to_string(i));
  for (Eigen::Index i = 0; i < n; ++i) t.header.push_back("y_" + std::to_string(i));
  t.header.push_back("J");
  const std::size_t ncaus = opts.caustics ? static_cast<std::size_t>(expected_caustic_count(spec)) : 0;
  for (std::size_t l = 0; l < ncaus; ++l) t.header.push_back("eta_" + std::to_string(l));
  t.header.insert(t.header.end(), {"det_drift", "lax_residual"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < orbit.impacts.size(); ++k) {
    const ImpactState& s = orbit.impacts[k];
    std::vector<double> row{static_cast<double>(s.k)};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.x[i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.y[i]);
    row.push_back(step_constants(spec, s).J);
    std::vector<double> eta = k < orbit.caustics.size() ? orbit.caustics[k] : std::vector<double>{};
    if (ncaus && k >= orbit.caustics.size()) eta = caustic_parameters(spec, s);
    for (std::size_t l = 0; l < ncaus; ++l) row.push_back(l < eta.size() ? eta[l] : nan);
    row.push_back(k < orbit.lax.size() ? orbit.lax[k].max_det_drift() : nan);
    row.push_back(k < orbit.lax.size() ? orbit.lax[k].max_conjugation() : nan);
    t.rows.push_back(std::move(row));
  }
  write_table(cfg, rep, "impacts", t);
  finish(cfg, rep, "summary.json");
  return rep;
}

// ---------------------------------------------------------------------------

RunReport cmd_plot(const RunConfig& cfg, const PlotRequest& req) {
  Vec axes, mu;
  if (cfg.billiard) {
    axes = cfg.billiard->spec.axes;
    mu = cfg.billiard->spec.mu_or_zero();
  } else if (cfg.system) {
    axes = cfg.system->ellipsoid.axes();
    mu = cfg.system->mu_or_zero();
  } else {
    throw ConfigError("plot needs a /billiard or /system section for the axes");
  }
  const auto n = axes.size();
  if (req.dim_x < 0 || req.dim_y < 0 || req.dim_x >= n || req.dim_y >= n || req.dim_x == req.dim_y)
    throw ConfigError("--dims: need two distinct coordinates below " + std::to_string(n));

  PlotScene scene;
  scene.ax = axes[req.dim_x];
  scene.ay = axes[req.dim_y];
  scene.wall_x = mu[req.dim_x] != 0.0;
  scene.wall_y = mu[req.dim_y] != 0.0;

  Polyline path;
  const std::string cx = "x_" + std::to_string(req.dim_x), cy = "x_" + std::to_string(req.dim_y);
  if (!req.input.empty()) {
    const Table t = read_csv(req.input);
    std::ptrdiff_t ix = -1, iy = -1;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (t.header[i] == cx) ix = static_cast<std::ptrdiff_t>(i);
      if (t.header[i] == cy) iy = static_cast<std::ptrdiff_t>(i);
    }
    if (!t.header.empty() && (ix < 0 || iy < 0))
      throw ConfigError(req.input + ": missing column " + (ix < 0 ? cx : cy));
    for (const auto& r : t.rows) path.emplace_back(r[static_cast<std::size_t>(ix)], r[static_cast<std::size_t>(iy)]);
  } else if (cfg.billiard) {
    const BilliardOrbit orbit = run_orbit(cfg.billiard->spec, initial_impact(cfg), cfg.billiard->bounces);
    for (const auto& s : orbit.impacts) path.emplace_back(s.x[req.dim_x], s.x[req.dim_y]);
  } else {
    if (cfg.system->complex()) throw ConfigError("plot: complex states need an input CSV");
    IntegratorOptions opts;
    opts.ctol = cfg.integrator.ctol;
    opts.record_every = cfg.integrator.record_every;
    for (const auto& s : integrate(*cfg.system, initial_state(cfg), cfg.integrator.T, cfg.integrator.h, opts))
      path.emplace_back(s.x[req.dim_x], s.x[req.dim_y]);
  }
  if (!path.empty()) scene.paths.push_back(std::move(path));

  if (!req.caustics.empty()) {
    scene.caustics = req.caustics;
  } else if (req.auto_caustics && cfg.billiard && n == 2 && cfg.billiard->spec.distinct_axes()) {
    scene.caustics = caustic_parameters(cfg.billiard->spec, initial_impact(cfg));
  }
  scene.title = cfg.billiard ? "billiard" : "trajectory";

  RunReport rep;
  rep.command = "plot";
  const std::string svg_path = req.output.empty() ? out_path(cfg, "plot.svg") : req.output;
  {
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + svg_path + "'");
    out << render_svg(scene);
  }
  rep.files.push_back(svg_path);
  rep.details["caustics"] = scene.caustics;
  rep.details["points"] = scene.paths.empty() ? 0 : scene.paths.front().size();
  return rep;
}

}  // namespace confocal::cli

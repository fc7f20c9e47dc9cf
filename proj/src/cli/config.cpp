#include "confocal/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace confocal::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? "/" : path) + ": " + msg);
}

void allow_keys(const json& obj, const std::string& path, std::set<std::string> keys) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k)) fail(path + "/" + k, "unknown field");
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

int get_int(const json& v, const std::string& path, int lo) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto i = v.get<long long>();
  if (i < lo || i > 100000000) fail(path, "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(i);
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Vec get_vec(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = get_number(v[i], path + "/" + std::to_string(i));
  return out;
}

CVec get_cvec(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of [re, im] pairs");
  CVec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    if (!v[i].is_array() || v[i].size() != 2) fail(p, "expected [re, im]");
    out[static_cast<Eigen::Index>(i)] = cplx(get_number(v[i][0], p + "/0"), get_number(v[i][1], p + "/1"));
  }
  return out;
}

Vec get_axes(const json& v, const std::string& path) {
  Vec a = get_vec(v, path);
  if (a.size() == 0) fail(path, "must not be empty");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] <= 0.0) fail(path + "/" + std::to_string(i), "axis must be positive");
  return a;
}

Vec get_mu(const json& v, const std::string& path, Eigen::Index n) {
  Vec mu = get_vec(v, path);
  if (mu.size() != n) fail(path, "expected " + std::to_string(n) + " entries");
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu[i] < 0.0) fail(path + "/" + std::to_string(i), "mu must be >= 0");
  return mu;
}

InitialSpec parse_initial(const json& j, const std::string& path, bool billiard) {
  if (billiard)
    allow_keys(j, path, {"random", "seed", "x", "y"});
  else
    allow_keys(j, path, {"random", "seed", "x", "y", "xi", "eta", "z", "p"});
  InitialSpec in;
  bool explicit_data = false;
  for (const char* key : {"x", "y", "xi", "eta", "z", "p"})
    explicit_data = explicit_data || j.contains(key);
  in.random = j.contains("random") ? get_bool(j["random"], path + "/random") : !explicit_data;
  if (j.contains("seed")) in.seed = get_seed(j["seed"], path + "/seed");
  if (j.contains("x")) in.x = get_vec(j["x"], path + "/x");
  if (j.contains("y")) in.y = get_vec(j["y"], path + "/y");
  if (j.contains("xi")) in.xi = get_vec(j["xi"], path + "/xi");
  if (j.contains("eta")) in.eta = get_vec(j["eta"], path + "/eta");
  if (j.contains("z")) in.z = get_cvec(j["z"], path + "/z");
  if (j.contains("p")) in.p = get_cvec(j["p"], path + "/p");
  if (in.random && explicit_data) fail(path, "random initial data cannot also list coordinates");
  return in;
}

SystemSpec parse_system(const json& j, const std::string& path) {
  allow_keys(j, path, {"kind", "axes", "sigma", "sigmas", "mu"});
  if (!j.contains("kind")) fail(path + "/kind", "required");
  if (!j.contains("axes")) fail(path + "/axes", "required");
  SystemSpec sys;
  try {
    sys.kind = parse_system_kind(get_string(j["kind"], path + "/kind"));
  } catch (const ConfigError& e) {
    fail(path + "/kind", e.what());
  }
  const Vec axes = get_axes(j["axes"], path + "/axes");
  sys.ellipsoid = EllipsoidSpec(axes);
  if (j.contains("sigma")) sys.sigma = get_number(j["sigma"], path + "/sigma");
  if (j.contains("sigmas")) sys.sigmas = get_vec(j["sigmas"], path + "/sigmas");
  if (j.contains("mu")) sys.mu = get_mu(j["mu"], path + "/mu", axes.size());
  try {
    sys.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return sys;
}

BilliardRun parse_billiard(const json& j, const std::string& path) {
  allow_keys(j, path, {"axes", "sigma", "mu", "epsilon", "bounces", "map", "caustics",
                       "lax_lambdas", "oracle_check", "initial", "poncelet"});
  if (!j.contains("axes")) fail(path + "/axes", "required");
  BilliardRun b;
  b.spec.axes = get_axes(j["axes"], path + "/axes");
  if (j.contains("sigma")) b.spec.sigma = get_number(j["sigma"], path + "/sigma");
  if (j.contains("mu")) b.spec.mu = get_mu(j["mu"], path + "/mu", b.spec.axes.size());
  if (j.contains("epsilon")) b.spec.epsilon = get_number(j["epsilon"], path + "/epsilon");
  if (j.contains("bounces")) b.bounces = get_int(j["bounces"], path + "/bounces", 0);
  if (j.contains("map")) {
    const std::string m = get_string(j["map"], path + "/map");
    if (m == "lemma")
      b.map = BilliardMap::Lemma;
    else if (m == "oracle")
      b.map = BilliardMap::Oracle;
    else
      fail(path + "/map", "expected \"lemma\" or \"oracle\"");
  }
  if (j.contains("caustics")) b.caustics = get_bool(j["caustics"], path + "/caustics");
  if (j.contains("lax_lambdas")) {
    const Vec l = get_vec(j["lax_lambdas"], path + "/lax_lambdas");
    b.lax_lambdas.assign(l.data(), l.data() + l.size());
  }
  if (j.contains("oracle_check")) b.oracle_check = get_bool(j["oracle_check"], path + "/oracle_check");
  if (j.contains("initial")) b.initial = parse_initial(j["initial"], path + "/initial", true);
  if (j.contains("poncelet")) {
    const json& p = j["poncelet"];
    const std::string pp = path + "/poncelet";
    allow_keys(p, pp, {"max_period", "tol", "shoot"});
    PonceletSpec ps;
    if (p.contains("max_period")) ps.max_period = get_int(p["max_period"], pp + "/max_period", 1);
    if (p.contains("tol")) ps.tol = get_number(p["tol"], pp + "/tol");
    if (p.contains("shoot")) ps.shoot = get_int(p["shoot"], pp + "/shoot", 0);
    if (ps.shoot > 0 && (ps.shoot < 3 || b.spec.axes.size() != 2))
      fail(pp + "/shoot", "shooting needs a planar billiard and a period >= 3");
    b.poncelet = ps;
  }
  try {
    b.spec.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return b;
}

}  // namespace

double RunConfig::tol(const std::string& name, double def) const {
  const auto it = tolerances.find(name);
  return it == tolerances.end() ? def : it->second;
}

RunConfig parse_config(const json& doc) {
  allow_keys(doc, "", {"schema_version", "seed", "system", "initial", "integrator", "billiard",
                       "verify", "output", "tolerances"});
  RunConfig cfg;
  if (!doc.contains("schema_version")) fail("/schema_version", "required");
  cfg.schema_version = get_int(doc["schema_version"], "/schema_version", 1);
  if (cfg.schema_version != kSchemaVersion)
    fail("/schema_version", "unsupported version " + std::to_string(cfg.schema_version));
  if (doc.contains("seed")) cfg.seed = get_seed(doc["seed"], "/seed");
  if (doc.contains("system")) cfg.system = parse_system(doc["system"], "/system");
  if (doc.contains("initial")) cfg.initial = parse_initial(doc["initial"], "/initial", false);
  if (doc.contains("integrator")) {
    const json& j = doc["integrator"];
    allow_keys(j, "/integrator", {"h", "T", "ctol", "record_every"});
    if (j.contains("h")) cfg.integrator.h = get_number(j["h"], "/integrator/h");
    if (j.contains("T")) cfg.integrator.T = get_number(j["T"], "/integrator/T");
    if (j.contains("ctol")) cfg.integrator.ctol = get_number(j["ctol"], "/integrator/ctol");
    if (j.contains("record_every"))
      cfg.integrator.record_every = get_int(j["record_every"], "/integrator/record_every", 1);
    if (!(cfg.integrator.h > 0.0)) fail("/integrator/h", "must be positive");
    if (cfg.integrator.T < 0.0) fail("/integrator/T", "must be >= 0");
    if (!(cfg.integrator.ctol > 0.0)) fail("/integrator/ctol", "must be positive");
  }
  if (doc.contains("billiard")) cfg.billiard = parse_billiard(doc["billiard"], "/billiard");
  if (doc.contains("verify")) {
    const json& j = doc["verify"];
    allow_keys(j, "/verify", {"suites", "states"});
    if (j.contains("suites")) {
      if (!j["suites"].is_array()) fail("/verify/suites", "expected an array of names");
      cfg.suites_given = true;
      for (std::size_t i = 0; i < j["suites"].size(); ++i)
        cfg.suites.push_back(get_string(j["suites"][i], "/verify/suites/" + std::to_string(i)));
    }
    if (j.contains("states")) cfg.states = get_int(j["states"], "/verify/states", 1);
  }
  if (doc.contains("output")) {
    const json& j = doc["output"];
    allow_keys(j, "/output", {"dir", "format"});
    if (j.contains("dir")) cfg.out_dir = get_string(j["dir"], "/output/dir");
    if (j.contains("format")) cfg.format = get_string(j["format"], "/output/format");
    if (cfg.format != "csv" && cfg.format != "json") fail("/output/format", "expected csv or json");
  }
  if (doc.contains("tolerances")) {
    const json& j = doc["tolerances"];
    if (!j.is_object()) fail("/tolerances", "expected an object");
    for (const auto& [k, v] : j.items()) cfg.tolerances[k] = get_number(v, "/tolerances/" + k);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": syntax error");
  }
  try {
    return parse_config(doc);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

void apply_tol_overrides(RunConfig& cfg, const std::string& overrides) {
  for (const std::string& item : split_list(overrides)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--tol-overrides: expected name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq), value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || !std::isfinite(v))
      throw ConfigError("--tol-overrides: bad value for '" + name + "'");
    cfg.tolerances[name] = v;
  }
}

namespace {

std::uint64_t initial_seed(const RunConfig& cfg, const InitialSpec& in) {
  return in.seed ? *in.seed : cfg.seed;
}

}  // namespace

PhaseState initial_state(const RunConfig& cfg) {
  if (!cfg.system) throw ConfigError("/system: required for this command");
  const SystemSpec& sys = *cfg.system;
  const InitialSpec& in = cfg.initial;
  if (in.random) {
    Rng rng(initial_seed(cfg, in));
    return random_state(sys, rng);
  }
  PhaseState s;
  s.x = in.x;
  s.y = in.y;
  s.xi = in.xi;
  s.eta = in.eta;
  s.z = in.z;
  s.p = in.p;
  const auto N = sys.ellipsoid.size();
  try {
    if (sys.complex()) {
      require_size(s.z.size(), N, "initial z");
      require_size(s.p.size(), N, "initial p");
    } else {
      require_size(s.x.size(), N, "initial x");
      require_size(s.y.size(), N, "initial y");
      if (sys.kind == SystemKind::DoubleJacobi) {
        require_size(s.xi.size(), N, "initial xi");
        require_size(s.eta.size(), N, "initial eta");
      }
    }
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("/initial: ") + e.what());
  }
  if (constraint_residuals(sys, s).max_abs() > cfg.integrator.ctol)
    throw ConfigError("/initial: state is off the constraint manifold");
  return s;
}

ImpactState initial_impact(const RunConfig& cfg) {
  if (!cfg.billiard) throw ConfigError("/billiard: required for this command");
  const BilliardRun& b = *cfg.billiard;
  if (b.poncelet && b.poncelet->shoot > 0) {
    if (b.spec.sigma != 0.0 || b.spec.has_mu())
      throw ConfigError("/billiard/poncelet/shoot: needs sigma = 0 and mu = 0");
    return poncelet_shoot(b.spec.axes, b.poncelet->shoot);
  }
  if (b.initial.random) {
    Rng rng(initial_seed(cfg, b.initial));
    return random_impact(b.spec, rng);
  }
  ImpactState s;
  s.x = b.initial.x;
  s.y = b.initial.y;
  try {
    require_size(s.x.size(), b.spec.dim(), "initial x");
    require_size(s.y.size(), b.spec.dim(), "initial y");
    check_impact(b.spec, s);
  } catch (const Error& e) {
    throw ConfigError(std::string("/billiard/initial: ") + e.what());
  }
  return s;
}

}  // namespace confocal::cli

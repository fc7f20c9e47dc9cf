#pragma once

#include "confocal/billiard.hpp"
#include "confocal/dynamics.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace confocal::cli {

inline constexpr int kSchemaVersion = 1;

/// Explicit initial data, or a random draw (seeded from the run seed when no
/// seed is given).
struct InitialSpec {
  bool random = true;
  std::optional<std::uint64_t> seed;
  Vec x, y, xi, eta;
  CVec z, p;
};

struct IntegratorSpec {
  double h = 1e-3;
  double T = 10.0;
  double ctol = kDefaultCtol;
  int record_every = 1;
};

struct PonceletSpec {
  int max_period = 12;
  double tol = 1e-6;
  int shoot = 0;  ///< > 0: replace the initial impact by the shooting solution with this period
};

struct BilliardRun {
  BilliardSpec spec;
  InitialSpec initial;
  int bounces = 100;
  BilliardMap map = BilliardMap::Lemma;
  bool caustics = true;
  std::vector<double> lax_lambdas;
  bool oracle_check = false;
  std::optional<PonceletSpec> poncelet;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::optional<SystemSpec> system;
  InitialSpec initial;
  IntegratorSpec integrator;
  std::optional<BilliardRun> billiard;
  std::vector<std::string> suites;  ///< empty selects the default list
  bool suites_given = false;        ///< an explicit empty list runs nothing
  int states = 20;
  std::string out_dir = ".";
  std::string format = "csv";
  std::map<std::string, double> tolerances;

  /// Looks up a tolerance override, falling back to `def`.
  double tol(const std::string& name, double def) const;
};

/// Builds a config from a parsed document. Unknown keys and bad values raise
/// ConfigError naming the JSON pointer of the offending field.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a file; syntax errors report line and column.
RunConfig load_config(const std::string& path);

/// "name=value,name=value" into cfg.tolerances.
void apply_tol_overrides(RunConfig& cfg, const std::string& overrides);

/// Splits "a,b,c" (empty string gives an empty list).
std::vector<std::string> split_list(const std::string& s);

/// Initial state of cfg.system (explicit or random).
PhaseState initial_state(const RunConfig& cfg);

/// Initial impact of the billiard run (explicit, random, or shot).
ImpactState initial_impact(const RunConfig& cfg);

}  // namespace confocal::cli

#pragma once

#include "confocal/cli/config.hpp"
#include "confocal/cli/report.hpp"

#include <string>
#include <vector>

namespace confocal::cli {

/// Integrates cfg.system; writes trajectory.{csv,json} and summary.json into
/// cfg.out_dir. Checks: relative drift of every conserved quantity and the
/// constraint residual.
RunReport cmd_simulate(const RunConfig& cfg);

/// Runs cfg.billiard; writes impacts.{csv,json} and summary.json. Checks: det L
/// invariance, caustic constancy, the J law, and optionally map vs oracle and
/// the Poncelet companion.
RunReport cmd_billiard(const RunConfig& cfg);

/// Runs the selected verification suites concurrently; writes report.json.
RunReport cmd_verify(const RunConfig& cfg);

struct PlotRequest {
  std::string input;   ///< CSV from simulate/billiard; empty runs the config in-process
  std::string output;  ///< SVG path; default <out_dir>/plot.svg
  int dim_x = 0;
  int dim_y = 1;
  std::vector<double> caustics;  ///< explicit conics; otherwise computed for billiard configs
  bool auto_caustics = true;
};

RunReport cmd_plot(const RunConfig& cfg, const PlotRequest& req);

/// Every suite name cmd_verify understands, in execution order.
const std::vector<std::string>& known_suites();
/// The suites run when a config selects none.
const std::vector<std::string>& default_suites();

/// Records of one suite (exposed for tests).
std::vector<CheckRecord> run_suite(const std::string& name, const RunConfig& cfg);

/// Exit code for an error category: configuration and domain errors 2, numeric 3.
int exit_code_for(ErrorCategory c);

}  // namespace confocal::cli

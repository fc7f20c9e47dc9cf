// confocal: simulate / billiard / verify / plot front end.

#include "confocal/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
  const char* env = std::getenv("CONFOCAL_LOG");
  const std::string v = env ? env : "info";
  if (v == "quiet" || v == "0" || v == "off") return LogLevel::Quiet;
  if (v == "debug" || v == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void print_report(const confocal::cli::RunReport& rep, LogLevel level) {
  if (level == LogLevel::Quiet) return;
  int failed = 0;
  for (const auto& c : rep.checks) {
    if (!c.pass) ++failed;
    if (level == LogLevel::Debug || !c.pass)
      std::cerr << (c.pass ? "pass " : "FAIL ") << c.name << " value=" << confocal::cli::format_double(c.value)
                << " threshold=" << confocal::cli::format_double(c.threshold) << "\n";
  }
  std::cerr << rep.command << ": " << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed\n";
  if (level == LogLevel::Debug)
    for (const auto& f : rep.files) std::cerr << "  wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace confocal::cli;

  CLI::App app{"Integrable flows, Lax pairs and billiards on ellipsoids"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format, suites, tol_overrides;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configuration seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--tol-overrides", tol_overrides, "name=value,... tolerance overrides");
  };

  auto* simulate = app.add_subcommand("simulate", "integrate a flow and report conservation");
  auto* billiard = app.add_subcommand("billiard", "iterate the billiard map and report caustics and Lax checks");
  auto* verify = app.add_subcommand("verify", "run verification suites");
  auto* plot = app.add_subcommand("plot", "render a planar projection as SVG");
  for (auto* s : {simulate, billiard, verify, plot}) add_common(s);
  verify->add_option("--suite", suites, "comma-separated suite names (empty string runs none)");

  PlotRequest req;
  std::string dims;
  std::vector<double> caustics;
  plot->add_option("--input", req.input, "CSV written by simulate or billiard");
  plot->add_option("--output", req.output, "SVG path");
  plot->add_option("--dims", dims, "projection coordinates, e.g. 0,1");
  plot->add_option("--caustics", caustics, "explicit caustic parameters")->delimiter(',');
  plot->add_flag("!--no-auto-caustics", req.auto_caustics, "do not compute caustics from the config");

  CLI11_PARSE(app, argc, argv);
  const LogLevel level = log_level();

  try {
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) cfg.format = format;
    if (!tol_overrides.empty()) apply_tol_overrides(cfg, tol_overrides);
    if (verify->count("--suite")) {
      cfg.suites = split_list(suites);
      cfg.suites_given = true;
    }

    RunReport rep;
    if (*simulate) {
      rep = cmd_simulate(cfg);
    } else if (*billiard) {
      rep = cmd_billiard(cfg);
    } else if (*verify) {
      rep = cmd_verify(cfg);
    } else {
      if (!dims.empty()) {
        const auto parts = split_list(dims);
        if (parts.size() != 2) throw confocal::ConfigError("--dims: expected two indices");
        req.dim_x = std::stoi(parts[0]);
        req.dim_y = std::stoi(parts[1]);
      }
      req.caustics = caustics;
      rep = cmd_plot(cfg, req);
    }
    print_report(rep, level);
    return rep.exit_code();
  } catch (const confocal::Error& e) {
    if (level != LogLevel::Quiet) std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const nlohmann::json::exception& e) {
    if (level != LogLevel::Quiet) std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    if (level != LogLevel::Quiet) std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

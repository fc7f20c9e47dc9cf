#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "confocal/cli/commands.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = CONFOCAL_WORK_DIR;
const fs::path kConfigs = fs::path(CONFOCAL_SOURCE_DIR) / "configs";

struct Run {
  int code;
  std::string err;
};

// Runs the binary with stderr captured; the working directory is kWork.
Run run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = "cd '" + kWork.string() + "' && CONFOCAL_LOG=info '" CONFOCAL_EXE "' " + args +
                          " > /dev/null 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << text;
  return p;
}

std::string cfg(const std::string& name) { return "'" + (kConfigs / name).string() + "'"; }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("exit codes") {
  SUBCASE("negative axis names the field") {
    const auto p = write_file("bad_axes.json", R"({"schema_version": 1, "system": {"kind": "jacobi", "axes": [1, -2, 3]}})");
    const Run r = run("simulate --config '" + p.string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("/system/axes/1") != std::string::npos);
  }
  SUBCASE("syntax error reports a position") {
    const auto p = write_file("bad_syntax.json", "{\"schema_version\": 1,\n \"system\": {\"kind\": }\n}");
    const Run r = run("simulate --config '" + p.string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("bad_syntax.json:2:") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const auto p = write_file("bad_key.json", R"({"schema_version": 1, "sytem": {}})");
    CHECK(run("simulate --config '" + p.string() + "'").code == 2);
  }
  SUBCASE("f integrals on a symmetric spec") {
    const Run r = run("verify --config " + cfg("symmetric_22.json") + " --suite f-integrals --out sym");
    CHECK(r.code == 2);
    CHECK(r.err.find("SymmetricSpecError") != std::string::npos);
  }
  SUBCASE("unknown suite") { CHECK(run("verify --config " + cfg("jacobi_123.json") + " --suite nope --out x").code == 2); }
  SUBCASE("a failing check gives 1") {
    CHECK(run("simulate --config " + cfg("jacobi_123.json") + " --out tight --tol-overrides drift=1e-30").code == 1);
  }
}

TEST_CASE("shipped configurations pass") {
  for (const char* c : {"sphere_geodesic.json", "jacobi_123.json", "symmetric_22.json", "jacobi_rosochatius.json"}) {
    CAPTURE(c);
    CHECK(run(std::string("simulate --config ") + cfg(c) + " --out ship_sim").code == 0);
    CHECK(run(std::string("verify --config ") + cfg(c) + " --out ship_verify").code == 0);
  }
  for (const char* c : {"billiard_axis_orbit.json", "billiard_poncelet.json", "billiard_mu_domain.json"}) {
    CAPTURE(c);
    CHECK(run(std::string("billiard --config ") + cfg(c) + " --out ship_bil").code == 0);
  }
}

TEST_CASE("sphere geodesic returns after 2 pi") {
  REQUIRE(run("simulate --config " + cfg("sphere_geodesic.json") + " --out sphere --format json").code == 0);
  const auto doc = nlohmann::json::parse(slurp(kWork / "sphere" / "summary.json"));
  const auto& ret = doc.at("details").at("return");
  CHECK(std::abs(ret.at("time").get<double>() - 2 * M_PI) < 1e-6);
  CHECK(fs::exists(kWork / "sphere" / "trajectory.json"));
}

TEST_CASE("Jacobi f_i drifts in the summary") {
  REQUIRE(run("simulate --config " + cfg("jacobi_123.json") + " --out j123").code == 0);
  const auto doc = nlohmann::json::parse(slurp(kWork / "j123" / "summary.json"));
  int seen = 0;
  for (const auto& c : doc.at("checks")) {
    const std::string name = c.at("name");
    if (name.rfind("drift/f_", 0) != 0) continue;
    ++seen;
    CHECK(c.at("value").get<double>() < 1e-7);
  }
  CHECK(seen == 3);
  const auto rows = csv_rows(slurp(kWork / "j123" / "trajectory.csv"));
  REQUIRE(rows.size() > 2);
  const std::vector<std::string> head(rows[0].begin(), rows[0].begin() + 7);
  CHECK(head == std::vector<std::string>{"t", "x_0", "x_1", "x_2", "y_0", "y_1", "y_2"});
}

TEST_CASE("axis orbit matches the golden file") {
  REQUIRE(run("billiard --config " + cfg("billiard_axis_orbit.json") + " --out golden").code == 0);
  const auto got = csv_rows(slurp(kWork / "golden" / "impacts.csv"));
  const auto want = csv_rows(slurp(fs::path(CONFOCAL_SOURCE_DIR) / "tests" / "golden" / "axis_orbit_impacts.csv"));
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  for (std::size_t r = 1; r < got.size(); ++r) {
    REQUIRE(got[r].size() == want[r].size());
    for (std::size_t c = 0; c < got[r].size(); ++c) {
      const double a = std::stod(got[r][c]), b = std::stod(want[r][c]);
      if (std::isnan(b)) {
        CHECK(std::isnan(a));
      } else {
        CHECK(std::abs(a - b) <= 1e-12 * (1 + std::abs(b)));
      }
    }
  }
  // The orbit bounces between the vertices with period 2.
  CHECK(got[3][1] == got[1][1]);
  CHECK(std::stod(got[2][1]) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("determinism") {
  for (const std::string sub : {"simulate", "billiard"}) {
    const std::string c = sub == "simulate" ? cfg("jacobi_rosochatius.json") : cfg("billiard_mu_domain.json");
    REQUIRE(run(sub + " --config " + c + " --out det_a --seed 17").code == 0);
    REQUIRE(run(sub + " --config " + c + " --out det_b --seed 17").code == 0);
    for (const auto& e : fs::directory_iterator(kWork / "det_a")) {
      CAPTURE(e.path().filename().string());
      std::string a = slurp(e.path()), b = slurp(kWork / "det_b" / e.path().filename());
      // Summaries list their own output paths; compare everything else.
      if (e.path().extension() == ".json") {
        auto ja = nlohmann::json::parse(a), jb = nlohmann::json::parse(b);
        ja.erase("files");
        jb.erase("files");
        a = ja.dump();
        b = jb.dump();
      }
      CHECK(a == b);
    }
    fs::remove_all(kWork / "det_a");
    fs::remove_all(kWork / "det_b");
  }
  REQUIRE(run("verify --config " + cfg("jacobi_123.json") + " --out ver_a").code == 0);
  REQUIRE(run("verify --config " + cfg("jacobi_123.json") + " --out ver_b").code == 0);
  auto ra = nlohmann::json::parse(slurp(kWork / "ver_a" / "report.json"));
  auto rb = nlohmann::json::parse(slurp(kWork / "ver_b" / "report.json"));
  CHECK(ra.at("checks") == rb.at("checks"));
  REQUIRE(run("plot --config " + cfg("billiard_poncelet.json") + " --out plot_a --output p1.svg").code == 0);
  REQUIRE(run("plot --config " + cfg("billiard_poncelet.json") + " --out plot_a --output p2.svg").code == 0);
  CHECK(slurp(kWork / "p1.svg") == slurp(kWork / "p2.svg"));
}

TEST_CASE("plot") {
  SUBCASE("empty trajectory gives axes only") {
    const auto p = write_file("empty.csv", "k,x_0,x_1,y_0,y_1\n");
    REQUIRE(run("plot --config " + cfg("billiard_axis_orbit.json") + " --input '" + p.string() +
                "' --output empty.svg --no-auto-caustics")
                .code == 0);
    const std::string svg = slurp(kWork / "empty.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
  }
  SUBCASE("CSV input and the in-process run draw the same figure") {
    REQUIRE(run("billiard --config " + cfg("billiard_poncelet.json") + " --out pcsv").code == 0);
    REQUIRE(run("plot --config " + cfg("billiard_poncelet.json") + " --input pcsv/impacts.csv --output from_csv.svg").code == 0);
    REQUIRE(run("plot --config " + cfg("billiard_poncelet.json") + " --out pcsv --output in_proc.svg").code == 0);
    CHECK(slurp(kWork / "from_csv.svg") == slurp(kWork / "in_proc.svg"));
  }
}

TEST_CASE("verify in process") {
  using namespace confocal::cli;
  RunConfig c = load_config((kConfigs / "jacobi_123.json").string());
  c.out_dir = (kWork / "inproc").string();
  SUBCASE("empty selection passes trivially") {
    c.suites_given = true;
    c.suites.clear();
    const RunReport rep = cmd_verify(c);
    CHECK(rep.checks.empty());
    CHECK(rep.exit_code() == 0);
  }
  SUBCASE("every known suite runs on the default list") {
    for (const auto& s : default_suites()) {
      CAPTURE(s);
      CHECK(std::find(known_suites().begin(), known_suites().end(), s) != known_suites().end());
      const auto recs = run_suite(s, c);
      CHECK(!recs.empty());
      for (const auto& r : recs) {
        CAPTURE(r.name);
        CHECK(r.pass);
      }
    }
  }
  CHECK(exit_code_for(confocal::ErrorCategory::Config) == 2);
  CHECK(exit_code_for(confocal::ErrorCategory::Numeric) == 3);
}

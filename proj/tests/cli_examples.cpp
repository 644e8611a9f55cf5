#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
  failures += !ok;
}

struct Run {
  int status = -1;
  Json report;
};

Run run(const std::string& cli, const std::string& args, const fs::path& out) {
  fs::remove_all(out);
  const std::string cmd = "'" + cli + "' " + args + " --out '" + out.string() + "' > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out / "report.json");
  if (in) r.report = Json::parse(in);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLI examples"};
  std::string cli, fixtures, work;
  app.add_option("--cli", cli)->required();
  app.add_option("--fixtures", fixtures)->required();
  app.add_option("--work", work)->required();
  CLI11_PARSE(app, argc, argv);
  const fs::path fx(fixtures), dir(work);
  const auto f = [&](const char* name) { return "'" + (fx / name).string() + "'"; };

  {
    const auto r = run(cli, "curvature --metric " + f("hyperbolic_disc.json"), dir / "curvature");
    expect(r.status == 0, "curvature exits 0");
    std::ifstream csv(dir / "curvature" / "curvature.csv");
    std::string line;
    std::getline(csv, line);
    expect(line == "x,y,K", "curvature CSV header");
    double worst = 0.0;
    int rows = 0;
    while (std::getline(csv, line)) {
      worst = std::max(worst, std::abs(std::stod(line.substr(line.rfind(',') + 1)) + 1.0));
      ++rows;
    }
    expect(rows > 10000 && worst <= 1e-3, "hyperbolic K within 1e-3 of -1 at every node (max " + std::to_string(worst) + ")");
    const auto& c = r.report["config"];
    expect(c["grid"] == 128 && c["step"] == 1e-3 && c["word_bound"] == 8 && c["tol"] == 1e-6,
           "report embeds the default config");
  }
  {
    const auto r = run(cli, "classify --generators " + f("z2i.txt"), dir / "classify");
    const auto& g = r.report["results"]["group"];
    expect(r.status == 0 && g["case"] == 7 && g["label"] == "Z2i(1)" && g["confidence"] == "exact",
           "{iz, z+1} classifies as exceptional Z2i(1)");
    expect(g.contains("parameters") && g.contains("conjugator") && g.contains("evidence"), "classification fields");
  }
  {
    const auto r = run(cli, "--config " + f("pipeline_annulus.toml"), dir / "pipeline");
    const auto& res = r.report["results"];
    expect(r.status == 0 && r.report["command"] == "pipeline", "pipeline from a config file exits 0");
    expect(res["group"]["case"] == 5 && res["bound"]["total"] == 1, "flat annulus pipeline: case 5, total 1");
    expect(std::abs(res["strip"]["alpha"].get<double>() - std::log(2.0)) < 1e-6, "strip between |z| = 1 and 2 has width log 2");
    for (const char* name : {"developing.csv", "flat_locus.csv", "strip.csv", "directions.csv"})
      expect(fs::is_regular_file(dir / "pipeline" / name), std::string("pipeline writes ") + name);
  }
  {
    const auto r = run(cli, "classify --generators '" + (dir / "missing.txt").string() + "'", dir / "missing");
    expect(r.status == 1 && r.report["error"]["code"] == "ConfigError", "missing input exits 1");
  }
  {
    fs::create_directories(dir);
    std::ofstream(dir / "bad_metric.json") << R"({"kind": "expression", "formula": "1/(", "domain": {"type": "disc", "radius": 1}})";
    const auto r = run(cli, "curvature --metric '" + (dir / "bad_metric.json").string() + "'", dir / "bad_metric");
    expect(r.status == 1 && r.report["error"]["code"] == "InvalidFormula" && r.report["error"]["module"] == "metric_core",
           "bad formula exits 1 naming InvalidFormula");
  }
  {
    std::ofstream(dir / "finite.txt") << "rot 1/5\n";
    const auto r = run(cli, "count --genus 2 --generators '" + (dir / "finite.txt").string() + "'", dir / "finite");
    expect(r.status == 2 && r.report["error"]["code"] == "CaseNotCountable" && r.report["error"]["module"] == "count",
           "finite rotation group exits 2 naming CaseNotCountable");
    expect(r.report["artifacts"].empty() && !fs::exists(dir / "finite" / "directions.csv"), "no artifacts after a failure");
  }
  std::cout << (failures == 0 ? "all CLI examples passed" : std::to_string(failures) + " CLI example(s) failed") << "\n";
  return failures == 0 ? 0 : 1;
}

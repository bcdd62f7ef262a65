// Runs the check scenario twice and prints one PASS/FAIL line per criterion.
// Exits 1 when a criterion fails, unless --report-only is given, in which case
// only an incomplete evaluation is an error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "nlbellman/errors.hpp"
#include "nlbellman/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int usage() {
  std::cerr << "usage: acceptance [--report-only] [--config FILE]\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  std::string config_path = "configs/default.json";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--report-only") {
      report_only = true;
    } else if (a == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else {
      return usage();
    }
  }

  try {
    nlb::ScenarioConfig cfg = nlb::ScenarioConfig::load(config_path);
    cfg.command = "check";
    const fs::path base = fs::temp_directory_path() / ("nlb_acceptance_" + cfg.hash());
    fs::remove_all(base);

    cfg.output_dir = (base / "first").string();
    cfg.threads = 1;
    nlb::run_scenario(cfg);
    cfg.output_dir = (base / "second").string();
    cfg.threads = 2;
    nlb::run_scenario(cfg);

    bool identical = true;
    for (const char* name : {"check.json", "check.csv"})
      identical = identical && slurp(base / "first" / name) == slurp(base / "second" / name);

    const json report = json::parse(slurp(base / "first" / "check.json"));
    const auto& criteria = report.at("criteria");
    int failed = 0;
    for (const auto& c : criteria) {
      const int id = c.at("id").get<int>();
      bool pass = c.at("pass").get<bool>();
      std::string summary = c.at("summary").get<std::string>();
      if (id == 10) {
        summary += identical ? "; repeated check artifacts identical" : "; repeated check artifacts differ";
        pass = pass && identical;
      }
      if (!pass) ++failed;
      std::printf("criterion %2d %-28s %s  %s\n", id, c.at("name").get<std::string>().c_str(),
                  pass ? "PASS" : "FAIL", summary.c_str());
    }
    std::printf("%d of %zu criteria passed (config %s)\n", static_cast<int>(criteria.size()) - failed,
                criteria.size(), cfg.hash().c_str());
    fs::remove_all(base);
    if (criteria.size() != 10) return 1;
    return failed == 0 || report_only ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << nlb::error_json(e).dump(2) << "\n";
    return 1;
  }
}

#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlb {

/// One experiment: the problem, numerical settings and the command to run.
/// Loaded from a single JSON document; relative paths resolve against the
/// directory of that document.
struct ScenarioConfig {
  std::string command = "check";  // solve | sweep | symbol | diagnose | check
  nlohmann::json problem;
  std::vector<double> sigma_list;
  nlohmann::json quadrature = nlohmann::json::object();
  nlohmann::json diagnostics_quadrature = nlohmann::json::object();
  double tolerance = 1e-8;
  int max_iter = 50;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
  /// Field file read by diagnose instead of solving.
  std::optional<std::string> field;
  nlohmann::json symbol = nlohmann::json::object();
  nlohmann::json check = nlohmann::json::object();
  std::string base_dir = ".";

  static ScenarioConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static ScenarioConfig load(const std::string& path);

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// Canonical form: everything that affects results (not the output
  /// directory or the thread count).
  nlohmann::json to_json() const;
  /// FNV-1a 64 of the canonical form, 16 hex digits.
  std::string hash() const;

  std::string resolve(const std::string& path) const;
};

struct ScenarioOutcome {
  int exit_code = 0;
  std::vector<std::string> artifacts;
  nlohmann::json summary;
};

inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNonconvergence = 3;
inline constexpr int kExitFailure = 4;

/// Runs the configured command and writes its artifacts to output_dir.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

/// Machine-readable description of an error and the exit code it maps to.
nlohmann::json error_json(const std::exception& e);
int exit_code_for(const std::exception& e);

/// RFC 4180 writer: CRLF line ends, quoting when needed.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  static std::string number(double v);

private:
  static std::string escape(const std::string& cell);
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace nlb

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlb {

struct CriterionResult {
  CriterionResult() = default;
  CriterionResult(int id_, std::string name_) : id(id_), name(std::move(name_)) {}

  int id = 0;
  std::string name;
  bool pass = false;
  /// One line for the PASS/FAIL report.
  std::string summary;
  nlohmann::json detail;
};

/// Inputs of the property suite. The problem is the solved instance used by
/// the comparison, regularized-sequence, P/N and Hölder checks; the sweep
/// problem is the fixed instance of the absolute-mass stability check.
struct CheckOptions {
  nlohmann::json problem;
  nlohmann::json solver_quadrature;
  nlohmann::json diagnostics_quadrature;
  nlohmann::json sweep_problem;
  std::vector<double> sweep_sigmas{1.2, 1.5, 1.8, 1.95, 1.99};
  /// max A/‖u‖ at σ = 1.5 pinned from the first run; absent fails the check.
  std::optional<double> absolute_mass_pin;
  double tol = 1e-8;
  std::uint64_t seed = 1;
};

CriterionResult check_pucci_sandwich(std::uint64_t seed);
CriterionResult check_concavity(std::uint64_t seed);
CriterionResult check_symbol_comparability();
CriterionResult check_second_order_limit();
CriterionResult check_regularized_sequence(const CheckOptions& options);
CriterionResult check_comparison(const CheckOptions& options);
CriterionResult check_absolute_mass(const CheckOptions& options);
CriterionResult check_pn_identities(const CheckOptions& options);
CriterionResult check_holder(const CheckOptions& options);
CriterionResult check_round_trip(const CheckOptions& options);

/// All ten checks in order. A check that throws is reported as failed.
std::vector<CriterionResult> run_property_suite(const CheckOptions& options);

nlohmann::json to_json(const CriterionResult& result);

}  // namespace nlb

#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlbellman/field.hpp"
#include "nlbellman/kernel.hpp"

namespace nlb {

/// Dirichlet problem inf_a (L_a u + b_a) = 0 in the unit ball, u = g outside,
/// discretized on a grid whose box contains the ball.
struct BellmanProblem {
  std::vector<Kernel> kernels;
  std::vector<double> offsets;
  ExteriorClosure exterior;
  Grid grid{1, 1.0 / 64.0, 2.0};

  double sigma() const { return kernels.front().sigma(); }
  int dimension() const { return kernels.front().dimension(); }
  /// Smallest λ and largest Λ over the family.
  EllipticityBounds family_bounds() const;

  /// Non-empty family with equal σ and dimension, one finite offset per
  /// kernel, grid dimension matching, box radius at least 2.
  void validate() const;

  /// Same problem with every kernel replaced.
  BellmanProblem with_kernels(std::vector<Kernel> replacement) const;

  /// {"kernels": [...], "offsets": [...], "exterior": {...},
  ///  "grid": {"dimension", "h", "box_radius"}}. "sigma" at the top level is
  /// applied to kernels that omit it; sigma_override replaces both.
  static BellmanProblem from_json(const nlohmann::json& j,
                                  std::optional<double> sigma_override = {});
  nlohmann::json to_json() const;

private:
  static BellmanProblem parse(const nlohmann::json& j, std::optional<double> sigma_override);
};

}  // namespace nlb

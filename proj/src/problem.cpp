#include "nlbellman/problem.hpp"

#include <algorithm>
#include <cmath>

#include "nlbellman/errors.hpp"

namespace nlb {

EllipticityBounds BellmanProblem::family_bounds() const {
  EllipticityBounds b{kernels.front().bounds().lambda, kernels.front().bounds().Lambda};
  for (const auto& k : kernels) {
    b.lambda = std::min(b.lambda, k.bounds().lambda);
    b.Lambda = std::max(b.Lambda, k.bounds().Lambda);
  }
  return b;
}

void BellmanProblem::validate() const {
  if (kernels.empty()) throw ValidationError("kernels", "family must not be empty");
  if (offsets.size() != kernels.size())
    throw ValidationError("offsets", "need one offset per kernel");
  for (double b : offsets)
    if (!std::isfinite(b)) throw ValidationError("offsets", "must be finite");
  for (const auto& k : kernels) {
    if (k.sigma() != sigma()) throw ValidationError("kernels", "orders differ within the family");
    if (k.dimension() != dimension())
      throw ValidationError("kernels", "dimensions differ within the family");
  }
  if (grid.dimension() != dimension())
    throw ValidationError("grid.dimension", "does not match the kernels");
  if (grid.box_radius() < 2.0) throw ValidationError("grid.box_radius", "must be at least 2");
}

BellmanProblem BellmanProblem::with_kernels(std::vector<Kernel> replacement) const {
  BellmanProblem p = *this;
  p.kernels = std::move(replacement);
  return p;
}

BellmanProblem BellmanProblem::from_json(const nlohmann::json& j,
                                         std::optional<double> sigma_override) {
  try {
    return parse(j, sigma_override);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("problem", std::string("malformed: ") + e.what());
  }
}

BellmanProblem BellmanProblem::parse(const nlohmann::json& j, std::optional<double> sigma_override) {
  if (!j.is_object()) throw ValidationError("problem", "must be an object");
  std::optional<double> sigma = sigma_override;
  if (!sigma && j.contains("sigma")) sigma = j.at("sigma").get<double>();

  const auto& g = j.value("grid", nlohmann::json::object());
  int n = g.value("dimension", 1);
  const double h = g.value("h", 1.0 / 64.0);
  const double R = g.value("box_radius", 2.0);

  BellmanProblem p;
  if (!j.contains("kernels") || !j.at("kernels").is_array())
    throw ValidationError("kernels", "must be an array");
  for (const auto& kd : j.at("kernels")) {
    nlohmann::json d = kd;
    if (sigma_override) d["sigma"] = *sigma_override;
    p.kernels.push_back(kernel_from_json(d, sigma, n));
  }
  if (j.contains("offsets")) {
    p.offsets = j.at("offsets").get<std::vector<double>>();
  } else {
    p.offsets.assign(p.kernels.size(), 0.0);
  }
  if (j.contains("exterior")) p.exterior = ExteriorClosure::from_json(j.at("exterior"));
  p.grid = Grid(n, h, R);
  p.validate();
  return p;
}

nlohmann::json BellmanProblem::to_json() const {
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& k : kernels) ks.push_back(k.descriptor());
  return {{"sigma", sigma()},
          {"kernels", ks},
          {"offsets", offsets},
          {"exterior", exterior.to_json()},
          {"grid", {{"dimension", grid.dimension()}, {"h", grid.h()}, {"box_radius", grid.box_radius()}}}};
}

}  // namespace nlb

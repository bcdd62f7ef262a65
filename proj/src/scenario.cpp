#include "nlbellman/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "nlbellman/checks.hpp"
#include "nlbellman/errors.hpp"
#include "nlbellman/field_io.hpp"
#include "nlbellman/parallel.hpp"
#include "nlbellman/problem.hpp"
#include "nlbellman/regularity.hpp"
#include "nlbellman/solver.hpp"
#include "nlbellman/symbol.hpp"

namespace nlb {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ConfigurationError("csv row has the wrong width");
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string CsvWriter::number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvWriter::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += escape(cells[k]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

const std::set<std::string> kCommands = {"solve", "sweep", "symbol", "diagnose", "check"};

template <class T>
T get_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(key, "wrong type");
  }
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  static const std::set<std::string> known = {
      "command", "problem",    "sigma_list", "quadrature", "diagnostics_quadrature",
      "tolerance", "max_iter", "seed",       "threads",    "output_dir",
      "field",   "symbol",     "check"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ValidationError(it.key(), "unknown config field");

  ScenarioConfig c;
  c.base_dir = base_dir;
  c.command = get_field<std::string>(j, "command", c.command);
  if (!j.contains("problem")) throw ValidationError("problem", "missing");
  c.problem = j.at("problem");
  c.sigma_list = get_field<std::vector<double>>(j, "sigma_list", {});
  c.quadrature = j.value("quadrature", json::object());
  c.diagnostics_quadrature = j.value("diagnostics_quadrature", json::object());
  c.tolerance = get_field<double>(j, "tolerance", c.tolerance);
  c.max_iter = get_field<int>(j, "max_iter", c.max_iter);
  c.seed = get_field<std::uint64_t>(j, "seed", c.seed);
  c.threads = get_field<int>(j, "threads", c.threads);
  c.output_dir = get_field<std::string>(j, "output_dir", c.output_dir);
  if (j.contains("field")) c.field = get_field<std::string>(j, "field", "");
  c.symbol = j.value("symbol", json::object());
  c.check = j.value("check", json::object());
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // byte offsets are all the parser reports; turn them into a line number
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    int line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k)
      if (text[k] == '\n') ++line;
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), line);
  }
  const fs::path parent = fs::path(path).parent_path();
  return from_json(j, parent.empty() ? "." : parent.string());
}

std::string ScenarioConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
}

void ScenarioConfig::validate() const {
  if (!kCommands.count(command))
    throw ValidationError("command", "must be one of solve, sweep, symbol, diagnose, check");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ValidationError("tolerance", "must be positive");
  if (max_iter < 1) throw ValidationError("max_iter", "must be at least 1");
  if (threads < 1) throw ValidationError("threads", "must be at least 1");
  const BellmanProblem p = BellmanProblem::from_json(problem);
  QuadratureScheme::from_json(quadrature, p.grid.h()).validate_for_grid(p.grid.h());
  if (QuadratureScheme::from_json(quadrature, p.grid.h()).interpolation_order > 1)
    throw ValidationError("quadrature.interpolation_order", "the solver needs order 0 or 1");
  QuadratureScheme::from_json(diagnostics_quadrature, p.grid.h()).validate_for_grid(p.grid.h());
  if (command == "sweep" && sigma_list.empty()) throw ValidationError("sigma_list", "sweep needs a sigma list");
  for (double s : sigma_list)
    if (!(s >= 1.05 && s <= 1.995)) throw ValidationError("sigma_list", "entries must lie in [1.05, 1.995]");
  if (command == "diagnose" && field && !fs::exists(resolve(*field)))
    throw ValidationError("field", "file '" + *field + "' does not exist");
  if (command == "check") {
    if (!check.is_object()) throw ValidationError("check", "must be an object");
    if (!check.contains("sweep_problem")) throw ValidationError("check.sweep_problem", "missing");
    BellmanProblem::from_json(check["sweep_problem"]);
  }
}

json ScenarioConfig::to_json() const {
  json j = {{"command", command},
            {"problem", problem},
            {"sigma_list", sigma_list},
            {"quadrature", quadrature},
            {"diagnostics_quadrature", diagnostics_quadrature},
            {"tolerance", tolerance},
            {"max_iter", max_iter},
            {"seed", seed},
            {"symbol", symbol},
            {"check", check}};
  if (field) j["field"] = *field;
  return j;
}

std::string ScenarioConfig::hash() const { return fnv1a(to_json().dump()); }

// ---------------------------------------------------------------------------
// Errors

nlohmann::json error_json(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* x = dynamic_cast<const Error*>(&e)) {
    err["kind"] = x->kind();
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) err["field"] = v->field();
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) err["line"] = p->line();
    if (const auto* n = dynamic_cast<const NonconvergenceError*>(&e))
      err["residual_history"] = n->residual_history();
    if (const auto* r = dynamic_cast<const RefinementError*>(&e))
      err["suggested_nodes"] = r->suggested_nodes();
  } else {
    err["kind"] = "internal";
  }
  return {{"error", err}};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kExitInvalid;
  if (dynamic_cast<const NonconvergenceError*>(&e)) return kExitNonconvergence;
  return kExitFailure;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

class Artifacts {
public:
  Artifacts(const ScenarioConfig& c) : dir_(c.output_dir), hash_(c.hash()) { fs::create_directories(dir_); }

  const std::string& hash() const { return hash_; }

  void write(const std::string& name, const std::string& text) {
    const std::string path = (fs::path(dir_) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write '" + path + "'");
    out << text;
    paths_.push_back(path);
  }
  void write_json(const std::string& name, json j) {
    j["config_hash"] = hash_;
    write(name, j.dump(2) + "\n");
  }
  void write_field(const std::string& name, const ScalarField& u) {
    const std::string path = (fs::path(dir_) / name).string();
    export_field(u, path, hash_);
    paths_.push_back(path);
  }
  const std::vector<std::string>& paths() const { return paths_; }

private:
  std::string dir_;
  std::string hash_;
  std::vector<std::string> paths_;
};

std::vector<std::string> point_header(int n) {
  return n == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

void push_point(std::vector<std::string>& row, const Point& x, int n) {
  row.push_back(CsvWriter::number(x[0]));
  if (n == 2) row.push_back(CsvWriter::number(x[1]));
}

std::vector<std::string> with_hash(std::vector<std::string> cells, const std::string& hash) {
  cells.push_back(hash);
  return cells;
}

QuadratureScheme solver_scheme(const ScenarioConfig& c, const BellmanProblem& p) {
  return QuadratureScheme::from_json(c.quadrature, p.grid.h());
}
QuadratureScheme diagnostics_scheme(const ScenarioConfig& c, const BellmanProblem& p) {
  return QuadratureScheme::from_json(c.diagnostics_quadrature, p.grid.h());
}

json solution_summary(const Solution& s, const BellmanProblem& p, const QuadratureScheme& q) {
  std::vector<int> counts(p.kernels.size(), 0);
  for (int a : s.policy.index) ++counts[a];
  return {{"sigma", p.sigma()},
          {"iterations", s.iterations},
          {"residual_sup", s.residual_sup},
          {"point_residual_sup", residual_sup(p, s.field, q)},
          {"residual_history", s.residual_history},
          {"max_principle_constant", s.max_principle_constant},
          {"unknowns", s.policy.index.size()},
          {"policy_counts", counts},
          {"sup_norm", s.field.sup_norm()}};
}

void write_solution(Artifacts& out, const Solution& s, const BellmanProblem& p, const QuadratureScheme& q) {
  out.write_field("solution.field", s.field);
  json report = solution_summary(s, p, q);
  report["command"] = "solve";
  report["problem"] = p.to_json();
  out.write_json("solve.json", report);

  const int n = p.dimension();
  auto header = point_header(n);
  header.insert(header.end(), {"u", "control", "config_hash"});
  CsvWriter csv(header);
  const Stencils st = discretize(p, q);
  const Grid& g = s.field.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::vector<std::string> row;
    push_point(row, g.coordinate(k), n);
    row.push_back(CsvWriter::number(s.field.values()[k]));
    const auto unk = st.unknown_of[k];
    row.push_back(unk >= 0 ? std::to_string(s.policy.index[unk]) : "");
    csv.add_row(with_hash(row, out.hash()));
  }
  out.write("solution.csv", csv.str());
}

json run_solve(const ScenarioConfig& c, Artifacts& out) {
  const BellmanProblem p = BellmanProblem::from_json(c.problem);
  const QuadratureScheme q = solver_scheme(c, p);
  const Solution s = solve_dirichlet(p, q, c.tolerance, c.max_iter);
  write_solution(out, s, p, q);
  return {{"iterations", s.iterations}, {"residual_sup", s.residual_sup}};
}

json run_sweep(const ScenarioConfig& c, Artifacts& out) {
  const SweepReport rep = sigma_sweep(c.problem, c.sigma_list, c.quadrature, c.diagnostics_quadrature, c.tolerance);
  json j = nlb::to_json(rep);
  j["command"] = "sweep";
  out.write_json("sweep.json", j);
  CsvWriter csv({"sigma", "ok", "iterations", "residual", "max_A_over_sup", "C_emp", "alpha_resolved", "alpha",
                 "holder_residual", "error", "config_hash"});
  std::size_t failed = 0;
  for (const auto& r : rep.rows) {
    if (!r.ok) ++failed;
    csv.add_row({CsvWriter::number(r.sigma), r.ok ? "true" : "false", std::to_string(r.iterations),
                 CsvWriter::number(r.residual), CsvWriter::number(r.max_A_over_sup), CsvWriter::number(r.C_emp),
                 r.alpha_resolved ? "true" : "false", r.alpha_resolved ? CsvWriter::number(r.alpha) : "",
                 r.alpha_resolved ? CsvWriter::number(r.holder_residual) : "", r.error, out.hash()});
  }
  out.write("sweep.csv", csv.str());
  return {{"rows", rep.rows.size()}, {"failed", failed}};
}

json run_symbol(const ScenarioConfig& c, Artifacts& out) {
  const BellmanProblem p = BellmanProblem::from_json(c.problem);
  std::vector<double> magnitudes = default_magnitudes();
  std::vector<Point> directions = default_directions(p.dimension());
  try {
    if (c.symbol.contains("magnitudes")) magnitudes = c.symbol.at("magnitudes").get<std::vector<double>>();
    if (c.symbol.contains("directions")) {
      directions.clear();
      for (const auto& d : c.symbol.at("directions")) {
        const auto v = d.get<std::vector<double>>();
        if (v.empty() || v.size() > 2) throw ValidationError("symbol.directions", "need 1 or 2 components");
        Point e{v[0], v.size() > 1 ? v[1] : 0.0};
        const double r = norm(e);
        if (!(r > 0.0)) throw ValidationError("symbol.directions", "must be nonzero");
        directions.push_back((1.0 / r) * e);
      }
    }
  } catch (const json::exception&) {
    throw ValidationError("symbol", "magnitudes must be numbers and directions arrays of numbers");
  }

  json fits = json::array();
  CsvWriter csv({"kernel", "direction", "xi_x", "xi_y", "xi_norm", "s", "s_over_xi_sigma", "config_hash"});
  for (std::size_t k = 0; k < p.kernels.size(); ++k) {
    const ComparabilityFit fit = comparability_fit(p.kernels[k], magnitudes, directions);
    json jf = nlb::to_json(fit);
    jf["kernel"] = k;
    fits.push_back(jf);
    const auto& cv = fit.curve;
    for (std::size_t i = 0; i < cv.s_values.size(); ++i) {
      const double r = norm(cv.xi_samples[i]);
      csv.add_row({std::to_string(k), std::to_string(cv.direction_index[i]), CsvWriter::number(cv.xi_samples[i][0]),
                   CsvWriter::number(cv.xi_samples[i][1]), CsvWriter::number(r), CsvWriter::number(cv.s_values[i]),
                   CsvWriter::number(cv.s_values[i] / std::pow(r, cv.sigma)), out.hash()});
    }
  }
  out.write_json("symbol.json", {{"command", "symbol"}, {"fits", fits}});
  out.write("symbol.csv", csv.str());
  return {{"kernels", p.kernels.size()}};
}

json run_diagnose(const ScenarioConfig& c, Artifacts& out) {
  const BellmanProblem p = BellmanProblem::from_json(c.problem);
  ScalarField u = [&] {
    if (c.field) return import_field(c.resolve(*c.field));
    const QuadratureScheme q = solver_scheme(c, p);
    const Solution s = solve_dirichlet(p, q, c.tolerance, c.max_iter);
    write_solution(out, s, p, q);
    return s.field;
  }();
  if (!(u.grid() == p.grid)) throw ValidationError("field", "grid does not match the problem grid");
  const RegularityReport rep = diagnose(p, u, diagnostics_scheme(c, p));
  json j = nlb::to_json(rep);
  j["command"] = "diagnose";
  out.write_json("diagnose.json", j);

  const int n = p.dimension();
  auto header = point_header(n);
  header.insert(header.end(), {"A", "P", "N", "v", "config_hash"});
  CsvWriter pts(header);
  for (const auto& d : rep.points) {
    std::vector<std::string> row;
    push_point(row, d.x, n);
    for (double v : {d.A, d.P, d.N, d.v}) row.push_back(CsvWriter::number(v));
    pts.add_row(with_hash(row, out.hash()));
  }
  out.write("diagnose_points.csv", pts.str());

  CsvWriter holder({"radius", "oscillation", "error", "resolved", "config_hash"});
  for (const auto& l : rep.holder.levels)
    holder.add_row({CsvWriter::number(l.radius), CsvWriter::number(l.oscillation), CsvWriter::number(l.error),
                    l.resolved ? "true" : "false", out.hash()});
  out.write("holder.csv", holder.str());
  return {{"max_A_over_sup", rep.max_A_over_sup}, {"holder_resolved", rep.holder.resolved}};
}

std::optional<double> read_pin(const ScenarioConfig& c) {
  if (c.check.contains("absolute_mass_pin")) return c.check.at("absolute_mass_pin").get<double>();
  if (!c.check.contains("pin_file")) return std::nullopt;
  const std::string path = c.resolve(c.check.at("pin_file").get<std::string>());
  std::ifstream in(path);
  if (!in) throw ValidationError("check.pin_file", "cannot open '" + path + "'");
  try {
    return json::parse(in).at("max_A_over_sup").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError("check.pin_file", std::string("malformed pin file: ") + e.what());
  }
}

json run_check(const ScenarioConfig& c, Artifacts& out, bool& all_pass) {
  CheckOptions o;
  o.problem = c.problem;
  o.solver_quadrature = c.quadrature;
  o.diagnostics_quadrature = c.diagnostics_quadrature;
  o.sweep_problem = c.check.at("sweep_problem");
  if (c.check.contains("sweep_sigmas")) o.sweep_sigmas = c.check.at("sweep_sigmas").get<std::vector<double>>();
  o.absolute_mass_pin = read_pin(c);
  o.tol = c.tolerance;
  o.seed = c.seed;

  const auto results = run_property_suite(o);
  json list = json::array();
  CsvWriter csv({"id", "name", "pass", "summary", "config_hash"});
  all_pass = true;
  for (const auto& r : results) {
    list.push_back(nlb::to_json(r));
    csv.add_row({std::to_string(r.id), r.name, r.pass ? "true" : "false", r.summary, out.hash()});
    all_pass = all_pass && r.pass;
  }
  out.write_json("check.json", {{"command", "check"}, {"criteria", list}, {"all_pass", all_pass}});
  out.write("check.csv", csv.str());
  json summary = json::array();
  for (const auto& r : results) summary.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}});
  return summary;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config) {
  config.validate();
  set_thread_count(config.threads);
  Artifacts out(config);
  ScenarioOutcome o;
  if (config.command == "solve") {
    o.summary = run_solve(config, out);
  } else if (config.command == "sweep") {
    o.summary = run_sweep(config, out);
  } else if (config.command == "symbol") {
    o.summary = run_symbol(config, out);
  } else if (config.command == "diagnose") {
    o.summary = run_diagnose(config, out);
  } else {
    bool all_pass = false;
    o.summary = run_check(config, out, all_pass);
    o.exit_code = all_pass ? 0 : kExitChecksFailed;
  }
  o.artifacts = out.paths();
  return o;
}

}  // namespace nlb

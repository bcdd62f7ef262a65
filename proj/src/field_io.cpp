#include "nlbellman/field_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "nlbellman/errors.hpp"

namespace nlb {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, int line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ParseError("bad number '" + std::string(s) + "'", line);
  return v;
}

int major_of(const std::string& version) {
  const auto dot = version.find('.');
  try {
    return std::stoi(version.substr(0, dot));
  } catch (const std::exception&) {
    return -1;
  }
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& u, const std::optional<std::string>& config_hash) {
  const Grid& g = u.grid();
  json header = {{"format", kFieldFormat},
                 {"version", kFieldVersion},
                 {"n", g.dimension()},
                 {"h", g.h()},
                 {"R", g.box_radius()},
                 {"exterior", u.exterior().to_json()},
                 {"exterior_radius", u.exterior_radius() ? json(*u.exterior_radius()) : json(nullptr)},
                 {"sup_norm", u.sup_norm()}};
  if (config_hash) header["config_hash"] = *config_hash;
  out << header.dump() << '\n';

  const int m = g.nodes_per_axis();
  const auto values = u.values();
  if (g.dimension() == 1) {
    for (int i = 0; i < m; ++i) out << format_double(values[i]) << '\n';
    return;
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (i) out << ',';
      out << format_double(values[g.index(i, j)]);
    }
    out << '\n';
  }
}

void export_field(const ScalarField& u, const std::string& path,
                  const std::optional<std::string>& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write field file '" + path + "'");
  write_field(out, u, config_hash);
  if (!out) throw ConfigurationError("write failed for '" + path + "'");
}

ScalarField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("header is not JSON: ") + e.what(), 1);
  }
  if (!header.is_object() || header.value("format", "") != kFieldFormat)
    throw ParseError("not an nlbellman field file", 1);
  const std::string version = header.value("version", "");
  if (major_of(version) != major_of(kFieldVersion))
    throw ParseError("unsupported version '" + version + "'", 1);

  int n = 0;
  double h = 0.0, R = 0.0, stored_sup = 0.0;
  ExteriorClosure exterior;
  std::optional<double> exterior_radius;
  std::optional<Grid> grid;
  try {
    n = header.at("n").get<int>();
    h = header.at("h").get<double>();
    R = header.at("R").get<double>();
    stored_sup = header.at("sup_norm").get<double>();
    exterior = ExteriorClosure::from_json(header.at("exterior"));
    if (header.contains("exterior_radius") && !header["exterior_radius"].is_null())
      exterior_radius = header["exterior_radius"].get<double>();
    if (exterior_radius && !(*exterior_radius > 0.0))
      throw ParseError("exterior_radius must be positive", 1);
    grid.emplace(n, h, R);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad header field: ") + e.what(), 1);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("bad header field: ") + e.what(), 1);
  }

  const int m = grid->nodes_per_axis();
  const int rows = m;
  const int per_row = n == 1 ? 1 : m;
  std::vector<double> values(grid->size());
  int lineno = 1;
  for (int row = 0; row < rows; ++row) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError("expected " + std::to_string(rows) + " rows", lineno);
    std::string_view rest(line);
    for (int k = 0; k < per_row; ++k) {
      const auto comma = rest.find(',');
      const bool last = k + 1 == per_row;
      if (last != (comma == std::string_view::npos))
        throw ParseError("expected " + std::to_string(per_row) + " values", lineno);
      const double v = parse_double(rest.substr(0, comma), lineno);
      values[n == 1 ? grid->index(row) : grid->index(k, row)] = v;
      if (!last) rest.remove_prefix(comma + 1);
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      throw ParseError("trailing data after the last row", lineno);
  }

  ScalarField u(*grid, std::move(values), std::move(exterior));
  if (exterior_radius) u = u.with_exterior_region(*exterior_radius);
  if (u.sup_norm() != stored_sup)
    throw ParseError("sup_norm " + format_double(stored_sup) + " does not match the data (" +
                         format_double(u.sup_norm()) + ")",
                     1);
  return u;
}

ScalarField import_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read field file '" + path + "'");
  return read_field(in);
}

}  // namespace nlb

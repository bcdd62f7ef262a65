#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "nlbellman/errors.hpp"
#include "nlbellman/field_io.hpp"

using namespace nlb;

namespace {

ScalarField random_field(int n, double h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return ScalarField::sampled(Grid(n, h, 2.0), [&](const Point&) { return d(rng) * 1e3; },
                              ExteriorClosure::cosine(0.1, {1.0, 2.0}, 0.3));
}

std::string dump(const ScalarField& u) {
  std::stringstream ss;
  write_field(ss, u, "feedfacecafebeef");
  return ss.str();
}

int parse_line(const std::string& text) {
  std::stringstream ss(text);
  try {
    read_field(ss);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("field_io") {

TEST_CASE("round trip is exact") {
  for (const auto& u : {random_field(1, 1.0 / 64.0, 1), random_field(2, 1.0 / 8.0, 2),
                        random_field(1, 1.0 / 16.0, 3).with_exterior_region(1.0)}) {
    std::stringstream ss(dump(u));
    const ScalarField v = read_field(ss);
    CHECK(v.grid() == u.grid());
    CHECK(std::memcmp(v.values().data(), u.values().data(), u.values().size() * sizeof(double)) == 0);
    CHECK(v.exterior().to_json() == u.exterior().to_json());
    CHECK(v.sup_norm() == u.sup_norm());
    CHECK(v.exterior_radius() == u.exterior_radius());
  }
}

TEST_CASE("header carries the metadata") {
  const std::string text = dump(random_field(1, 0.25, 4));
  const auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(header["format"] == "nlbellman-field");
  CHECK(header["version"] == "1.0");
  CHECK(header["n"] == 1);
  CHECK(header["config_hash"] == "feedfacecafebeef");
  CHECK(header["exterior"]["kind"] == "cosine");
}

TEST_CASE("malformed input reports the line") {
  const std::string good = dump(random_field(1, 0.25, 5));
  auto header_end = good.find('\n');
  auto header = nlohmann::json::parse(good.substr(0, header_end));
  const std::string body = good.substr(header_end);

  CHECK(parse_line("") == 1);
  CHECK(parse_line("{not json\n") == 1);
  auto h2 = header;
  h2["version"] = "2.0";
  CHECK(parse_line(h2.dump() + body) == 1);
  h2 = header;
  h2["version"] = "1.7";
  CHECK(parse_line(h2.dump() + body) == 0);
  h2 = header;
  h2.erase("h");
  CHECK(parse_line(h2.dump() + body) == 1);
  h2 = header;
  h2["sup_norm"] = header["sup_norm"].get<double>() * (1 + 1e-15);
  CHECK(parse_line(h2.dump() + body) == 1);

  std::string bad = good;
  const auto third = bad.find('\n', bad.find('\n', header_end + 1) + 1);
  bad.insert(third, "x");  // end of line 3
  CHECK(parse_line(bad) == 3);
  const std::string short_body = good.substr(0, good.rfind('\n', good.size() - 2) + 1);
  CHECK(parse_line(short_body) > 1);
  CHECK(parse_line(good + "1.0\n") == static_cast<int>(17 + 2));
}

TEST_CASE("files") {
  const ScalarField u = random_field(2, 0.25, 6);
  const std::string path = (std::filesystem::temp_directory_path() / "nlb_field_io_test.field").string();
  export_field(u, path);
  const ScalarField v = import_field(path);
  std::filesystem::remove(path);
  CHECK(std::memcmp(v.values().data(), u.values().data(), u.values().size() * sizeof(double)) == 0);
  CHECK_THROWS_AS(import_field("does/not/exist.field"), ConfigurationError);
}

}

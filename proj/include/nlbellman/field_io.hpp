#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "nlbellman/field.hpp"

namespace nlb {

inline constexpr const char* kFieldFormat = "nlbellman-field";
inline constexpr const char* kFieldVersion = "1.0";

/// Writes a field as one JSON header line followed by the node values, one
/// grid row per line, in %.17g. Values round-trip exactly.
void write_field(std::ostream& out, const ScalarField& u,
                 const std::optional<std::string>& config_hash = {});
void export_field(const ScalarField& u, const std::string& path,
                  const std::optional<std::string>& config_hash = {});

/// Throws ParseError (with the offending line) on malformed input, on a
/// different major version, or when the stored sup_norm does not match.
ScalarField read_field(std::istream& in);
ScalarField import_field(const std::string& path);

}  // namespace nlb

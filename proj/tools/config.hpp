#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace thermolen::cli {

using Json = nlohmann::json;

/// The published configuration schema (tools/config.schema.json).
const Json& config_schema();

/// Checks `instance` against the subset of JSON Schema used by the published
/// schema: type, enum, properties, required, additionalProperties = false,
/// items, minItems, minimum, exclusiveMinimum, minLength, pattern and local
/// $ref. Throws ValidationError naming the offending JSON pointer.
void validate(const Json& instance, const Json& schema);

/// "start:stop:count", endpoints included.
std::vector<double> parse_range(const std::string& text);

/// Validated configuration with defaults filled in.
struct RunConfig {
  Json data;

  const std::string& command() const;
  Json at(const std::string& pointer, const Json& fallback) const;
  double number(const std::string& pointer, double fallback) const;
  std::vector<double> numbers(const std::string& pointer, std::vector<double> fallback) const;
  std::vector<double> range(const std::string& pointer, const std::string& fallback) const;
  std::string text(const std::string& pointer, const std::string& fallback) const;
};

/// Validates and returns the configuration. `data` is the merged file + flags.
RunConfig make_config(Json data);

/// 64-bit FNV-1a over the canonical (sorted-key) dump.
std::uint64_t config_hash(const Json& data);

}  // namespace thermolen::cli

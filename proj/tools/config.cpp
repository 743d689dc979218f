#include "config.hpp"

#include <cmath>
#include <cstdint>
#include <regex>

#include "config_schema.hpp"
#include "thermolen/errors.hpp"

namespace thermolen::cli {
namespace {

constexpr std::string_view kWhere = "cli::config";

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(kWhere, (path.empty() ? std::string("/") : path) + ": " + what);
}

bool has_type(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  if (type == "number") return v.is_number();
  return false;
}

const Json& resolve(const Json& schema, const Json& root) {
  if (!schema.contains("$ref")) return schema;
  const std::string ref = schema["$ref"].get<std::string>();
  if (ref.rfind("#", 0) != 0) throw std::logic_error("only local schema references are supported");
  return root.at(Json::json_pointer(ref.substr(1)));
}

void check(const Json& v, const Json& raw_schema, const Json& root, const std::string& path) {
  const Json& s = resolve(raw_schema, root);
  if (s.contains("type") && !has_type(v, s["type"].get<std::string>())) {
    fail(path, "expected " + s["type"].get<std::string>() + ", got " + std::string(v.type_name()));
  }
  if (s.contains("enum")) {
    bool found = false;
    for (const Json& option : s["enum"]) found = found || option == v;
    if (!found) fail(path, "value " + v.dump() + " not one of " + s["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) fail(path, "must be >= " + s["minimum"].dump());
    if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>()) {
      fail(path, "must be > " + s["exclusiveMinimum"].dump());
    }
  }
  if (v.is_string()) {
    const std::string& str = v.get_ref<const std::string&>();
    if (s.contains("minLength") && str.size() < s["minLength"].get<std::size_t>()) fail(path, "string too short");
    if (s.contains("pattern") && !std::regex_search(str, std::regex(s["pattern"].get<std::string>()))) {
      fail(path, "'" + str + "' does not match " + s["pattern"].get<std::string>());
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) fail(path, "too few items");
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], root, path + "/" + std::to_string(i));
    }
  }
  if (v.is_object()) {
    const Json props = s.value("properties", Json::object());
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        check(value, props[key], root, path + "/" + key);
      } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
        fail(path, "unknown key '" + key + "'");
      }
    }
    if (s.contains("required")) {
      for (const Json& key : s["required"]) {
        if (!v.contains(key.get<std::string>())) fail(path, "missing required key '" + key.get<std::string>() + "'");
      }
    }
  }
}

}  // namespace

const Json& config_schema() {
  static const Json schema = Json::parse(kConfigSchema);
  return schema;
}

void validate(const Json& instance, const Json& schema) { check(instance, schema, schema, ""); }

std::vector<double> parse_range(const std::string& text) {
  static const std::regex form(R"(^\s*([^:]+):([^:]+):([0-9]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, form)) throw ValidationError(kWhere, "range '" + text + "' is not start:stop:count");
  double a = 0, b = 0;
  int n = 0;
  try {
    a = std::stod(m[1]);
    b = std::stod(m[2]);
    n = std::stoi(m[3]);
  } catch (const std::exception&) {
    throw ValidationError(kWhere, "range '" + text + "' has non-numeric fields");
  }
  if (n < 1) throw ValidationError(kWhere, "range '" + text + "' needs at least one point");
  if (n == 1) return {a};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

const std::string& RunConfig::command() const { return data["command"].get_ref<const std::string&>(); }

Json RunConfig::at(const std::string& pointer, const Json& fallback) const {
  const Json::json_pointer p(pointer);
  return data.contains(p) ? data[p] : fallback;
}

double RunConfig::number(const std::string& pointer, double fallback) const {
  return at(pointer, fallback).get<double>();
}

std::vector<double> RunConfig::numbers(const std::string& pointer, std::vector<double> fallback) const {
  return at(pointer, Json(fallback)).get<std::vector<double>>();
}

std::vector<double> RunConfig::range(const std::string& pointer, const std::string& fallback) const {
  return parse_range(at(pointer, fallback).get<std::string>());
}

std::string RunConfig::text(const std::string& pointer, const std::string& fallback) const {
  return at(pointer, fallback).get<std::string>();
}

RunConfig make_config(Json data) {
  validate(data, config_schema());
  // Ranges are validated numerically too (the schema only checks the shape).
  if (data.contains("grid")) {
    for (const auto& [key, value] : data["grid"].items()) {
      if (value.is_string()) parse_range(value.get<std::string>());
    }
  }
  if (data.contains("endpoints") && data["endpoints"]["start"].size() != data["endpoints"]["end"].size()) {
    throw ValidationError(kWhere, "/endpoints: start and end have different lengths");
  }
  if (!data.contains("seed")) data["seed"] = 0;
  return RunConfig{std::move(data)};
}

std::uint64_t config_hash(const Json& data) {
  const std::string canonical = data.dump();  // object keys are kept sorted
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace thermolen::cli

#include "thermolen/io.hpp"

#include <json.hpp>

#include "thermolen/errors.hpp"

namespace thermolen {
namespace {

using nlohmann::json;

json operator_json(const CMatrix& op) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    json row_re = json::array(), row_im = json::array();
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      row_re.push_back(op(i, j).real());
      row_im.push_back(op(i, j).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  return json{{"dim", op.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix operator_from(const json& j, std::string_view where) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
    throw ValidationError(where, "operator needs \"dim\" and \"re\"");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "dim" && key != "re" && key != "im") throw ValidationError(where, "unknown operator key '" + key + "'");
  }
  if (!j["dim"].is_number_integer() || j["dim"].get<long>() < 1) {
    throw ValidationError(where, "\"dim\" must be a positive integer");
  }
  const int d = j["dim"].get<int>();
  CMatrix out = CMatrix::Zero(d, d);
  auto fill = [&](const json& rows, bool imaginary) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
      throw ValidationError(where, "operator rows must be a " + std::to_string(d) + "x" + std::to_string(d) + " array");
    }
    for (int r = 0; r < d; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != d) {
        throw ValidationError(where, "operator row " + std::to_string(r) + " has wrong length");
      }
      for (int c = 0; c < d; ++c) {
        if (!rows[r][c].is_number()) throw ValidationError(where, "operator entries must be numbers");
        const double v = rows[r][c].get<double>();
        if (imaginary) {
          out(r, c) += Complex(0.0, v);
        } else {
          out(r, c) += v;
        }
      }
    }
  };
  fill(j["re"], false);
  if (j.contains("im")) fill(j["im"], true);
  return out;
}

json parse(std::string_view text, std::string_view where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(where, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string operator_to_json(const CMatrix& op) { return operator_json(op).dump(); }

CMatrix operator_from_json(std::string_view text) {
  constexpr std::string_view where = "opcore::operator_from_json";
  return operator_from(parse(text, where), where);
}

HermitianOperator hermitian_from_json(std::string_view text) { return HermitianOperator(operator_from_json(text)); }

std::string generator_to_json(const LindbladGenerator& gen) {
  if (gen.label() != "gkls") {
    throw ValidationError("lindblad::generator_to_json", "generator '" + gen.label() + "' has no GKLS jump form");
  }
  json jumps = json::array();
  for (const JumpOperator& jump : gen.jumps()) jumps.push_back(json{{"op", operator_json(jump.op)}, {"rate", jump.rate}});
  const bool coherent = gen.hamiltonian_part().matrix().norm() > 0.0;
  return json{{"H", operator_json(gen.system_hamiltonian().matrix())},
              {"jumps", std::move(jumps)},
              {"beta", gen.beta()},
              {"coherent", coherent}}
      .dump();
}

LindbladGenerator generator_from_json(std::string_view text) {
  constexpr std::string_view where = "lindblad::generator_from_json";
  const json j = parse(text, where);
  if (!j.is_object() || !j.contains("H") || !j.contains("beta")) {
    throw ValidationError(where, "generator needs \"H\" and \"beta\"");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "H" && key != "jumps" && key != "beta" && key != "coherent") {
      throw ValidationError(where, "unknown generator key '" + key + "'");
    }
  }
  if (!j["beta"].is_number()) throw ValidationError(where, "\"beta\" must be a number");
  const HermitianOperator h(operator_from(j["H"], where));
  std::vector<JumpOperator> jumps;
  if (j.contains("jumps")) {
    if (!j["jumps"].is_array()) throw ValidationError(where, "\"jumps\" must be an array");
    for (const json& item : j["jumps"]) {
      if (!item.is_object() || !item.contains("op") || !item.contains("rate") || !item["rate"].is_number()) {
        throw ValidationError(where, "each jump needs \"op\" and numeric \"rate\"");
      }
      jumps.push_back({operator_from(item["op"], where), item["rate"].get<double>()});
    }
  }
  bool coherent = true;
  if (j.contains("coherent")) {
    if (!j["coherent"].is_boolean()) throw ValidationError(where, "\"coherent\" must be a boolean");
    coherent = j["coherent"].get<bool>();
  }
  return LindbladGenerator::build(h, std::move(jumps), j["beta"].get<double>(),
                                  coherent ? CoherentTerm::include : CoherentTerm::omit);
}

}  // namespace thermolen

#pragma once

// JSON text forms:
//   operator  {"dim": d, "re": [[...]], "im": [[...]]}
//   generator {"H": op, "jumps": [{"op": op, "rate": x}], "beta": b, "coherent": true}

#include <string>
#include <string_view>

#include "thermolen/lindblad.hpp"
#include "thermolen/opcore.hpp"

namespace thermolen {

std::string operator_to_json(const CMatrix& op);
CMatrix operator_from_json(std::string_view text);
HermitianOperator hermitian_from_json(std::string_view text);

std::string generator_to_json(const LindbladGenerator& gen);
/// Rebuilds and re-verifies the generator; stationarity failures surface as
/// ModelConsistencyError.
LindbladGenerator generator_from_json(std::string_view text);

}  // namespace thermolen

#include <doctest.h>

#include <random>

#include "support/oracles.hpp"
#include "thermolen/errors.hpp"
#include "thermolen/io.hpp"

using namespace thermolen;

TEST_SUITE("io") {
  TEST_CASE("operator JSON round trip") {
    std::mt19937_64 rng(113);
    for (int d = 1; d <= 4; ++d) {
      const CMatrix a = oracle::random_complex(rng, d);
      CHECK((operator_from_json(operator_to_json(a)) - a).cwiseAbs().maxCoeff() == 0.0);
    }
    const HermitianOperator h = hermitian_from_json(R"({"dim": 2, "re": [[1, 0], [0, -1]]})");
    CHECK((h.matrix() - pauli_z().matrix()).norm() == 0.0);
  }

  TEST_CASE("malformed operators are rejected") {
    CHECK_THROWS_AS(operator_from_json("{"), ValidationError);
    CHECK_THROWS_AS(operator_from_json(R"({"dim": 2, "re": [[1, 0]]})"), ValidationError);
    CHECK_THROWS_AS(operator_from_json(R"({"dim": 1, "re": [[1]], "extra": 0})"), ValidationError);
    CHECK_THROWS_AS(operator_from_json(R"({"dim": 0, "re": []})"), ValidationError);
    CHECK_THROWS_AS(hermitian_from_json(R"({"dim": 2, "re": [[0, 1], [0, 0]]})"), ValidationError);
  }

  TEST_CASE("generator JSON round trip") {
    std::mt19937_64 rng(127);
    for (int d = 2; d <= 4; ++d) {
      const LindbladGenerator gen = oracle::random_detailed_balance(rng, d, 0.9);
      const LindbladGenerator back = generator_from_json(generator_to_json(gen));
      CHECK((back.superoperator().matrix - gen.superoperator().matrix).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(back.beta() == gen.beta());
    }
    const LindbladGenerator plain = generator_from_json(
        R"({"H": {"dim": 2, "re": [[0, 0], [0, 0]]}, "jumps": [], "beta": 1.0})");
    CHECK(plain.superoperator().matrix.norm() == 0.0);
  }

  TEST_CASE("generator JSON errors") {
    CHECK_THROWS_AS(generator_from_json(R"({"H": {"dim": 1, "re": [[0]]}})"), ValidationError);
    CHECK_THROWS_AS(generator_from_json(R"({"H": {"dim": 1, "re": [[0]]}, "beta": 1, "foo": 1})"), ValidationError);
    // sigma^- at rate 1 alone does not fix the Gibbs state of sigma_z at beta = 1.
    CHECK_THROWS_AS(generator_from_json(R"({"H": {"dim": 2, "re": [[1, 0], [0, -1]]},
        "jumps": [{"op": {"dim": 2, "re": [[0, 1], [0, 0]]}, "rate": 1}], "beta": 1})"),
                    ModelConsistencyError);
    CHECK_THROWS_AS(generator_to_json(relaxation_times_generator(pauli_z(), 1.0, {pauli_x()}, {2.0})), ValidationError);
    CHECK_NOTHROW(generator_from_json(generator_to_json(gibbs_mixing(pauli_z(), 1.0, 1.0))));
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "thermolen/errors.hpp"
#include "thermolen/lindblad.hpp"

using namespace thermolen;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

DrazinInverse oracle_inverse(const LindbladGenerator& gen, double tolerance = 1e-11) {
  const double gap = drazin_spectral(gen).diagnostics.spectral_gap;
  const double max_rate = oracle::operator_norm(gen.superoperator().matrix);
  const double t_max = std::log(1.0 / (gap * tolerance)) / gap + 1.0;
  const int n_steps = static_cast<int>(std::ceil(t_max * max_rate / 1.5)) + 1;
  return drazin_integral_oracle(gen, t_max, n_steps, tolerance);
}

}  // namespace

TEST_SUITE("lindblad") {
  TEST_CASE("zero generator") {
    const LindbladGenerator gen = LindbladGenerator::build(HermitianOperator::zero(3), {}, 1.0);
    CHECK(max_abs(gen.superoperator().matrix) == 0.0);
  }

  TEST_CASE("generator superoperator matches the GKLS form applied directly") {
    std::mt19937_64 rng(31);
    const LindbladGenerator gen = oracle::random_detailed_balance(rng, 3, 0.9);
    const CMatrix rho = oracle::random_density(rng, 3);
    const CMatrix& h = gen.hamiltonian_part().matrix();
    CMatrix expected = Complex(0, -1) * (h * rho - rho * h);
    for (const JumpOperator& j : gen.jumps()) {
      const CMatrix ldl = j.op.adjoint() * j.op;
      expected += j.rate * (j.op * rho * j.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    CHECK(max_abs(gen.apply(rho) - expected) < 1e-13);
  }

  TEST_CASE("generators are stationary, trace and Hermiticity preserving") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + trial % 3;
      const LindbladGenerator gen = oracle::random_detailed_balance(rng, d, 1.2);
      const CMatrix& l = gen.superoperator().matrix;
      CHECK(gen.apply(gen.stationary().density()).norm() <= 1e-10 * l.norm());
      const CVector one = CMatrix::Identity(d, d).reshaped();
      CHECK((one.adjoint() * l).norm() < 1e-12);
      const CMatrix a = oracle::random_hermitian(rng, d);
      const CMatrix out = gen.apply(a);
      CHECK(max_abs(out - out.adjoint()) < 1e-13);
    }
  }

  TEST_CASE("non-stationary Gibbs state and negative rates are rejected") {
    CMatrix up = CMatrix::Zero(2, 2);
    up(0, 1) = 1.0;
    CHECK_THROWS_AS(LindbladGenerator::build(pauli_z(), {{up, 1.0}}, 1.0), ModelConsistencyError);
    CHECK_THROWS_AS(LindbladGenerator::build(pauli_z(), {{up, -1.0}}, 1.0), DomainError);
  }

  TEST_CASE("gibbs mixing structure") {
    std::mt19937_64 rng(41);
    const HermitianOperator h(oracle::random_hermitian(rng, 3));
    const double tau = 2.5;
    const LindbladGenerator gen = gibbs_mixing(h, 0.7, tau);
    CHECK(max_abs(gen.apply(gen.stationary().density())) < 1e-13);
    const CMatrix a = oracle::random_traceless_hermitian(rng, 3);
    CHECK(max_abs(gen.apply(a) + a / tau) < 1e-13);
    const CMatrix b = oracle::random_hermitian(rng, 3);
    const CMatrix expected = -tau * (b - gen.stationary().density() * b.trace());
    for (const DrazinInverse& inv : {drazin_traceless(gen), drazin_spectral(gen)}) {
      CHECK(max_abs(inv.apply(b) - expected) < 1e-12);
    }
    const DrazinInverse integral = drazin_integral_oracle(gen, 40.0 * tau, 80);
    CHECK(max_abs(integral.apply(b) - expected) < 1e-8);
    CHECK_THROWS_AS(gibbs_mixing(h, 0.7, 0.0), DomainError);
  }

  TEST_CASE("bosonic qubit rates and Bloch-sector inverse") {
    const BosonicRates rates = bosonic_rates(1.0, 1.0, 1.0);
    CHECK(rates.total == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-14));
    CHECK(rates.total == doctest::Approx(1.313035).epsilon(1e-6));
    for (double r : {0.1, 0.7, 3.0}) {
      for (double beta : {0.5, 2.0}) {
        const BosonicRates br = bosonic_rates(r, 0.5, beta);
        CHECK(br.excitation() / br.decay() == doctest::Approx(std::exp(-2.0 * beta * r)).epsilon(1e-12));
        CHECK(2.0 * br.occupation + 1.0 == doctest::Approx(1.0 / std::tanh(beta * r)).epsilon(1e-12));
      }
    }
    // alpha = 0: only the coth factor depends on r.
    CHECK(bosonic_rates(2.0, 0.0, 1.0).total * std::tanh(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(bosonic_rates(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(bosonic_rates(-1.0, 1.0, 1.0), DomainError);

    const double r = 1.0;
    const LindbladGenerator gen = bosonic_qubit_generator(r, 1.0, 1.0);
    const double gamma = bosonic_rates(r, 1.0, 1.0).total;
    const CMatrix w = gen.stationary().density();
    const SpectralGibbs reference = gibbs_state(pauli_z() * r, 1.0);
    CHECK(max_abs(w - reference.density()) < 1e-14);
    CHECK(max_abs(gen.apply(pauli_x().matrix()) + 0.5 * gamma * pauli_x().matrix()) < 1e-13);
    CHECK(max_abs(gen.apply(pauli_y().matrix()) + 0.5 * gamma * pauli_y().matrix()) < 1e-13);
    CHECK(max_abs(gen.apply(pauli_z().matrix()) + gamma * pauli_z().matrix()) < 1e-13);
    for (const DrazinInverse& inv : {drazin_spectral(gen), drazin_traceless(gen)}) {
      CHECK(max_abs(inv.apply(pauli_x().matrix()) + (2.0 / gamma) * pauli_x().matrix()) < 1e-12);
      CHECK(max_abs(inv.apply(pauli_y().matrix()) + (2.0 / gamma) * pauli_y().matrix()) < 1e-12);
      CHECK(max_abs(inv.apply(pauli_z().matrix()) + (1.0 / gamma) * pauli_z().matrix()) < 1e-12);
      CHECK(max_abs(inv.apply(w)) < 1e-13);
    }
    CHECK_FALSE(drazin_spectral(gen).diagnostics.fell_back);
    const DrazinInverse integral = drazin_integral_oracle(gen, 60.0, 120);
    CHECK(max_abs(integral.superop.matrix - drazin_spectral(gen).superop.matrix) < 1e-7);
  }

  TEST_CASE("bosonic qubit generator on a tilted Hamiltonian keeps its Gibbs state") {
    const HermitianOperator h = pauli_x() * 0.6 + pauli_z() * 0.8 * 1.3;
    const LindbladGenerator gen = bosonic_qubit_generator(h, 2.0, 1.5);
    CHECK(max_abs(gen.stationary().density() - oracle::gibbs_expm(h.matrix(), 1.5)) < 1e-13);
    CHECK(gen.stationarity_residual() < 1e-12);
  }

  TEST_CASE("Drazin conditions and method agreement on random generators") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 24; ++trial) {
      const int d = 2 + trial % 3;
      const LindbladGenerator gen = oracle::random_detailed_balance(rng, d, 0.5 + 0.1 * trial);
      const CMatrix& l = gen.superoperator().matrix;
      const CMatrix w = gen.stationary().density();
      const DrazinInverse traceless = drazin_traceless(gen);
      const DrazinInverse spectral = drazin_spectral(gen);
      const DrazinInverse integral = oracle_inverse(gen);
      for (const DrazinInverse* inv : {&traceless, &spectral, &integral}) {
        const oracle::Residuals res = oracle::drazin_conditions(l, inv->superop.matrix, w);
        CHECK(res.max() <= 1e-9);
        CHECK(drazin_residuals(gen, *inv).max() <= 1e-9);
      }
      CHECK(oracle::operator_norm(traceless.superop.matrix - spectral.superop.matrix) <= 1e-7);
      CHECK(oracle::operator_norm(traceless.superop.matrix - integral.superop.matrix) <= 1e-7);
      CHECK(oracle::operator_norm(spectral.superop.matrix - integral.superop.matrix) <= 1e-7);
    }
  }

  TEST_CASE("integral oracle refuses a short horizon") {
    const LindbladGenerator gen = gibbs_mixing(pauli_z(), 1.0, 1.0);
    CHECK_THROWS_AS(drazin_integral_oracle(gen, 2.0, 10), AccuracyError);
  }

  TEST_CASE("generator with a second fixed point is singular") {
    // Pure dephasing of sigma_z keeps every diagonal state fixed.
    const LindbladGenerator gen =
        LindbladGenerator::build(HermitianOperator::zero(2), {{pauli_z().matrix(), 1.0}}, 1.0);
    CHECK_THROWS_AS(drazin_traceless(gen), SingularityError);
    CHECK_THROWS_AS(drazin_spectral(gen), SingularityError);
  }

  TEST_CASE("semigroup is trace and positivity preserving") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + trial % 3;
      const LindbladGenerator gen = oracle::random_detailed_balance(rng, d, 1.0);
      for (double t : {0.01, 0.3, 2.0, 20.0}) {
        const CMatrix prop = (t * gen.superoperator().matrix).exp();
        CMatrix rho = oracle::random_density(rng, d, 0.0);
        const CMatrix out = devectorize(prop * rho.reshaped(), d);
        CHECK(std::abs(out.trace() - 1.0) < 1e-12);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (out + out.adjoint()));
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
      }
    }
  }

  TEST_CASE("entropy production rate") {
    std::mt19937_64 rng(53);
    const HermitianOperator h(oracle::random_hermitian(rng, 3));
    const double tau = 0.8;
    const LindbladGenerator mix = gibbs_mixing(h, 1.0, tau);
    const CMatrix w = mix.stationary().density();
    CHECK(std::abs(entropy_production_rate(mix, w)) < 1e-14);

    const CMatrix delta = oracle::random_traceless_hermitian(rng, 3);
    const double eps = 1e-4;
    const double expected = eps * eps * (delta * j_inverse_apply(mix.stationary(), delta)).trace().real() / tau;
    CHECK(entropy_production_rate(mix, w + eps * delta) == doctest::Approx(expected).epsilon(1e-3));

    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + trial % 3;
      const LindbladGenerator gen = oracle::random_detailed_balance(rng, d, 1.0);
      CHECK(entropy_production_rate(gen, oracle::random_density(rng, d)) >= -1e-12);
    }

    CMatrix pure = CMatrix::Zero(3, 3);
    pure(0, 0) = 1.0;
    CHECK_THROWS_AS(entropy_production_rate(mix, pure), SingularityError);
  }

  TEST_CASE("entropy production near equilibrium approaches the slow-driving form") {
    std::mt19937_64 rng(59);
    const LindbladGenerator gen = oracle::random_detailed_balance(rng, 3, 1.3);
    const SpectralGibbs& omega = gen.stationary();
    const double beta = gen.beta();
    const CMatrix hdot = oracle::random_hermitian(rng, 3);
    const DrazinInverse inv = drazin_traceless(gen);
    const CMatrix shift = -beta * inv.apply(j_apply(omega, hdot));
    const double eps = 1e-4;
    const double expected = -eps * eps * beta * beta * (hdot * inv.apply(j_apply(omega, hdot))).trace().real();
    CHECK(expected > 0.0);
    CHECK(entropy_production_rate(gen, omega.density() + eps * shift) == doctest::Approx(expected).epsilon(1e-3));
  }

  TEST_CASE("relaxation-times generator relaxes each observable with its own rate") {
    const HermitianOperator h = pauli_z() * 0.4;
    const std::vector<HermitianOperator> obs = {pauli_z(), pauli_x()};
    const LindbladGenerator gen = relaxation_times_generator(h, 1.0, obs, {1.0, 3.0}, 2.0);
    const CMatrix l = gen.superoperator().matrix;
    const SpectralGibbs& w = gen.stationary();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const double tau = i == 0 ? 1.0 : 3.0;
      const CMatrix x = obs[i].matrix() - w.expectation(obs[i].matrix()) * CMatrix::Identity(2, 2);
      // Adjoint action: L^dagger[X - <X>] = -(X - <X>) / tau.
      const CVector lhs = l.adjoint() * x.reshaped();
      CHECK((lhs + x.reshaped() / tau).norm() < 1e-12);
    }
    CHECK_THROWS_AS(relaxation_times_generator(h, 1.0, obs, {1.0}), ValidationError);
    CHECK_THROWS_AS(relaxation_times_generator(h, 1.0, obs, {1.0, -1.0}), DomainError);
  }
}

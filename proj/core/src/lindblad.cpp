#include "thermolen/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "thermolen/errors.hpp"
#include "thermolen/quadrature.hpp"

namespace thermolen {
namespace {

constexpr double kStationarityTolerance = 1e-10;
constexpr double kTracePreservationTolerance = 1e-12;
constexpr double kGapThreshold = 1e-10;
constexpr double kSpectralConditionLimit = 1e10;

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

CMatrix stationary_projector(const SpectralGibbs& omega) {
  const int d = omega.dim();
  const CVector w = omega.density().reshaped();
  const CVector id = CMatrix::Identity(d, d).reshaped();
  return CMatrix::Identity(d * d, d * d) - w * id.adjoint();
}

struct RestrictedSpectrum {
  double gap = 0.0;
  double max_rate = 0.0;
};

RestrictedSpectrum restricted_spectrum(const CMatrix& restricted) {
  Eigen::ComplexEigenSolver<CMatrix> solver(restricted, false);
  RestrictedSpectrum s;
  s.gap = std::numeric_limits<double>::infinity();
  for (const Complex& lambda : solver.eigenvalues()) {
    s.gap = std::min(s.gap, std::abs(lambda.real()));
    s.max_rate = std::max(s.max_rate, std::abs(lambda));
  }
  if (restricted.size() == 0) s.gap = 0.0;
  return s;
}

}  // namespace

// Generators ------------------------------------------------------------------

void LindbladGenerator::verify_and_store(std::string_view where) {
  const int d = superop_.dim;
  const CVector w = stationary_.density().reshaped();
  const double scale = superop_.matrix.norm();
  stationarity_residual_ = (superop_.matrix * w).norm();
  if (!(stationarity_residual_ <= kStationarityTolerance * scale)) {
    throw ModelConsistencyError(where, "declared Gibbs state is not stationary: |L[omega]| = " +
                                           std::to_string(stationarity_residual_) + ", |L| = " +
                                           std::to_string(scale));
  }
  const CVector id = CMatrix::Identity(d, d).reshaped();
  const double trace_leak = (id.adjoint() * superop_.matrix).norm();
  if (!(trace_leak <= kTracePreservationTolerance * std::max(1.0, scale))) {
    throw ModelConsistencyError(where, "generator is not trace preserving (|<1|L| = " +
                                           std::to_string(trace_leak) + ")");
  }
}

LindbladGenerator LindbladGenerator::build(const HermitianOperator& system_hamiltonian,
                                           std::vector<JumpOperator> jumps, double beta, CoherentTerm coherent) {
  constexpr std::string_view where = "lindblad::build_generator";
  const int d = system_hamiltonian.dim();
  LindbladGenerator gen;
  gen.stationary_ = gibbs_state(system_hamiltonian, beta);
  gen.system_hamiltonian_ = system_hamiltonian;
  gen.hamiltonian_part_ = coherent == CoherentTerm::include ? system_hamiltonian : HermitianOperator::zero(d);
  gen.label_ = "gkls";

  const CMatrix id = CMatrix::Identity(d, d);
  const Complex i(0.0, 1.0);
  const CMatrix& h = gen.hamiltonian_part_.matrix();
  CMatrix l = -i * kron(id, h) + i * kron(h.transpose(), id);
  for (const JumpOperator& jump : jumps) {
    if (jump.op.rows() != d || jump.op.cols() != d) {
      throw ValidationError(where, "jump operator dimension does not match the Hamiltonian");
    }
    if (!(jump.rate >= 0.0) || !std::isfinite(jump.rate)) {
      throw DomainError(where, "jump rates must be finite and non-negative, got " + std::to_string(jump.rate));
    }
    if (jump.rate == 0.0) continue;
    const CMatrix ldl = jump.op.adjoint() * jump.op;
    l += jump.rate * (kron(jump.op.conjugate(), jump.op) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
  }
  gen.superop_ = SuperOperator{d, std::move(l)};
  gen.jumps_ = std::move(jumps);
  gen.verify_and_store(where);
  return gen;
}

LindbladGenerator LindbladGenerator::from_superoperator(SuperOperator superop,
                                                       const HermitianOperator& system_hamiltonian, double beta,
                                                       std::string label) {
  constexpr std::string_view where = "lindblad::from_superoperator";
  if (superop.dim != system_hamiltonian.dim() || superop.matrix.rows() != superop.dim * superop.dim ||
      superop.matrix.cols() != superop.dim * superop.dim) {
    throw ValidationError(where, "superoperator shape does not match the Hamiltonian dimension");
  }
  LindbladGenerator gen;
  gen.stationary_ = gibbs_state(system_hamiltonian, beta);
  gen.system_hamiltonian_ = system_hamiltonian;
  gen.hamiltonian_part_ = HermitianOperator::zero(system_hamiltonian.dim());
  gen.superop_ = std::move(superop);
  gen.label_ = std::move(label);
  gen.verify_and_store(where);
  return gen;
}

LindbladGenerator gibbs_mixing(const HermitianOperator& h, double beta, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("lindblad::gibbs_mixing", "tau must be positive, got " + std::to_string(tau));
  }
  const SpectralGibbs omega = gibbs_state(h, beta);
  const int d = h.dim();
  std::vector<JumpOperator> jumps;
  jumps.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const CMatrix op = std::sqrt(omega.populations(i)) * omega.eigenvectors.col(i) *
                         omega.eigenvectors.col(j).adjoint();
      jumps.push_back({op, 1.0 / tau});
    }
  }
  LindbladGenerator gen = LindbladGenerator::build(h, std::move(jumps), beta, CoherentTerm::omit);
  return gen;
}

BosonicRates bosonic_rates(double r, double alpha, double beta) {
  constexpr std::string_view where = "lindblad::bosonic_qubit_generator";
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError(where, "energy scale r must be positive (spectral density undefined at 0), got " +
                                 std::to_string(r));
  }
  if (!(alpha >= 0.0)) throw DomainError(where, "ohmicity alpha must be non-negative");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError(where, "beta must be positive");
  BosonicRates rates;
  rates.gamma = std::pow(r, alpha);
  rates.occupation = 1.0 / std::expm1(2.0 * beta * r);
  rates.total = rates.gamma * (2.0 * rates.occupation + 1.0);
  return rates;
}

LindbladGenerator bosonic_qubit_generator(const HermitianOperator& h, double alpha, double beta) {
  constexpr std::string_view where = "lindblad::bosonic_qubit_generator";
  if (h.dim() != 2) throw ValidationError(where, "bosonic qubit generator needs a 2x2 Hamiltonian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  const double r = 0.5 * (solver.eigenvalues()(1) - solver.eigenvalues()(0));
  const BosonicRates rates = bosonic_rates(r, alpha, beta);
  const CVector ground = solver.eigenvectors().col(0);
  const CVector excited = solver.eigenvectors().col(1);
  const CMatrix lowering = ground * excited.adjoint();
  std::vector<JumpOperator> jumps{{lowering, rates.decay()}, {lowering.adjoint(), rates.excitation()}};
  LindbladGenerator gen = LindbladGenerator::build(h, std::move(jumps), beta, CoherentTerm::omit);
  return gen;
}

LindbladGenerator bosonic_qubit_generator(double r, double alpha, double beta) {
  return bosonic_qubit_generator(pauli_z() * r, alpha, beta);
}

LindbladGenerator relaxation_times_generator(const HermitianOperator& h, double beta,
                                             const std::vector<HermitianOperator>& observables,
                                             const std::vector<double>& taus, double complement_tau) {
  constexpr std::string_view where = "lindblad::relaxation_times_generator";
  if (observables.size() != taus.size()) throw ValidationError(where, "one relaxation time per observable");
  for (double tau : taus) {
    if (!(tau > 0.0)) throw DomainError(where, "relaxation times must be positive");
  }
  if (!(complement_tau > 0.0)) throw DomainError(where, "complement relaxation time must be positive");
  const int d = h.dim();
  const int n = d * d;
  const SpectralGibbs omega = gibbs_state(h, beta);

  // Left eigenvectors: 1, X_i - <X_i>, then a completion of the basis.
  std::vector<CVector> left;
  std::vector<double> rates;
  const CMatrix id = CMatrix::Identity(d, d);
  left.push_back(id.reshaped());
  rates.push_back(0.0);
  std::vector<CVector> orthonormal{left.front() / left.front().norm()};
  auto residual_of = [&](const CVector& v) {
    CVector r = v;
    for (const CVector& q : orthonormal) r -= q.dot(r) * q;
    return r;
  };
  for (std::size_t k = 0; k < observables.size(); ++k) {
    const CMatrix& x = observables[k].matrix();
    const CVector shifted = (x - omega.expectation(x) * id).reshaped();
    const CVector r = residual_of(shifted);
    if (r.norm() < 1e-10 * std::max(1.0, shifted.norm())) {
      throw ValidationError(where, "controlled observables must be linearly independent modulo the identity");
    }
    orthonormal.push_back(r / r.norm());
    left.push_back(shifted);
    rates.push_back(-1.0 / taus[k]);
  }
  for (const CMatrix& b : hermitian_basis(d)) {
    if (static_cast<int>(left.size()) == n) break;
    const CVector r = residual_of(b.reshaped());
    if (r.norm() < 1e-8) continue;
    const CVector q = r / r.norm();
    orthonormal.push_back(q);
    const CMatrix y = devectorize(q, d);
    left.push_back((y - omega.expectation(y) * id).reshaped());
    rates.push_back(-1.0 / complement_tau);
  }
  CMatrix left_matrix(n, n);
  for (int a = 0; a < n; ++a) left_matrix.col(a) = left[a];
  // Right eigenvectors are the dual basis: <l_a|r_b> = delta_ab.
  const CMatrix right = left_matrix.adjoint().fullPivLu().inverse();
  RVector diag(n);
  for (int a = 0; a < n; ++a) diag(a) = rates[a];
  SuperOperator s{d, right * diag.cast<Complex>().asDiagonal() * left_matrix.adjoint()};
  return LindbladGenerator::from_superoperator(std::move(s), h, beta, "relaxation_times");
}

// Drazin inverse --------------------------------------------------------------

std::string to_string(DrazinMethod method) {
  switch (method) {
    case DrazinMethod::spectral:
      return "spectral";
    case DrazinMethod::traceless_projection:
      return "traceless-projection";
    case DrazinMethod::integral_oracle:
      return "integral-oracle";
  }
  return "unknown";
}

double DrazinResiduals::max() const { return std::max({commutation, kills_stationary, traceless}); }

DrazinResiduals drazin_residuals(const LindbladGenerator& gen, const DrazinInverse& drazin) {
  const CMatrix& l = gen.superoperator().matrix;
  const CMatrix& lp = drazin.superop.matrix;
  const int d = gen.dim();
  const CMatrix p = stationary_projector(gen.stationary());
  DrazinResiduals r;
  r.commutation = std::max(op_norm(l * lp - p), op_norm(lp * l - p));
  r.kills_stationary = (lp * gen.stationary().density().reshaped()).norm();
  const CVector id = CMatrix::Identity(d, d).reshaped();
  r.traceless = (id.adjoint() * lp).norm();
  return r;
}

DrazinInverse drazin_traceless(const LindbladGenerator& gen) {
  constexpr std::string_view where = "lindblad::drazin_traceless";
  const int d = gen.dim();
  const CMatrix q = traceless_isometry(d);
  const CMatrix restricted = q.adjoint() * gen.superoperator().matrix * q;
  const RestrictedSpectrum spectrum = restricted_spectrum(restricted);
  if (!(spectrum.gap >= kGapThreshold * spectrum.max_rate) || spectrum.max_rate == 0.0) {
    throw SingularityError(where, "restricted generator has a zero mode (gap " + std::to_string(spectrum.gap) +
                                      "); the unique-fixed-point assumption is violated");
  }
  const CMatrix inverse = restricted.partialPivLu().inverse();
  DrazinInverse out;
  out.superop = SuperOperator{d, q * inverse * q.adjoint() * stationary_projector(gen.stationary())};
  out.stationary = gen.stationary();
  out.method = DrazinMethod::traceless_projection;
  out.diagnostics.spectral_gap = spectrum.gap;
  out.diagnostics.max_rate = spectrum.max_rate;
  return out;
}

DrazinInverse drazin_spectral(const LindbladGenerator& gen) {
  const CMatrix& l = gen.superoperator().matrix;
  const int n = static_cast<int>(l.rows());
  Eigen::ComplexEigenSolver<CMatrix> solver(l);
  const CVector& lambda = solver.eigenvalues();
  int zero_index = 0;
  double max_rate = 0.0;
  for (int a = 0; a < n; ++a) {
    if (std::abs(lambda(a)) < std::abs(lambda(zero_index))) zero_index = a;
    max_rate = std::max(max_rate, std::abs(lambda(a)));
  }
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    if (a != zero_index) gap = std::min(gap, std::abs(lambda(a).real()));
  }
  const CMatrix& v = solver.eigenvectors();
  Eigen::JacobiSVD<CMatrix> svd(v);
  const RVector& sv = svd.singularValues();
  const double condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();

  const bool isolated = max_rate > 0.0 && gap >= kGapThreshold * max_rate &&
                        std::abs(lambda(zero_index)) <= kGapThreshold * max_rate;
  if (!isolated || !(condition <= kSpectralConditionLimit)) {
    DrazinInverse fallback = drazin_traceless(gen);
    fallback.diagnostics.fell_back = true;
    fallback.diagnostics.eigenvector_condition = condition;
    return fallback;
  }
  CVector mu(n);
  for (int a = 0; a < n; ++a) mu(a) = a == zero_index ? Complex(0.0) : 1.0 / lambda(a);
  const CMatrix v_inv = v.fullPivLu().inverse();
  DrazinInverse out;
  out.superop = SuperOperator{gen.dim(), v * mu.asDiagonal() * v_inv};
  out.stationary = gen.stationary();
  out.method = DrazinMethod::spectral;
  out.diagnostics.spectral_gap = gap;
  out.diagnostics.max_rate = max_rate;
  out.diagnostics.eigenvector_condition = condition;
  return out;
}

DrazinInverse drazin_integral_oracle(const LindbladGenerator& gen, double t_max, int n_steps, double tolerance) {
  constexpr std::string_view where = "lindblad::drazin_integral_oracle";
  if (!(t_max > 0.0) || n_steps < 1) throw ValidationError(where, "need t_max > 0 and n_steps >= 1");
  const int d = gen.dim();
  const CMatrix& l = gen.superoperator().matrix;
  const CMatrix q = traceless_isometry(d);
  const RestrictedSpectrum spectrum = restricted_spectrum(q.adjoint() * l * q);
  if (!(spectrum.gap > 0.0)) throw SingularityError(where, "generator has no spectral gap");
  const double bound = std::exp(-spectrum.gap * t_max) / spectrum.gap;
  if (bound > tolerance) {
    throw AccuracyError(where, "t_max = " + std::to_string(t_max) + " too short for tolerance " +
                                   std::to_string(tolerance) + ": tail bound " + std::to_string(bound) +
                                   " with gap estimate " + std::to_string(spectrum.gap));
  }
  const GaussLegendreRule& rule = gauss_legendre(8);
  const double h = t_max / n_steps;
  const int n = d * d;
  CMatrix panel = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const CMatrix scaled = (0.5 * h * (1.0 + rule.nodes[k])) * l;
    panel += (0.5 * h * rule.weights[k]) * scaled.exp();
  }
  const CMatrix step = (h * l).exp();
  CMatrix shift = CMatrix::Identity(n, n);
  CMatrix sum = CMatrix::Zero(n, n);
  for (int j = 0; j < n_steps; ++j) {
    sum += shift;
    shift = step * shift;
  }
  DrazinInverse out;
  out.superop = SuperOperator{d, -sum * panel * stationary_projector(gen.stationary())};
  out.stationary = gen.stationary();
  out.method = DrazinMethod::integral_oracle;
  out.diagnostics.spectral_gap = spectrum.gap;
  out.diagnostics.max_rate = spectrum.max_rate;
  out.diagnostics.truncation_bound = bound;
  return out;
}

// Entropy production ----------------------------------------------------------

CMatrix hermitian_log(const CMatrix& rho, std::string_view where) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (rho + rho.adjoint()));
  const RVector& p = solver.eigenvalues();
  if (!(p.minCoeff() > 0.0)) {
    throw SingularityError(where, "state is rank deficient (min eigenvalue " + std::to_string(p.minCoeff()) +
                                      "); entropy production is undefined on the boundary of state space");
  }
  return solver.eigenvectors() * p.array().log().matrix().cast<Complex>().asDiagonal() *
         solver.eigenvectors().adjoint();
}

double entropy_production_rate(const LindbladGenerator& gen, const CMatrix& rho) {
  constexpr std::string_view where = "lindblad::entropy_production_rate";
  if (rho.rows() != gen.dim()) throw ValidationError(where, "state dimension does not match the generator");
  const CMatrix log_diff = hermitian_log(rho, where) - gen.stationary().log_density();
  return -(gen.apply(rho) * log_diff).trace().real();
}

}  // namespace thermolen

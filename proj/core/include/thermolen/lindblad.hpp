#pragma once

// Lindblad generators with a Gibbs fixed point, their Drazin inverses and the
// entropy production functional.

#include <string>
#include <vector>

#include "thermolen/opcore.hpp"

namespace thermolen {

struct JumpOperator {
  CMatrix op;
  double rate = 0.0;  // 1/time
};

/// Whether the coherent term -i[H, .] is kept. The interaction-picture
/// convention drops it; it commutes with the Gibbs state either way.
enum class CoherentTerm { include, omit };

/// Generator L of a Markovian semigroup whose unique fixed point is the Gibbs
/// state of `system_hamiltonian`. Immutable after construction.
class LindbladGenerator {
 public:
  /// Assembles -i[H, .] + sum_k rate_k (L_k . L_k^dagger - 1/2 {L_k^dagger L_k, .}).
  /// Throws DomainError for negative rates and ModelConsistencyError when the
  /// Gibbs state is not annihilated within 1e-10 * |L|.
  static LindbladGenerator build(const HermitianOperator& system_hamiltonian, std::vector<JumpOperator> jumps,
                                 double beta, CoherentTerm coherent = CoherentTerm::include);

  /// Wraps an explicit superoperator (not necessarily of GKLS form). The same
  /// stationarity and trace-preservation checks apply.
  static LindbladGenerator from_superoperator(SuperOperator superop, const HermitianOperator& system_hamiltonian,
                                              double beta, std::string label);

  int dim() const { return superop_.dim; }
  double beta() const { return stationary_.beta; }
  const SuperOperator& superoperator() const { return superop_; }
  const SpectralGibbs& stationary() const { return stationary_; }
  const HermitianOperator& system_hamiltonian() const { return system_hamiltonian_; }
  const HermitianOperator& hamiltonian_part() const { return hamiltonian_part_; }
  const std::vector<JumpOperator>& jumps() const { return jumps_; }
  const std::string& label() const { return label_; }
  /// |L[omega]| measured when the generator was built.
  double stationarity_residual() const { return stationarity_residual_; }

  CMatrix apply(const CMatrix& rho) const { return superop_.apply(rho); }

 private:
  LindbladGenerator() = default;
  void verify_and_store(std::string_view where);

  SuperOperator superop_;
  SpectralGibbs stationary_;
  HermitianOperator system_hamiltonian_;
  HermitianOperator hamiltonian_part_;
  std::vector<JumpOperator> jumps_;
  std::string label_;
  double stationarity_residual_ = 0.0;
};

/// rho' = (omega - rho)/tau, written with jumps sqrt(p_i)|i><j| at rate 1/tau.
LindbladGenerator gibbs_mixing(const HermitianOperator& h, double beta, double tau);

struct BosonicRates {
  double gamma = 0.0;      // gamma_r = r^alpha
  double occupation = 0.0; // P_r = 1/(e^{2 beta r} - 1)
  double total = 0.0;      // Gamma_r = gamma_r (2 P_r + 1)
  double decay() const { return gamma * (occupation + 1.0); }
  double excitation() const { return gamma * occupation; }
};

/// Rates of a qubit with gap 2r coupled to a bath with J(w) ~ w^alpha.
/// Throws DomainError for r <= 0 or alpha < 0.
BosonicRates bosonic_rates(double r, double alpha, double beta);

/// Interaction-picture generator of a qubit H = r n.sigma (gap 2r) coupled to
/// a bosonic bath. The coherent term is omitted.
LindbladGenerator bosonic_qubit_generator(const HermitianOperator& h, double alpha, double beta);
/// Same with H = r sigma_z.
LindbladGenerator bosonic_qubit_generator(double r, double alpha, double beta);

/// Generator whose adjoint has left eigenvectors X_i - <X_i> with eigenvalues
/// -1/tau_i, so each controlled observable relaxes with its own timescale.
/// The complement of span{X_i} relaxes with `complement_tau`.
LindbladGenerator relaxation_times_generator(const HermitianOperator& h, double beta,
                                             const std::vector<HermitianOperator>& observables,
                                             const std::vector<double>& taus, double complement_tau = 1.0);

enum class DrazinMethod { spectral, traceless_projection, integral_oracle };

std::string to_string(DrazinMethod method);

struct DrazinDiagnostics {
  bool fell_back = false;        // spectral route replaced by traceless projection
  double spectral_gap = 0.0;     // min |Re lambda| over nonzero modes
  double max_rate = 0.0;         // max |lambda|
  double eigenvector_condition = 0.0;
  double truncation_bound = 0.0; // integral oracle tail estimate
};

/// The Drazin inverse L^+ of a generator.
struct DrazinInverse {
  SuperOperator superop;
  SpectralGibbs stationary;
  DrazinMethod method = DrazinMethod::traceless_projection;
  DrazinDiagnostics diagnostics;

  CMatrix apply(const CMatrix& a) const { return superop.apply(a); }
};

/// Operator-norm residuals of the three defining conditions.
struct DrazinResiduals {
  double commutation = 0.0;   // max(|L L+ - P|, |L+ L - P|), P = Id - |omega><1|
  double kills_stationary = 0.0;  // |L+[omega]|
  double traceless = 0.0;     // |<1| L+|
  double max() const;
};

DrazinResiduals drazin_residuals(const LindbladGenerator& gen, const DrazinInverse& drazin);

/// Inverts the generator restricted to the traceless subspace. Throws
/// SingularityError when the restricted generator has a zero mode (gap below
/// 1e-10 * max|lambda|).
DrazinInverse drazin_traceless(const LindbladGenerator& gen);

/// Sum over nonzero eigenmodes of lambda^{-1}|r><l|. Falls back to
/// drazin_traceless (diagnostics.fell_back) when the eigenvector matrix is
/// ill-conditioned or the zero mode is not isolated.
DrazinInverse drazin_spectral(const LindbladGenerator& gen);

/// -int_0^{t_max} e^{v L} dv (Id - |omega><1|) by composite Gauss-Legendre
/// quadrature on n_steps panels. Throws AccuracyError when the tail estimate
/// e^{-gap t_max}/gap exceeds `tolerance`. Test oracle.
DrazinInverse drazin_integral_oracle(const LindbladGenerator& gen, double t_max, int n_steps,
                                     double tolerance = 1e-8);

/// sigma_dot = -Tr[L[rho](log rho - log omega)]. Throws SingularityError for
/// rank-deficient rho.
double entropy_production_rate(const LindbladGenerator& gen, const CMatrix& rho);

/// Matrix logarithm of a positive definite Hermitian matrix.
CMatrix hermitian_log(const CMatrix& rho, std::string_view where);

}  // namespace thermolen

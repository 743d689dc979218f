#pragma once

// Operator algebra on finite-dimensional Hilbert spaces: Hermitian operators,
// density matrices, Gibbs states, the J operator (Frechet derivative of the
// Gibbs exponential) and its inverse (derivative of the operator logarithm),
// Hilbert-Schmidt vectorization and thermodynamic functionals.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace thermolen {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kDriftWarningThreshold = 1e-8;

/// Square complex matrix equal to its conjugate transpose (per-entry
/// tolerance 1e-12). Immutable.
class HermitianOperator {
 public:
  HermitianOperator() = default;

  /// Validates squareness and Hermiticity; throws ValidationError otherwise.
  explicit HermitianOperator(CMatrix entries);

  /// Projects onto the Hermitian part (A + A^dagger)/2. Emits a warning when
  /// the anti-Hermitian part exceeds the drift threshold.
  static HermitianOperator symmetrized(const CMatrix& entries);

  static HermitianOperator zero(int dim);
  static HermitianOperator identity(int dim);
  static HermitianOperator diagonal(const RVector& values);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator operator-(const HermitianOperator& other) const;
  HermitianOperator operator*(double scale) const;
  friend HermitianOperator operator*(double scale, const HermitianOperator& op) { return op * scale; }

 private:
  struct Trusted {};
  HermitianOperator(Trusted, CMatrix entries) : entries_(std::move(entries)) {}

  CMatrix entries_;
};

/// Hermitian, unit trace, positive semidefinite (tolerances configurable for
/// integrator output; the defaults are 1e-12).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(CMatrix entries, double trace_tolerance = 1e-12,
                         double eigenvalue_tolerance = 1e-12);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  RVector eigenvalues() const;

 private:
  CMatrix entries_;
};

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

/// Spectral data of the Gibbs state e^{-beta H}/Z.
struct SpectralGibbs {
  RVector energies;          // ascending
  CMatrix eigenvectors;      // columns, unitary
  double beta = 0.0;
  RVector populations;       // p_i = e^{-beta e_i}/Z
  RVector log_populations;   // log p_i, exact even where p_i underflows
  double log_z = 0.0;

  int dim() const { return static_cast<int>(energies.size()); }
  CMatrix density() const;
  CMatrix log_density() const;
  CMatrix to_eigenbasis(const CMatrix& a) const;
  CMatrix from_eigenbasis(const CMatrix& a) const;
  /// Tr[omega A].
  Complex expectation(const CMatrix& a) const;
};

/// Throws ValidationError for non-Hermitian input, DomainError for beta <= 0
/// or non-finite beta. Populations use a max-shifted log-sum-exp.
SpectralGibbs gibbs_state(const HermitianOperator& h, double beta);
SpectralGibbs gibbs_state(const CMatrix& h, double beta);

/// J_omega[A] = int_0^1 ds omega^{1-s} (A - Tr[omega A]) omega^s, evaluated by
/// divided differences of the populations in the omega eigenbasis.
HermitianOperator j_apply(const SpectralGibbs& omega, const HermitianOperator& a);
CMatrix j_apply(const SpectralGibbs& omega, const CMatrix& a);

/// Derivative of the operator logarithm at omega; inverse of J on traceless
/// operators, J^{-1}[omega] = 1.
HermitianOperator j_inverse_apply(const SpectralGibbs& omega, const HermitianOperator& b);
CMatrix j_inverse_apply(const SpectralGibbs& omega, const CMatrix& b);

/// d/dt omega_beta(H_t) = -beta J_omega[Hdot].
HermitianOperator gibbs_derivative(const SpectralGibbs& omega, const HermitianOperator& hdot);

/// Generalized covariance Tr[A J_omega[B]].
double kmb_inner(const SpectralGibbs& omega, const HermitianOperator& a, const HermitianOperator& b);

/// Divided-difference weights (p_i - p_j)/(log p_i - log p_j) with p_i on the
/// diagonal.
RMatrix j_weights(const SpectralGibbs& omega);

double von_neumann_entropy(const DensityMatrix& rho);
double von_neumann_entropy(const CMatrix& rho);

/// Non-equilibrium free energy <H>_rho - S(rho)/beta.
double free_energy(const DensityMatrix& rho, const HermitianOperator& h, double beta);

struct RelativeEntropy {
  double value = 0.0;        // +infinity when the support condition fails
  bool support_ok = true;
};

/// S(rho || sigma) = Tr[rho (log rho - log sigma)].
RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);
RelativeEntropy relative_entropy(const CMatrix& rho, const CMatrix& sigma);
/// Same, with sigma given by its Gibbs spectral data (exact log sigma).
double relative_entropy(const CMatrix& rho, const SpectralGibbs& sigma);

struct FreeEnergySplit {
  double equilibrium = 0.0;   // F(omega, H) = -log Z / beta
  double availability = 0.0;  // S(rho || omega) / beta
};

FreeEnergySplit noneq_split(const DensityMatrix& rho, const HermitianOperator& h, double beta);

/// Coordinates of an operator in the matrix-unit basis |l><m|, column-major
/// (index l + d*m). Orthonormal for the Hilbert-Schmidt inner product.
struct VectorizedOperator {
  int dim = 0;
  CVector coordinates;
};

VectorizedOperator vectorize(const CMatrix& a);
VectorizedOperator vectorize(const HermitianOperator& a);
CMatrix devectorize(const VectorizedOperator& v);
CMatrix devectorize(const CVector& coordinates, int dim);
/// Hermitian part of the devectorized operator (drift-checked).
HermitianOperator devectorize_hermitian(const VectorizedOperator& v);
/// <A|B> = Tr[A^dagger B].
Complex hs_inner(const CMatrix& a, const CMatrix& b);

/// Linear map on d x d operators in matrix form (d^2 x d^2), acting on
/// column-major vectorizations.
struct SuperOperator {
  int dim = 0;
  CMatrix matrix;

  CMatrix apply(const CMatrix& a) const;
};

SuperOperator superop_matrix(const std::function<CMatrix(const CMatrix&)>& map, int dim);
SuperOperator identity_superoperator(int dim);
/// Matrix of the map X -> A X B.
SuperOperator sandwich_superoperator(const CMatrix& left, const CMatrix& right);

/// J_omega as a superoperator matrix.
SuperOperator j_superoperator(const SpectralGibbs& omega);

/// Orthonormal Hermitian basis {Delta_l, Sigma^x_lm, Sigma^y_lm} of d x d
/// operators.
std::vector<CMatrix> hermitian_basis(int dim);

/// Orthonormal Hermitian basis of the traceless subspace (d^2 - 1 elements):
/// off-diagonal Sigma^x, Sigma^y plus normalized generalized Gell-Mann
/// diagonals.
std::vector<CMatrix> traceless_basis(int dim);

/// Columns are vectorizations of traceless_basis(dim); d^2 x (d^2 - 1)
/// isometry.
CMatrix traceless_isometry(int dim);

}  // namespace thermolen

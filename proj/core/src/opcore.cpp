#include "thermolen/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "thermolen/errors.hpp"

namespace thermolen {
namespace {

constexpr double kUnderflowPopulation = 1e-300;
constexpr double kDegenerateLogGap = 1e-12;

void require_square(const CMatrix& m, std::string_view where) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ValidationError(where, "operator must be a non-empty square matrix, got " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_same_dim(int a, int b, std::string_view where) {
  if (a != b) {
    throw ValidationError(where, "dimension mismatch: " + std::to_string(a) + " vs " +
                                     std::to_string(b));
  }
}

double max_abs_entry(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// (p_i - p_j)/(log p_i - log p_j) written as p_j * expm1(d)/d with
// d = log p_i - log p_j, exact for nearly degenerate pairs.
double log_mean(double p_i, double log_p_i, double p_j, double log_p_j) {
  const double d = log_p_i - log_p_j;
  if (std::abs(d) < kDegenerateLogGap) return 0.5 * (p_i + p_j);
  if (d > 0) return p_j * std::expm1(d) / d;
  return p_i * std::expm1(-d) / (-d);
}

void check_populations(const SpectralGibbs& omega, std::string_view where) {
  for (int i = 0; i < omega.dim(); ++i) {
    if (omega.populations(i) < kUnderflowPopulation) {
      throw UnderflowError(where, "population " + std::to_string(i) + " below 1e-300 (log p = " +
                                      std::to_string(omega.log_populations(i)) + ")");
    }
  }
}

CMatrix hermitian_part_checked(const CMatrix& m, std::string_view where) {
  const CMatrix herm = 0.5 * (m + m.adjoint());
  const double drift = max_abs_entry(m - herm);
  const double scale = std::max(1.0, max_abs_entry(m));
  if (drift > kDriftWarningThreshold * scale) {
    warn(std::string(where) + ": Hermiticity drift " + std::to_string(drift));
  }
  return herm;
}

}  // namespace

// HermitianOperator -----------------------------------------------------------

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  require_square(entries_, "opcore::HermitianOperator");
  const double asym = max_abs_entry(entries_ - entries_.adjoint());
  if (!(asym <= kHermitianTolerance)) {
    throw ValidationError("opcore::HermitianOperator",
                          "matrix is not Hermitian (max |A - A^dagger| = " + std::to_string(asym) + ")");
  }
  entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
}

HermitianOperator HermitianOperator::symmetrized(const CMatrix& entries) {
  require_square(entries, "opcore::HermitianOperator::symmetrized");
  return HermitianOperator(Trusted{}, hermitian_part_checked(entries, "opcore::symmetrize"));
}

HermitianOperator HermitianOperator::zero(int dim) {
  return HermitianOperator(Trusted{}, CMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::identity(int dim) {
  return HermitianOperator(Trusted{}, CMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(const RVector& values) {
  return HermitianOperator(Trusted{}, values.cast<Complex>().asDiagonal());
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  require_same_dim(dim(), other.dim(), "opcore::HermitianOperator::operator+");
  return HermitianOperator(Trusted{}, entries_ + other.entries_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& other) const {
  require_same_dim(dim(), other.dim(), "opcore::HermitianOperator::operator-");
  return HermitianOperator(Trusted{}, entries_ - other.entries_);
}

HermitianOperator HermitianOperator::operator*(double scale) const {
  return HermitianOperator(Trusted{}, entries_ * scale);
}

// DensityMatrix ---------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix entries, double trace_tolerance, double eigenvalue_tolerance)
    : entries_(std::move(entries)) {
  constexpr std::string_view where = "opcore::DensityMatrix";
  require_square(entries_, where);
  const double asym = max_abs_entry(entries_ - entries_.adjoint());
  if (!(asym <= std::max(kHermitianTolerance, trace_tolerance))) {
    throw ValidationError(where, "state is not Hermitian (drift " + std::to_string(asym) + ")");
  }
  entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
  const double trace = entries_.trace().real();
  if (!(std::abs(trace - 1.0) <= trace_tolerance)) {
    throw ValidationError(where, "trace " + std::to_string(trace) + " differs from 1");
  }
  const double min_eig = eigenvalues().minCoeff();
  if (!(min_eig >= -eigenvalue_tolerance)) {
    throw ValidationError(where, "negative eigenvalue " + std::to_string(min_eig));
  }
}

RVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

HermitianOperator pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianOperator(m);
}

HermitianOperator pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianOperator(m);
}

// Gibbs states ----------------------------------------------------------------

CMatrix SpectralGibbs::density() const {
  return eigenvectors * populations.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

CMatrix SpectralGibbs::log_density() const {
  return eigenvectors * log_populations.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

CMatrix SpectralGibbs::to_eigenbasis(const CMatrix& a) const {
  return eigenvectors.adjoint() * a * eigenvectors;
}

CMatrix SpectralGibbs::from_eigenbasis(const CMatrix& a) const {
  return eigenvectors * a * eigenvectors.adjoint();
}

Complex SpectralGibbs::expectation(const CMatrix& a) const {
  const CMatrix rotated = to_eigenbasis(a);
  Complex sum = 0.0;
  for (int i = 0; i < dim(); ++i) sum += populations(i) * rotated(i, i);
  return sum;
}

SpectralGibbs gibbs_state(const CMatrix& h, double beta) {
  constexpr std::string_view where = "opcore::gibbs_state";
  require_square(h, where);
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError(where, "beta must be positive and finite, got " + std::to_string(beta));
  }
  const double asym = max_abs_entry(h - h.adjoint());
  if (!(asym <= kHermitianTolerance * std::max(1.0, max_abs_entry(h)))) {
    throw ValidationError(where, "Hamiltonian is not Hermitian (drift " + std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()));
  SpectralGibbs g;
  g.beta = beta;
  g.energies = solver.eigenvalues();
  g.eigenvectors = solver.eigenvectors();
  const int d = static_cast<int>(g.energies.size());
  const double e_min = g.energies.minCoeff();
  double shifted_sum = 0.0;
  for (int i = 0; i < d; ++i) shifted_sum += std::exp(-beta * (g.energies(i) - e_min));
  g.log_z = -beta * e_min + std::log(shifted_sum);
  g.log_populations = (-beta * g.energies).array() - g.log_z;
  g.populations = g.log_populations.array().exp();
  return g;
}

SpectralGibbs gibbs_state(const HermitianOperator& h, double beta) {
  return gibbs_state(h.matrix(), beta);
}

// J and its inverse -----------------------------------------------------------

RMatrix j_weights(const SpectralGibbs& omega) {
  const int d = omega.dim();
  RMatrix w(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      w(i, j) = i == j ? omega.populations(i)
                       : log_mean(omega.populations(i), omega.log_populations(i), omega.populations(j),
                                  omega.log_populations(j));
    }
  }
  return w;
}

CMatrix j_apply(const SpectralGibbs& omega, const CMatrix& a) {
  constexpr std::string_view where = "opcore::j_apply";
  require_same_dim(omega.dim(), static_cast<int>(a.rows()), where);
  check_populations(omega, where);
  const Complex mean = omega.expectation(a);
  CMatrix rotated = omega.to_eigenbasis(a);
  rotated.diagonal().array() -= mean;
  const RMatrix w = j_weights(omega);
  return omega.from_eigenbasis(rotated.cwiseProduct(w.cast<Complex>()));
}

HermitianOperator j_apply(const SpectralGibbs& omega, const HermitianOperator& a) {
  return HermitianOperator::symmetrized(j_apply(omega, a.matrix()));
}

CMatrix j_inverse_apply(const SpectralGibbs& omega, const CMatrix& b) {
  constexpr std::string_view where = "opcore::j_inverse_apply";
  require_same_dim(omega.dim(), static_cast<int>(b.rows()), where);
  for (int i = 0; i < omega.dim(); ++i) {
    if (omega.populations(i) < kUnderflowPopulation) {
      throw SingularityError(where, "state is rank deficient (population " + std::to_string(i) +
                                        " below 1e-300)");
    }
  }
  const RMatrix w = j_weights(omega);
  CMatrix rotated = omega.to_eigenbasis(b);
  return omega.from_eigenbasis(rotated.cwiseQuotient(w.cast<Complex>()));
}

HermitianOperator j_inverse_apply(const SpectralGibbs& omega, const HermitianOperator& b) {
  return HermitianOperator::symmetrized(j_inverse_apply(omega, b.matrix()));
}

HermitianOperator gibbs_derivative(const SpectralGibbs& omega, const HermitianOperator& hdot) {
  return j_apply(omega, hdot) * (-omega.beta);
}

double kmb_inner(const SpectralGibbs& omega, const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim(), "opcore::kmb_inner");
  return (a.matrix() * j_apply(omega, b.matrix())).trace().real();
}

// Entropic functionals --------------------------------------------------------

double von_neumann_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double p : solver.eigenvalues()) {
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy(rho.matrix()); }

double free_energy(const DensityMatrix& rho, const HermitianOperator& h, double beta) {
  require_same_dim(rho.dim(), h.dim(), "opcore::free_energy");
  if (!(beta > 0.0)) throw DomainError("opcore::free_energy", "beta must be positive");
  return (rho.matrix() * h.matrix()).trace().real() - von_neumann_entropy(rho) / beta;
}

RelativeEntropy relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  constexpr std::string_view where = "opcore::relative_entropy";
  require_square(rho, where);
  require_same_dim(static_cast<int>(rho.rows()), static_cast<int>(sigma.rows()), where);
  Eigen::SelfAdjointEigenSolver<CMatrix> rs(rho);
  Eigen::SelfAdjointEigenSolver<CMatrix> ss(sigma);
  const RVector& a = rs.eigenvalues();
  const RVector& b = ss.eigenvalues();
  // Eigenvalues at or below this scale count as outside the support.
  const double tiny = 1e-14;
  const RMatrix overlap = (rs.eigenvectors().adjoint() * ss.eigenvectors()).cwiseAbs2();
  RelativeEntropy out;
  double value = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) <= 0.0) continue;
    value += a(i) * std::log(a(i));
    for (int j = 0; j < b.size(); ++j) {
      const double weight = a(i) * overlap(i, j);
      if (weight <= tiny * tiny) continue;
      if (b(j) <= tiny) {
        if (weight > tiny) {
          out.support_ok = false;
          out.value = std::numeric_limits<double>::infinity();
          return out;
        }
        continue;
      }
      value -= weight * std::log(b(j));
    }
  }
  out.value = value;
  return out;
}

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return relative_entropy(rho.matrix(), sigma.matrix());
}

double relative_entropy(const CMatrix& rho, const SpectralGibbs& sigma) {
  require_same_dim(static_cast<int>(rho.rows()), sigma.dim(), "opcore::relative_entropy");
  const double neg_entropy = -von_neumann_entropy(rho);
  const CMatrix rotated = sigma.to_eigenbasis(rho);
  double cross = 0.0;
  for (int i = 0; i < sigma.dim(); ++i) cross += rotated(i, i).real() * sigma.log_populations(i);
  return neg_entropy - cross;
}

FreeEnergySplit noneq_split(const DensityMatrix& rho, const HermitianOperator& h, double beta) {
  const SpectralGibbs omega = gibbs_state(h, beta);
  FreeEnergySplit out;
  out.equilibrium = -omega.log_z / beta;
  out.availability = relative_entropy(rho.matrix(), omega) / beta;
  return out;
}

// Vectorization ---------------------------------------------------------------

VectorizedOperator vectorize(const CMatrix& a) {
  require_square(a, "opcore::vectorize");
  VectorizedOperator v;
  v.dim = static_cast<int>(a.rows());
  v.coordinates = a.reshaped();
  return v;
}

VectorizedOperator vectorize(const HermitianOperator& a) { return vectorize(a.matrix()); }

CMatrix devectorize(const CVector& coordinates, int dim) {
  if (coordinates.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw ValidationError("opcore::devectorize", "coordinate count " + std::to_string(coordinates.size()) +
                                                     " does not match dim^2 = " + std::to_string(dim * dim));
  }
  return coordinates.reshaped(dim, dim);
}

CMatrix devectorize(const VectorizedOperator& v) { return devectorize(v.coordinates, v.dim); }

HermitianOperator devectorize_hermitian(const VectorizedOperator& v) {
  return HermitianOperator::symmetrized(devectorize(v));
}

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  require_same_dim(static_cast<int>(a.rows()), static_cast<int>(b.rows()), "opcore::hs_inner");
  return (a.adjoint() * b).trace();
}

CMatrix SuperOperator::apply(const CMatrix& a) const {
  require_same_dim(dim, static_cast<int>(a.rows()), "opcore::SuperOperator::apply");
  const CVector out = matrix * a.reshaped();
  return out.reshaped(dim, dim);
}

SuperOperator superop_matrix(const std::function<CMatrix(const CMatrix&)>& map, int dim) {
  const int n = dim * dim;
  SuperOperator s{dim, CMatrix::Zero(n, n)};
  for (int col = 0; col < n; ++col) {
    CMatrix unit = CMatrix::Zero(dim, dim);
    unit(col % dim, col / dim) = 1.0;
    const CMatrix image = map(unit);
    require_same_dim(dim, static_cast<int>(image.rows()), "opcore::superop_matrix");
    s.matrix.col(col) = image.reshaped();
  }
  return s;
}

SuperOperator identity_superoperator(int dim) {
  return {dim, CMatrix::Identity(dim * dim, dim * dim)};
}

SuperOperator sandwich_superoperator(const CMatrix& left, const CMatrix& right) {
  // vec(A X B) = (B^T kron A) vec(X)
  const int d = static_cast<int>(left.rows());
  const CMatrix bt = right.transpose();
  CMatrix out(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = bt(i, j) * left;
  }
  return {d, out};
}

SuperOperator j_superoperator(const SpectralGibbs& omega) {
  return superop_matrix([&](const CMatrix& a) { return j_apply(omega, a); }, omega.dim());
}

std::vector<CMatrix> hermitian_basis(int dim) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(dim) * dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int l = 0; l < dim; ++l) {
    CMatrix delta = CMatrix::Zero(dim, dim);
    delta(l, l) = 1.0;
    basis.push_back(delta);
  }
  for (int l = 0; l < dim; ++l) {
    for (int m = l + 1; m < dim; ++m) {
      CMatrix sx = CMatrix::Zero(dim, dim);
      sx(l, m) = inv_sqrt2;
      sx(m, l) = inv_sqrt2;
      CMatrix sy = CMatrix::Zero(dim, dim);
      sy(l, m) = Complex(0, inv_sqrt2);
      sy(m, l) = Complex(0, -inv_sqrt2);
      basis.push_back(sx);
      basis.push_back(sy);
    }
  }
  return basis;
}

std::vector<CMatrix> traceless_basis(int dim) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(dim) * dim - 1);
  for (int k = 1; k < dim; ++k) {
    CMatrix diag = CMatrix::Zero(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int l = 0; l < k; ++l) diag(l, l) = norm;
    diag(k, k) = -k * norm;
    basis.push_back(diag);
  }
  for (const CMatrix& b : hermitian_basis(dim)) {
    if (b.diagonal().cwiseAbs().sum() == 0.0) basis.push_back(b);
  }
  return basis;
}

CMatrix traceless_isometry(int dim) {
  const std::vector<CMatrix> basis = traceless_basis(dim);
  CMatrix q(dim * dim, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) q.col(static_cast<Eigen::Index>(a)) = basis[a].reshaped();
  return q;
}

}  // namespace thermolen

#pragma once

// Thermodynamic metric induced by a Lindblad generator on the manifold of
// Gibbs states, its KMB (equilibrium) limit, derivatives and Christoffel
// symbols.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "thermolen/lindblad.hpp"
#include "thermolen/opcore.hpp"

namespace thermolen {

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool lower_open = false;
  bool upper_open = false;

  bool contains(double x) const;
};

/// Axis-aligned admissible region of parameter space.
struct Domain {
  std::vector<Interval> bounds;

  static Domain unbounded(int dim);
  int dim() const { return static_cast<int>(bounds.size()); }
  bool contains(const RVector& lambda) const;
  /// Throws DomainError naming `where` when lambda is outside.
  void require(const RVector& lambda, std::string_view where) const;
};

/// Builds the generator for a Hamiltonian at inverse temperature beta.
using DynamicsFactory = std::function<LindbladGenerator(const HermitianOperator& h, double beta)>;

/// Dynamics plugins by string key: "gibbs_mixing" (param tau) and
/// "bosonic_qubit" (param alpha).
DynamicsFactory make_dynamics(const std::string& key, const std::map<std::string, double>& params);
std::vector<std::string> dynamics_keys();

/// lambda -> (H(lambda), dH/dlambda^i, L_lambda) with inverse temperature beta.
struct ParamModel {
  std::string name;
  std::vector<std::string> param_names;
  double beta = 1.0;
  Domain domain;
  std::function<HermitianOperator(const RVector&)> hamiltonian;
  std::function<std::vector<HermitianOperator>(const RVector&)> tangent_ops;
  DynamicsFactory dynamics;
  /// H depends linearly on lambda, so beta^2 m^KMB equals the Hessian of log Z.
  bool linear_in_params = false;

  int n_params() const { return static_cast<int>(param_names.size()); }
  LindbladGenerator generator(const RVector& lambda) const;
};

/// H(lambda) = H0 + sum_i lambda^i X_i.
ParamModel linear_model(std::string name, HermitianOperator h0, std::vector<HermitianOperator> controls,
                        double beta, DynamicsFactory dynamics);

/// m(A, B) = -1/2 Tr[A L+[J[B]] + B L+[J[A]]].
double metric_bilinear(const SpectralGibbs& omega, const DrazinInverse& drazin, const HermitianOperator& a,
                       const HermitianOperator& b);

/// Full Lindblad metric m_ij = m(X_i, X_j) with X_i = dH/dlambda^i.
RMatrix metric_matrix(const ParamModel& model, const RVector& lambda);

/// Same entries assembled from the coordinate matrices of J and L+ (d^2 x d^2
/// products), an independent route used for cross-checks.
RMatrix metric_matrix_coordinates(const ParamModel& model, const RVector& lambda);

/// Generalized covariance route Tr[X_i J[X_j]] (tau = 1).
RMatrix kmb_metric(const ParamModel& model, const RVector& lambda);

/// beta^{-2} d^2 log Z / dlambda_i dlambda_j by Richardson-extrapolated central
/// differences. Valid for models linear in lambda.
RMatrix kmb_metric_from_log_z(const ParamModel& model, const RVector& lambda, double step = 1e-3);

struct KmbCrossCheck {
  RMatrix covariance;
  RMatrix log_z;
  double relative_difference = 0.0;
};

/// Both KMB routes; throws ModelConsistencyError when they differ by more than
/// `tolerance` relative to the matrix norm, ValidationError for non-linear
/// models.
KmbCrossCheck kmb_metric_cross_checked(const ParamModel& model, const RVector& lambda, double tolerance = 1e-6);

/// ((tau_i + tau_j)/2) * m^KMB_ij.
RMatrix relaxation_metric(const ParamModel& model, const RVector& lambda, const std::vector<double>& taus);

enum class MetricKind { full_lindblad, kmb, relaxation_times };
enum class CachePolicy { none, memoize };

/// lambda -> m(lambda), optionally with analytic parameter derivatives.
class MetricField {
 public:
  virtual ~MetricField() = default;
  virtual int dim() const = 0;
  virtual RMatrix metric(const RVector& lambda) const = 0;
  /// d m / d lambda^k for each k, when available in closed form.
  virtual std::optional<std::vector<RMatrix>> metric_derivatives(const RVector&) const { return std::nullopt; }
  virtual const Domain& domain() const = 0;
  virtual std::vector<std::string> param_names() const;
};

/// MetricField backed by a ParamModel. Thread-safe; the memoization cache is
/// guarded by a mutex.
class ModelMetricField final : public MetricField {
 public:
  ModelMetricField(ParamModel model, MetricKind kind, std::vector<double> taus = {},
                   CachePolicy cache = CachePolicy::none);

  int dim() const override { return model_.n_params(); }
  RMatrix metric(const RVector& lambda) const override;
  const Domain& domain() const override { return model_.domain; }
  std::vector<std::string> param_names() const override { return model_.param_names; }
  const ParamModel& model() const { return model_; }
  MetricKind kind() const { return kind_; }
  std::size_t cache_size() const;

 private:
  RMatrix evaluate(const RVector& lambda) const;

  ParamModel model_;
  MetricKind kind_;
  std::vector<double> taus_;
  CachePolicy cache_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, RMatrix> memo_;
};

/// MetricField from plain callables.
class FunctionMetricField final : public MetricField {
 public:
  using MetricFn = std::function<RMatrix(const RVector&)>;
  using DerivativeFn = std::function<std::vector<RMatrix>(const RVector&)>;

  FunctionMetricField(int dim, Domain domain, MetricFn metric, DerivativeFn derivatives = {},
                      std::vector<std::string> names = {});

  int dim() const override { return dim_; }
  RMatrix metric(const RVector& lambda) const override { return metric_(lambda); }
  std::optional<std::vector<RMatrix>> metric_derivatives(const RVector& lambda) const override;
  const Domain& domain() const override { return domain_; }
  std::vector<std::string> param_names() const override;

 private:
  int dim_;
  Domain domain_;
  MetricFn metric_;
  DerivativeFn derivatives_;
  std::vector<std::string> names_;
};

enum class DerivativeScheme { analytic, central_difference };

/// Gamma^i_jk stored as gamma[i](j, k).
struct Christoffel {
  std::vector<RMatrix> gamma;

  int dim() const { return static_cast<int>(gamma.size()); }
  /// Gamma^i_jk v^j v^k.
  RVector contract(const RVector& velocity) const;
};

/// Central-difference derivatives of m with step max(1e-5, 1e-5 |lambda_k|),
/// switching to one-sided second-order stencils next to the domain boundary.
std::vector<RMatrix> metric_derivatives_fd(const MetricField& field, const RVector& lambda,
                                           double relative_step = 1e-5);

/// Christoffel symbols from the metric and its derivatives. `analytic` uses the
/// field's closed-form derivatives (falls back to differences when absent).
class ChristoffelField {
 public:
  explicit ChristoffelField(std::shared_ptr<const MetricField> field,
                            DerivativeScheme scheme = DerivativeScheme::analytic, double relative_step = 1e-5);

  /// Throws ConditioningError when cond(m) >= 1e12, DomainError outside the
  /// field's domain.
  Christoffel operator()(const RVector& lambda) const;

  const MetricField& field() const { return *field_; }
  std::shared_ptr<const MetricField> field_ptr() const { return field_; }
  DerivativeScheme scheme() const { return scheme_; }

 private:
  std::shared_ptr<const MetricField> field_;
  DerivativeScheme scheme_;
  double relative_step_;
};

/// Christoffel symbols from m and dm (dm[k] = d m / d lambda^k).
Christoffel christoffel_from_derivatives(const RMatrix& metric, const std::vector<RMatrix>& derivatives);

struct MetricEigen {
  RVector eigenvalues;   // descending
  RMatrix eigenvectors;  // columns
  double anisotropy = 0.0;  // largest / smallest eigenvalue
};

MetricEigen metric_eigenanalysis(const MetricField& field, const RVector& lambda);

}  // namespace thermolen

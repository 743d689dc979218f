#include "thermolen/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "thermolen/errors.hpp"

namespace thermolen {
namespace {

constexpr double kConditionLimit = 1e12;

std::string format_point(const RVector& lambda) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < lambda.size(); ++i) os << (i ? ", " : "") << lambda(i);
  os << ')';
  return os.str();
}

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

RMatrix symmetrize(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

// Domains ---------------------------------------------------------------------

bool Interval::contains(double x) const {
  if (!std::isfinite(x)) return false;
  const bool above = lower_open ? x > lower : x >= lower;
  const bool below = upper_open ? x < upper : x <= upper;
  return above && below;
}

Domain Domain::unbounded(int dim) { return Domain{std::vector<Interval>(dim)}; }

bool Domain::contains(const RVector& lambda) const {
  if (lambda.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!bounds[i].contains(lambda(i))) return false;
  }
  return true;
}

void Domain::require(const RVector& lambda, std::string_view where) const {
  if (lambda.size() != dim()) {
    throw ValidationError(where, "expected " + std::to_string(dim()) + " parameters, got " +
                                     std::to_string(lambda.size()));
  }
  if (!contains(lambda)) throw DomainError(where, "parameters " + format_point(lambda) + " outside the admissible domain");
}

// Models ----------------------------------------------------------------------

DynamicsFactory make_dynamics(const std::string& key, const std::map<std::string, double>& params) {
  if (key == "gibbs_mixing") {
    const double tau = param_or(params, "tau", 1.0);
    return [tau](const HermitianOperator& h, double beta) { return gibbs_mixing(h, beta, tau); };
  }
  if (key == "bosonic_qubit") {
    const double alpha = param_or(params, "alpha", 1.0);
    return [alpha](const HermitianOperator& h, double beta) { return bosonic_qubit_generator(h, alpha, beta); };
  }
  throw ValidationError("metric::make_dynamics", "unknown dynamics plugin '" + key + "'");
}

std::vector<std::string> dynamics_keys() { return {"bosonic_qubit", "gibbs_mixing"}; }

LindbladGenerator ParamModel::generator(const RVector& lambda) const {
  domain.require(lambda, "metric::ParamModel::generator");
  return dynamics(hamiltonian(lambda), beta);
}

ParamModel linear_model(std::string name, HermitianOperator h0, std::vector<HermitianOperator> controls,
                        double beta, DynamicsFactory dynamics) {
  ParamModel model;
  model.name = std::move(name);
  model.beta = beta;
  for (std::size_t i = 0; i < controls.size(); ++i) model.param_names.push_back("lambda" + std::to_string(i + 1));
  model.domain = Domain::unbounded(static_cast<int>(controls.size()));
  model.linear_in_params = true;
  model.hamiltonian = [h0, controls](const RVector& lambda) {
    CMatrix h = h0.matrix();
    for (std::size_t i = 0; i < controls.size(); ++i) h += lambda(static_cast<Eigen::Index>(i)) * controls[i].matrix();
    return HermitianOperator::symmetrized(h);
  };
  model.tangent_ops = [controls](const RVector&) { return controls; };
  model.dynamics = std::move(dynamics);
  return model;
}

// Metric assembly -------------------------------------------------------------

double metric_bilinear(const SpectralGibbs& omega, const DrazinInverse& drazin, const HermitianOperator& a,
                       const HermitianOperator& b) {
  constexpr std::string_view where = "metric::metric_bilinear";
  if (a.dim() != omega.dim() || b.dim() != omega.dim() || drazin.superop.dim != omega.dim()) {
    throw ValidationError(where, "dimension mismatch between operators, state and Drazin inverse");
  }
  const CMatrix ya = drazin.apply(j_apply(omega, a.matrix()));
  const CMatrix yb = drazin.apply(j_apply(omega, b.matrix()));
  return -0.5 * ((a.matrix() * yb).trace() + (b.matrix() * ya).trace()).real();
}

RMatrix metric_matrix(const ParamModel& model, const RVector& lambda) {
  model.domain.require(lambda, "metric::metric_matrix");
  const LindbladGenerator gen = model.generator(lambda);
  const DrazinInverse drazin = drazin_traceless(gen);
  const SpectralGibbs& omega = gen.stationary();
  const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
  const int n = static_cast<int>(x.size());
  std::vector<CMatrix> y;
  y.reserve(n);
  for (const HermitianOperator& xi : x) y.push_back(drazin.apply(j_apply(omega, xi.matrix())));
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      m(i, j) = -0.5 * ((x[i].matrix() * y[j]).trace() + (x[j].matrix() * y[i]).trace()).real();
      m(j, i) = m(i, j);
    }
  }
  return m;
}

RMatrix metric_matrix_coordinates(const ParamModel& model, const RVector& lambda) {
  model.domain.require(lambda, "metric::metric_matrix_coordinates");
  const LindbladGenerator gen = model.generator(lambda);
  const DrazinInverse drazin = drazin_spectral(gen);
  const SuperOperator j = j_superoperator(gen.stationary());
  const CMatrix product = drazin.superop.matrix * j.matrix;
  const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
  const int n = static_cast<int>(x.size());
  std::vector<CVector> vx;
  for (const HermitianOperator& xi : x) vx.push_back(xi.matrix().reshaped());
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j2 = 0; j2 < n; ++j2) {
      m(i, j2) = -0.5 * (vx[i].dot(product * vx[j2]) + vx[j2].dot(product * vx[i])).real();
    }
  }
  return symmetrize(m);
}

RMatrix kmb_metric(const ParamModel& model, const RVector& lambda) {
  model.domain.require(lambda, "metric::kmb_metric");
  const SpectralGibbs omega = gibbs_state(model.hamiltonian(lambda), model.beta);
  const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
  const int n = static_cast<int>(x.size());
  std::vector<CMatrix> jx;
  for (const HermitianOperator& xi : x) jx.push_back(j_apply(omega, xi.matrix()));
  RMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      m(i, j) = 0.5 * ((x[i].matrix() * jx[j]).trace() + (x[j].matrix() * jx[i]).trace()).real();
      m(j, i) = m(i, j);
    }
  }
  return m;
}

RMatrix kmb_metric_from_log_z(const ParamModel& model, const RVector& lambda, double step) {
  constexpr std::string_view where = "metric::kmb_metric_from_log_z";
  const int n = model.n_params();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const double h = step * scale;
  if (!(h > 1e-8 * scale)) throw AccuracyError(where, "finite-difference step underflow");
  auto log_z = [&](const RVector& at) { return gibbs_state(model.hamiltonian(at), model.beta).log_z; };
  auto hessian = [&](double hh) {
    RMatrix out(n, n);
    const double f0 = log_z(lambda);
    for (int i = 0; i < n; ++i) {
      RVector e_i = RVector::Zero(n);
      e_i(i) = hh;
      out(i, i) = (log_z(lambda + e_i) - 2.0 * f0 + log_z(lambda - e_i)) / (hh * hh);
      for (int j = 0; j < i; ++j) {
        RVector e_j = RVector::Zero(n);
        e_j(j) = hh;
        out(i, j) = (log_z(lambda + e_i + e_j) - log_z(lambda + e_i - e_j) - log_z(lambda - e_i + e_j) +
                     log_z(lambda - e_i - e_j)) /
                    (4.0 * hh * hh);
        out(j, i) = out(i, j);
      }
    }
    return out;
  };
  const RMatrix coarse = hessian(h);
  const RMatrix fine = hessian(0.5 * h);
  return (4.0 * fine - coarse) / 3.0 / (model.beta * model.beta);
}

KmbCrossCheck kmb_metric_cross_checked(const ParamModel& model, const RVector& lambda, double tolerance) {
  constexpr std::string_view where = "metric::kmb_metric";
  if (!model.linear_in_params) {
    throw ValidationError(where, "the log Z route needs a Hamiltonian linear in the parameters");
  }
  KmbCrossCheck out;
  out.covariance = kmb_metric(model, lambda);
  out.log_z = kmb_metric_from_log_z(model, lambda);
  const double norm = std::max(out.covariance.norm(), std::numeric_limits<double>::min());
  out.relative_difference = (out.covariance - out.log_z).norm() / norm;
  if (!(out.relative_difference <= tolerance)) {
    throw ModelConsistencyError(where, "covariance and log Z routes differ by " +
                                           std::to_string(out.relative_difference));
  }
  return out;
}

RMatrix relaxation_metric(const ParamModel& model, const RVector& lambda, const std::vector<double>& taus) {
  constexpr std::string_view where = "metric::relaxation_metric";
  if (static_cast<int>(taus.size()) != model.n_params()) {
    throw ValidationError(where, "need one relaxation time per parameter, got " + std::to_string(taus.size()));
  }
  for (double tau : taus) {
    if (!(tau > 0.0)) throw DomainError(where, "relaxation times must be positive");
  }
  RMatrix m = kmb_metric(model, lambda);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) m(i, j) *= 0.5 * (taus[i] + taus[j]);
  }
  return m;
}

// Metric fields ---------------------------------------------------------------

std::vector<std::string> MetricField::param_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < dim(); ++i) names.push_back("lambda" + std::to_string(i + 1));
  return names;
}

ModelMetricField::ModelMetricField(ParamModel model, MetricKind kind, std::vector<double> taus, CachePolicy cache)
    : model_(std::move(model)), kind_(kind), taus_(std::move(taus)), cache_(cache) {
  if (kind_ == MetricKind::relaxation_times && static_cast<int>(taus_.size()) != model_.n_params()) {
    throw ValidationError("metric::MetricField", "relaxation-times metric needs one tau per parameter");
  }
}

RMatrix ModelMetricField::evaluate(const RVector& lambda) const {
  switch (kind_) {
    case MetricKind::full_lindblad:
      return metric_matrix(model_, lambda);
    case MetricKind::kmb:
      return kmb_metric(model_, lambda);
    case MetricKind::relaxation_times:
      return relaxation_metric(model_, lambda, taus_);
  }
  return {};
}

RMatrix ModelMetricField::metric(const RVector& lambda) const {
  if (cache_ == CachePolicy::none) return evaluate(lambda);
  const std::vector<double> key(lambda.data(), lambda.data() + lambda.size());
  {
    std::lock_guard lock(mutex_);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  RMatrix value = evaluate(lambda);
  std::lock_guard lock(mutex_);
  memo_.emplace(key, value);
  return value;
}

std::size_t ModelMetricField::cache_size() const {
  std::lock_guard lock(mutex_);
  return memo_.size();
}

FunctionMetricField::FunctionMetricField(int dim, Domain domain, MetricFn metric, DerivativeFn derivatives,
                                         std::vector<std::string> names)
    : dim_(dim),
      domain_(std::move(domain)),
      metric_(std::move(metric)),
      derivatives_(std::move(derivatives)),
      names_(std::move(names)) {}

std::optional<std::vector<RMatrix>> FunctionMetricField::metric_derivatives(const RVector& lambda) const {
  if (!derivatives_) return std::nullopt;
  return derivatives_(lambda);
}

std::vector<std::string> FunctionMetricField::param_names() const {
  return names_.empty() ? MetricField::param_names() : names_;
}

// Christoffel symbols ---------------------------------------------------------

RVector Christoffel::contract(const RVector& velocity) const {
  RVector out(dim());
  for (int i = 0; i < dim(); ++i) out(i) = velocity.dot(gamma[i] * velocity);
  return out;
}

std::vector<RMatrix> metric_derivatives_fd(const MetricField& field, const RVector& lambda, double relative_step) {
  const int n = field.dim();
  const Domain& domain = field.domain();
  std::vector<RMatrix> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double h = std::max(relative_step, relative_step * std::abs(lambda(k)));
    RVector plus = lambda, minus = lambda, plus2 = lambda, minus2 = lambda;
    plus(k) += h;
    minus(k) -= h;
    plus2(k) += 2.0 * h;
    minus2(k) -= 2.0 * h;
    if (domain.contains(plus) && domain.contains(minus)) {
      out.push_back((field.metric(plus) - field.metric(minus)) / (2.0 * h));
    } else if (domain.contains(plus2)) {
      out.push_back((-3.0 * field.metric(lambda) + 4.0 * field.metric(plus) - field.metric(plus2)) / (2.0 * h));
    } else if (domain.contains(minus2)) {
      out.push_back((3.0 * field.metric(lambda) - 4.0 * field.metric(minus) + field.metric(minus2)) / (2.0 * h));
    } else {
      throw DomainError("metric::christoffel", "no finite-difference stencil fits inside the domain at " +
                                                   format_point(lambda));
    }
  }
  return out;
}

Christoffel christoffel_from_derivatives(const RMatrix& metric, const std::vector<RMatrix>& derivatives) {
  constexpr std::string_view where = "metric::christoffel";
  const int n = static_cast<int>(metric.rows());
  const RMatrix m = symmetrize(metric);
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(m);
  const RVector& ev = solver.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  const double smallest = ev.cwiseAbs().minCoeff();
  if (!(smallest > 0.0) || largest / smallest >= kConditionLimit) {
    throw ConditioningError(where, "metric is near singular (condition number " +
                                       std::to_string(smallest > 0.0 ? largest / smallest : INFINITY) + ")");
  }
  const RMatrix inverse = solver.eigenvectors() * ev.cwiseInverse().asDiagonal() * solver.eigenvectors().transpose();
  // lowered(l)(j, k) = 1/2 (d_j m_lk + d_k m_jl - d_l m_jk)
  std::vector<RMatrix> lowered(n, RMatrix::Zero(n, n));
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        lowered[l](j, k) = 0.5 * (derivatives[j](l, k) + derivatives[k](j, l) - derivatives[l](j, k));
      }
    }
  }
  Christoffel out;
  out.gamma.assign(n, RMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) out.gamma[i] += inverse(i, l) * lowered[l];
    out.gamma[i] = symmetrize(out.gamma[i]);
  }
  return out;
}

ChristoffelField::ChristoffelField(std::shared_ptr<const MetricField> field, DerivativeScheme scheme,
                                   double relative_step)
    : field_(std::move(field)), scheme_(scheme), relative_step_(relative_step) {
  if (!field_) throw ValidationError("metric::ChristoffelField", "metric field is null");
}

Christoffel ChristoffelField::operator()(const RVector& lambda) const {
  field_->domain().require(lambda, "metric::christoffel");
  const RMatrix m = field_->metric(lambda);
  std::optional<std::vector<RMatrix>> dm;
  if (scheme_ == DerivativeScheme::analytic) dm = field_->metric_derivatives(lambda);
  if (!dm) dm = metric_derivatives_fd(*field_, lambda, relative_step_);
  return christoffel_from_derivatives(m, *dm);
}

MetricEigen metric_eigenanalysis(const MetricField& field, const RVector& lambda) {
  const RMatrix m = symmetrize(field.metric(lambda));
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(m);
  const int n = static_cast<int>(m.rows());
  MetricEigen out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  out.anisotropy = out.eigenvalues(n - 1) != 0.0 ? out.eigenvalues(0) / out.eigenvalues(n - 1)
                                                  : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace thermolen

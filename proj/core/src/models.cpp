#include "thermolen/models.hpp"

#include <cmath>
#include <numbers>

#include "thermolen/errors.hpp"

namespace thermolen {
namespace {

double log_2cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a));
}

double sech(double x) { return 1.0 / std::cosh(x); }

struct IsingSums {
  double f = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;  // averages of |integrand| as error scales
};

// Midpoint rule over (0, pi) with `half` nodes; the integrand is symmetric
// under k -> 2 pi - k, so this equals the 2 * half-node rule on [0, 2 pi).
IsingSums ising_sums(double g, double beta, int half, bool derivatives) {
  IsingSums out;
  const double h = std::numbers::pi / half;
  for (int j = 0; j < half; ++j) {
    const double k = (j + 0.5) * h;
    const double c = std::cos(k);
    const double q = 1.0 + g * g - 2.0 * g * c;
    const double sq = std::sqrt(q);
    const double u = beta * sq;
    out.f += log_2cosh(u);
    if (!derivatives) continue;
    const double q1 = 2.0 * (g - c);
    const double u1 = beta * q1 / (2.0 * sq);
    const double u2 = beta * (1.0 / sq - q1 * q1 / (4.0 * q * sq));
    const double u3 = beta * (-1.5 * q1 / (q * sq) + 3.0 * q1 * q1 * q1 / (8.0 * q * q * sq));
    const double t = std::tanh(u);
    const double s2 = sech(u) * sech(u);
    const double a1 = t * u1;
    const double a2 = s2 * u1 * u1 + t * u2;
    const double a3 = -2.0 * s2 * t * u1 * u1 * u1 + 3.0 * s2 * u1 * u2 + t * u3;
    out.d1 += a1;
    out.d2 += a2;
    out.d3 += a3;
    out.s1 += std::abs(a1);
    out.s2 += std::abs(s2 * u1 * u1) + std::abs(t * u2);
    out.s3 += std::abs(2.0 * s2 * t * u1 * u1 * u1) + std::abs(3.0 * s2 * u1 * u2) + std::abs(t * u3);
  }
  for (double* v : {&out.f, &out.d1, &out.d2, &out.d3, &out.s1, &out.s2, &out.s3}) *v /= half;
  return out;
}

IsingLogZ ising_integrate(double g, double beta, const IsingOptions& options, bool derivatives) {
  constexpr std::string_view where = "models::ising_log_z_density";
  if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError(where, "coupling g must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError(where, "beta must be finite and >= 0");
  if (options.nodes < 2 || options.max_nodes < options.nodes) {
    throw ValidationError(where, "invalid node counts");
  }
  int half = options.nodes / 2;
  IsingSums coarse = ising_sums(g, beta, half, derivatives);
  while (true) {
    const IsingSums fine = ising_sums(g, beta, 2 * half, derivatives);
    const double tol = options.tolerance;
    bool ok = std::abs(fine.f - coarse.f) <= tol * std::max(1.0, std::abs(fine.f));
    if (derivatives) {
      ok = ok && std::abs(fine.d1 - coarse.d1) <= tol * std::max(fine.s1, 1e-300) &&
           std::abs(fine.d2 - coarse.d2) <= tol * std::max(fine.s2, 1e-300) &&
           std::abs(fine.d3 - coarse.d3) <= tol * std::max(fine.s3, 1e-300);
    }
    if (ok || 4 * half > options.max_nodes) {
      if (!ok) warn(std::string(where) + ": node doubling reached the cap without meeting the tolerance");
      return IsingLogZ{fine.f, fine.d1, fine.d2, fine.d3, 4 * half};
    }
    coarse = fine;
    half *= 2;
  }
}

QubitEigenvalues qubit_eigen_derivatives(double x) {
  const double t = std::tanh(x);
  const double s2 = sech(x) * sech(x);
  return {s2 * s2 - 2.0 * t * t * s2, 4.0 * t * s2 / x - 2.0 * t * t / (x * x)};
}

Domain qubit_domain(QubitChart chart, const QubitOptions& o) {
  const Interval radius{o.r_min, o.r_max, false, false};
  switch (chart) {
    case QubitChart::spherical:
      return Domain{{radius, Interval{0.0, std::numbers::pi, true, true}, Interval{0.0, 2.0 * std::numbers::pi, false, true}}};
    case QubitChart::xz:
      return Domain{{radius, Interval{-std::numbers::pi, std::numbers::pi, true, true}}};
    case QubitChart::radial:
      return Domain{{radius}};
  }
  return {};
}

void check_qubit_options(const QubitOptions& o, std::string_view where) {
  if (!(o.r_min > 0.0) || !(o.r_max > o.r_min)) throw DomainError(where, "need 0 < r_min < r_max");
  if (!(o.alpha >= 0.0) || !std::isfinite(o.alpha)) throw DomainError(where, "alpha must be finite and >= 0");
  if (!(o.beta > 0.0) || !std::isfinite(o.beta)) throw DomainError(where, "beta must be finite and positive");
}

HermitianOperator bloch(double x, double y, double z) {
  return HermitianOperator::symmetrized(x * pauli_x().matrix() + y * pauli_y().matrix() + z * pauli_z().matrix());
}

}  // namespace

// Ising -----------------------------------------------------------------------

double ising_dispersion(double g, double k) { return 2.0 * std::sqrt(1.0 + g * g - 2.0 * g * std::cos(k)); }

double ising_log_z_density(double g, double beta, const IsingOptions& options) {
  return ising_integrate(g, beta, options, false).f;
}

IsingLogZ ising_log_z_derivatives(double g, double beta, const IsingOptions& options) {
  return ising_integrate(g, beta, options, true);
}

double ising_metric(double g, double beta, const IsingOptions& options) {
  if (!(beta > 0.0)) throw DomainError("models::ising_metric", "beta must be positive");
  return ising_log_z_derivatives(g, beta, options).d2 / (beta * beta);
}

double ising_christoffel(double g, double beta, const IsingOptions& options) {
  if (!(beta > 0.0)) throw DomainError("models::ising_christoffel", "beta must be positive");
  const IsingLogZ z = ising_log_z_derivatives(g, beta, options);
  return z.d3 / (2.0 * z.d2);
}

std::shared_ptr<const MetricField> ising_metric_field(double beta, const IsingOptions& options) {
  if (!(beta > 0.0)) throw DomainError("models::ising_metric_field", "beta must be positive");
  const double b2 = beta * beta;
  return std::make_shared<FunctionMetricField>(
      1, Domain{{Interval{0.0}}},
      [=](const RVector& g) {
        RMatrix m(1, 1);
        m(0, 0) = ising_log_z_derivatives(g(0), beta, options).d2 / b2;
        return m;
      },
      [=](const RVector& g) {
        RMatrix dm(1, 1);
        dm(0, 0) = ising_log_z_derivatives(g(0), beta, options).d3 / b2;
        return std::vector<RMatrix>{dm};
      },
      std::vector<std::string>{"g"});
}

// Qubit -----------------------------------------------------------------------

QubitEigenvalues qubit_eigenvalues(double x) {
  if (!(x > 0.0)) throw DomainError("models::qubit_eigenvalues", "beta r must be positive");
  const double t = std::tanh(x);
  const double s = sech(x);
  return {t * s * s, 2.0 * t * t / x};
}

ParamModel qubit_model(const QubitOptions& o) {
  check_qubit_options(o, "models::qubit_model");
  ParamModel model;
  model.name = "bosonic_qubit";
  model.param_names = {"r", "theta", "phi"};
  model.beta = o.beta;
  model.domain = qubit_domain(QubitChart::spherical, o);
  model.hamiltonian = [](const RVector& p) {
    const double r = p(0), st = std::sin(p(1)), ct = std::cos(p(1)), sp = std::sin(p(2)), cp = std::cos(p(2));
    return bloch(r * st * cp, r * st * sp, r * ct);
  };
  model.tangent_ops = [](const RVector& p) {
    const double r = p(0), st = std::sin(p(1)), ct = std::cos(p(1)), sp = std::sin(p(2)), cp = std::cos(p(2));
    return std::vector<HermitianOperator>{bloch(st * cp, st * sp, ct), bloch(r * ct * cp, r * ct * sp, -r * st),
                                          bloch(-r * st * sp, r * st * cp, 0.0)};
  };
  model.dynamics = make_dynamics("bosonic_qubit", {{"alpha", o.alpha}});
  return model;
}

ParamModel qubit_xz_model(const QubitOptions& o) {
  check_qubit_options(o, "models::qubit_xz_model");
  ParamModel model;
  model.name = "bosonic_qubit_xz";
  model.param_names = {"r", "theta"};
  model.beta = o.beta;
  model.domain = qubit_domain(QubitChart::xz, o);
  model.hamiltonian = [](const RVector& p) { return bloch(p(0) * std::sin(p(1)), 0.0, p(0) * std::cos(p(1))); };
  model.tangent_ops = [](const RVector& p) {
    const double r = p(0), st = std::sin(p(1)), ct = std::cos(p(1));
    return std::vector<HermitianOperator>{bloch(st, 0.0, ct), bloch(r * ct, 0.0, -r * st)};
  };
  model.dynamics = make_dynamics("bosonic_qubit", {{"alpha", o.alpha}});
  return model;
}

ParamModel qubit_radial_model(const QubitOptions& o, double theta, double phi) {
  check_qubit_options(o, "models::qubit_radial_model");
  const double nx = std::sin(theta) * std::cos(phi), ny = std::sin(theta) * std::sin(phi), nz = std::cos(theta);
  ParamModel model;
  model.name = "bosonic_qubit_radial";
  model.param_names = {"r"};
  model.beta = o.beta;
  model.domain = qubit_domain(QubitChart::radial, o);
  model.hamiltonian = [=](const RVector& p) { return bloch(p(0) * nx, p(0) * ny, p(0) * nz); };
  model.tangent_ops = [=](const RVector&) { return std::vector<HermitianOperator>{bloch(nx, ny, nz)}; };
  model.dynamics = make_dynamics("bosonic_qubit", {{"alpha", o.alpha}});
  return model;
}

RMatrix qubit_closed_form_metric(double r, double theta, double alpha, double beta) {
  if (!(r > 0.0)) throw DomainError("models::qubit_closed_form_metric", "r must be positive");
  const QubitEigenvalues ev = qubit_eigenvalues(beta * r);
  const double scale = std::pow(r, -alpha);
  const double st = std::sin(theta);
  RMatrix m = RMatrix::Zero(3, 3);
  m(0, 0) = scale * ev.diagonal;
  m(1, 1) = scale * r * r * ev.quantum;
  m(2, 2) = scale * r * r * st * st * ev.quantum;
  return m;
}

std::shared_ptr<const MetricField> qubit_closed_form_field(QubitChart chart, const QubitOptions& o) {
  check_qubit_options(o, "models::qubit_closed_form_field");
  const double alpha = o.alpha, beta = o.beta;
  // Radial and angular blocks and their r-derivatives.
  auto blocks = [=](double r) {
    const QubitEigenvalues ev = qubit_eigenvalues(beta * r);
    const QubitEigenvalues dev = qubit_eigen_derivatives(beta * r);
    const double scale = std::pow(r, -alpha);
    struct {
      double rr, ang, drr, dang;
    } b{scale * ev.diagonal, scale * r * r * ev.quantum,
        scale * (-alpha / r * ev.diagonal + beta * dev.diagonal),
        scale * r * r * ((2.0 - alpha) / r * ev.quantum + beta * dev.quantum)};
    return b;
  };
  switch (chart) {
    case QubitChart::spherical:
      return std::make_shared<FunctionMetricField>(
          3, qubit_domain(chart, o),
          [=](const RVector& p) { return qubit_closed_form_metric(p(0), p(1), alpha, beta); },
          [=](const RVector& p) {
            const auto b = blocks(p(0));
            const double st = std::sin(p(1)), ct = std::cos(p(1));
            std::vector<RMatrix> dm(3, RMatrix::Zero(3, 3));
            dm[0](0, 0) = b.drr;
            dm[0](1, 1) = b.dang;
            dm[0](2, 2) = b.dang * st * st;
            dm[1](2, 2) = b.ang * 2.0 * st * ct;
            return dm;
          },
          std::vector<std::string>{"r", "theta", "phi"});
    case QubitChart::xz:
      return std::make_shared<FunctionMetricField>(
          2, qubit_domain(chart, o),
          [=](const RVector& p) {
            const auto b = blocks(p(0));
            RMatrix m = RMatrix::Zero(2, 2);
            m(0, 0) = b.rr;
            m(1, 1) = b.ang;
            return m;
          },
          [=](const RVector& p) {
            const auto b = blocks(p(0));
            std::vector<RMatrix> dm(2, RMatrix::Zero(2, 2));
            dm[0](0, 0) = b.drr;
            dm[0](1, 1) = b.dang;
            return dm;
          },
          std::vector<std::string>{"r", "theta"});
    case QubitChart::radial:
      return std::make_shared<FunctionMetricField>(
          1, qubit_domain(chart, o),
          [=](const RVector& p) { return RMatrix::Constant(1, 1, blocks(p(0)).rr); },
          [=](const RVector& p) { return std::vector<RMatrix>{RMatrix::Constant(1, 1, blocks(p(0)).drr)}; },
          std::vector<std::string>{"r"});
  }
  throw ValidationError("models::qubit_closed_form_field", "unknown chart");
}

// Gibbs-mixing energy qubit ---------------------------------------------------

ParamModel energy_qubit_model(double beta, double tau) {
  ParamModel model = linear_model("energy_qubit", HermitianOperator::zero(2), {pauli_z()}, beta,
                                  make_dynamics("gibbs_mixing", {{"tau", tau}}));
  model.param_names = {"E"};
  return model;
}

double linear_action_closed_form(double e_final, double beta, double tau) {
  return tau * e_final * std::tanh(beta * e_final);
}

double geodesic_action_closed_form(double e_final, double beta, double tau) {
  const double gd = std::atan(std::sinh(beta * e_final));
  return tau * gd * gd / beta;
}

LinearVsGeodesic linear_vs_geodesic_report(double e_final, double beta, double tau) {
  constexpr std::string_view where = "models::linear_vs_geodesic_report";
  if (!std::isfinite(e_final) || e_final == 0.0) throw DomainError(where, "E_f must be finite and non-zero");
  if (!(beta > 0.0) || !(tau > 0.0)) throw DomainError(where, "beta and tau must be positive");
  auto field = std::make_shared<ModelMetricField>(energy_qubit_model(beta, tau), MetricKind::full_lindblad);
  const RVector a = RVector::Zero(1);
  const RVector b = RVector::Constant(1, e_final);
  const double w_linear = action(*field, Protocol::linear(a, b), beta);
  ChristoffelField christoffel(field, DerivativeScheme::central_difference);
  GeodesicSolution geodesic = geodesic_bvp(christoffel, a, b);
  const double w_geodesic = beta * geodesic.action;
  return LinearVsGeodesic{w_linear,
                          w_geodesic,
                          w_linear / w_geodesic,
                          linear_action_closed_form(e_final, beta, tau),
                          geodesic_action_closed_form(e_final, beta, tau),
                          std::move(geodesic)};
}

}  // namespace thermolen

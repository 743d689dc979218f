#pragma once

// Concrete systems: the transverse-field Ising chain in the thermodynamic
// limit and a qubit coupled to a bosonic bath of ohmicity alpha, with their
// closed-form references.

#include <memory>

#include "thermolen/geodesic.hpp"
#include "thermolen/metric.hpp"

namespace thermolen {

// Transverse-field Ising chain (J = 1) -----------------------------------------

struct IsingOptions {
  int nodes = 2048;          // initial uniform momentum nodes on [0, 2 pi)
  int max_nodes = 1 << 16;
  double tolerance = 1e-10;  // accepted change under node doubling
};

/// eps_k = 2 sqrt(1 + g^2 - 2 g cos k).
double ising_dispersion(double g, double k);

/// (1/2pi) int_0^{2pi} dk log[2 cosh(beta eps_k / 2)].
double ising_log_z_density(double g, double beta, const IsingOptions& options = {});

/// f = log Z density and its first three g-derivatives (analytic in eps_k).
struct IsingLogZ {
  double f = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  int nodes = 0;
};
IsingLogZ ising_log_z_derivatives(double g, double beta, const IsingOptions& options = {});

/// m(g) = beta^-2 d^2 f / dg^2 (Gibbs-mixing metric with tau = 1).
double ising_metric(double g, double beta, const IsingOptions& options = {});
/// Gamma(g) = m'(g) / (2 m(g)) from the third derivative of f.
double ising_christoffel(double g, double beta, const IsingOptions& options = {});

/// One-parameter field on g >= 0 with analytic derivative.
std::shared_ptr<const MetricField> ising_metric_field(double beta, const IsingOptions& options = {});

// Qubit in a bosonic bath -------------------------------------------------------

struct QubitEigenvalues {
  double diagonal = 0.0;  // lambda_d
  double quantum = 0.0;   // lambda_q
};

/// lambda_d(x) = tanh x / cosh^2 x, lambda_q(x) = 2 tanh^2 x / x at x = beta r.
QubitEigenvalues qubit_eigenvalues(double x);

struct QubitOptions {
  double alpha = 1.0;
  double beta = 1.0;
  double r_min = 1e-3;
  double r_max = std::numeric_limits<double>::infinity();
};

/// (r, theta, phi): H = r (sin t cos p sx + sin t sin p sy + cos t sz), with
/// bosonic-bath dynamics. Domain r in [r_min, r_max], theta in (0, pi),
/// phi in [0, 2 pi).
ParamModel qubit_model(const QubitOptions& options = {});

/// (r, theta) restricted to the xz half-plane phi = 0 with theta in (-pi, pi),
/// so x = r sin theta, z = r cos theta covers the plane without the origin.
ParamModel qubit_xz_model(const QubitOptions& options = {});

/// r only, at fixed (theta, phi).
ParamModel qubit_radial_model(const QubitOptions& options = {}, double theta = 0.0, double phi = 0.0);

/// r^-alpha diag(lambda_d, r^2 lambda_q, r^2 sin^2 theta lambda_q).
RMatrix qubit_closed_form_metric(double r, double theta, double alpha, double beta = 1.0);

enum class QubitChart { spherical, xz, radial };

/// Closed-form metric field in the chart with analytic derivatives.
std::shared_ptr<const MetricField> qubit_closed_form_field(QubitChart chart, const QubitOptions& options = {});

/// H = E sz with Gibbs-mixing dynamics (relaxation time tau), E unbounded.
ParamModel energy_qubit_model(double beta = 1.0, double tau = 1.0);

/// Closed-form first-order coefficients for E: 0 -> E_f under Gibbs mixing:
/// linear E_f tanh(beta E_f), geodesic gd(beta E_f)^2 / beta.
double linear_action_closed_form(double e_final, double beta = 1.0, double tau = 1.0);
double geodesic_action_closed_form(double e_final, double beta = 1.0, double tau = 1.0);

struct LinearVsGeodesic {
  double w_linear = 0.0;
  double w_geodesic = 0.0;
  double ratio = 0.0;
  double w_linear_closed = 0.0;
  double w_geodesic_closed = 0.0;
  GeodesicSolution geodesic;
};

/// Numerical actions of the linear and geodesic protocols for H: 0 -> E_f sz.
LinearVsGeodesic linear_vs_geodesic_report(double e_final, double beta = 1.0, double tau = 1.0);

}  // namespace thermolen

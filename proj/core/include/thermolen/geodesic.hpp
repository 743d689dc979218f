#pragma once

// Protocols on [0, 1], geodesic initial/boundary value solvers and the
// dissipation action / thermodynamic length functionals.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "thermolen/metric.hpp"

namespace thermolen {

enum class ProtocolKind { linear, geodesic, user };
std::string to_string(ProtocolKind kind);

/// Piecewise cubic Hermite curve lambda: [0, 1] -> R^d through knots with
/// prescribed values and velocities.
class Protocol {
 public:
  Protocol(std::vector<double> times, std::vector<RVector> values, std::vector<RVector> velocities,
           ProtocolKind kind = ProtocolKind::user);

  /// lambda_A + t (lambda_B - lambda_A).
  static Protocol linear(const RVector& start, const RVector& end, int n_knots = 201);
  /// Samples a user curve and its derivative on a uniform grid.
  static Protocol sampled(const std::function<RVector(double)>& value, const std::function<RVector(double)>& velocity,
                          int n_knots = 201, ProtocolKind kind = ProtocolKind::user);

  int dim() const { return static_cast<int>(values_.front().size()); }
  int knot_count() const { return static_cast<int>(times_.size()); }
  ProtocolKind kind() const { return kind_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<RVector>& values() const { return values_; }
  const std::vector<RVector>& velocities() const { return velocities_; }
  const RVector& start() const { return values_.front(); }
  const RVector& end() const { return values_.back(); }

  RVector value(double t) const;
  RVector velocity(double t) const;
  RVector acceleration(double t) const;

  /// Same curve traversed as lambda(phi(s)) with phi monotone, phi(0)=0, phi(1)=1.
  Protocol reparametrized(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                          int n_knots = 201) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> times_;
  std::vector<RVector> values_;
  std::vector<RVector> velocities_;
  ProtocolKind kind_;
};

struct IvpOptions {
  int n_knots = 201;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Treat |lambda - lambda0| beyond this as leaving the domain (runaway guard).
  double escape_radius = std::numeric_limits<double>::infinity();
  /// Coordinate speeds above this are treated as a blow-up.
  double speed_limit = std::numeric_limits<double>::infinity();
  int max_steps = 100000;
  /// Integrate the action and length alongside the curve.
  bool accumulate_action = true;
};

struct IvpDiagnostics {
  int steps = 0;
  double energy_drift = 0.0;  // max |E(t) - E(0)| / E(0), E = v^T m v
  double action = 0.0;        // integral of v^T m v, integrated with the curve
  double length = 0.0;
};

/// Integrates lambda'' + Gamma(lambda', lambda') = 0 on [0, 1] with an adaptive
/// Dormand-Prince 5(4) stepper. Throws DomainExitError when the curve leaves
/// the metric's domain.
Protocol geodesic_ivp(const ChristoffelField& christoffel, const RVector& lambda0, const RVector& v0,
                      const IvpOptions& options = {}, IvpDiagnostics* diagnostics = nullptr);

struct BvpOptions {
  IvpOptions ivp;
  double tolerance = 1e-7;     // accepted |lambda(1) - lambda_B|
  double target = 1e-10;       // Newton stops early below this
  int max_iterations = 40;
  std::vector<double> start_scales = {1.0, 0.5, 2.0, 0.25, 4.0, 0.1, 10.0};
  double fd_step = 1e-6;
  /// Shooting trials farther than escape_factor * |chord| from lambda_A are
  /// abandoned early.
  double escape_factor = 10.0;
  /// ... and so are trials whose coordinate speed exceeds speed_factor times
  /// max(|v0|, |chord|).
  double speed_factor = 1e3;
};

struct BvpDiagnostics {
  double residual = 0.0;
  int newton_iterations = 0;
  int restarts = 0;
  int ivp_steps = 0;
  double energy_drift = 0.0;
  double knot_action = 0.0;  // action() over the interpolated protocol
  RVector initial_velocity;
};

struct GeodesicSolution {
  Protocol protocol;
  double action = 0.0;  // beta-free integral of lambda' m lambda', from the integrator
  double length = 0.0;
  BvpDiagnostics diagnostics;
};

/// Shooting on the initial velocity with damped Newton steps (finite-difference
/// Jacobian) started from scaled copies of the chord. Throws ConvergenceError
/// with the best residual when every start fails.
GeodesicSolution geodesic_bvp(const ChristoffelField& christoffel, const RVector& lambda_a, const RVector& lambda_b,
                              const BvpOptions& options = {});

/// beta * integral_0^1 lambda'^T m lambda' dt. W_diss(T) ~ action / T.
double action(const MetricField& field, const Protocol& protocol, double beta = 1.0, int order = 4);

/// integral_0^1 sqrt(lambda'^T m lambda') dt.
double length(const MetricField& field, const Protocol& protocol, int order = 4);

/// v^T m v along the knots.
std::vector<double> speed_profile(const MetricField& field, const Protocol& protocol);

}  // namespace thermolen

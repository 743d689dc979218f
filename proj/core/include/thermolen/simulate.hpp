#pragma once

// Finite-time propagation of driven Lindblad dynamics and the
// work / heat / entropy bookkeeping used to validate the geometric picture.

#include <vector>

#include "thermolen/geodesic.hpp"
#include "thermolen/metric.hpp"

namespace thermolen {

struct SimulationOptions {
  double abs_tol = 1e-10;     // per-step error estimate on (rho, W)
  double initial_step = 1e-2;
  double max_step = 10.0;
  double min_step = 1e-12;
  int max_steps = 1000000;
  double positivity_tol = 1e-6;
};

struct SimulationRecord {
  double t = 0.0;             // physical time in [0, T]
  CMatrix rho;
  double work = 0.0;          // W(t) = -int_0^t Tr[rho Hdot]
  double power = 0.0;         // Tr[rho Hdot]
  double energy = 0.0;        // Tr[rho H_t]
  double entropy = 0.0;       // S(rho_t)
  double sigma_dot = 0.0;     // entropy production rate
  double entropy_production = 0.0;  // int_0^t sigma_dot
  double free_energy = 0.0;   // F(rho_t, H_t)
  double distance = 0.0;      // |rho_t - omega(H_t)|_HS
  double min_eigenvalue = 0.0;
};

struct SimulationRun {
  ParamModel model;
  Protocol protocol;
  double duration = 0.0;
  SimulationOptions options;
  std::vector<SimulationRecord> records;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double max_trace_error = 0.0;
  double min_eigenvalue = 1.0;
};

/// Integrates rho' = L_{lambda(t/T)}[rho] on [0, T] with a fourth-order Magnus
/// exponential integrator and step-doubling error control. The extracted work
/// is carried as an extra component of the state. rho0 defaults to the Gibbs
/// state at lambda(0).
SimulationRun propagate(const ParamModel& model, const Protocol& protocol, double duration,
                        const std::optional<CMatrix>& rho0 = std::nullopt, const SimulationOptions& options = {});

struct DissipationRecord {
  double work = 0.0;              // extracted work W
  double delta_free_energy = 0.0; // F_neq(end) - F_neq(start)
  double dissipated = 0.0;        // -(W + dF)
  double prediction = 0.0;        // action / T, when a metric is supplied
  double heat = 0.0;              // Q = dU + W
  double delta_energy = 0.0;
  double delta_entropy = 0.0;
  double entropy_production = 0.0;  // int sigma_dot dt
  double heat_identity_residual = 0.0;  // beta Q - dS + int sigma_dot
  RVector start_velocity;
  RVector end_velocity;
};

DissipationRecord work_accounting(const SimulationRun& run, const MetricField* prediction_field = nullptr);

/// rho_t to order n in 1/T: sum_{k <= n} (L+ d/dt)^k omega(lambda_t) at s = t/T.
CMatrix slow_driving_state(const ParamModel& model, const Protocol& protocol, double duration, double s, int order,
                           double fd_step = 1e-4);

/// beta^-1 sum_i S(omega(lambda_i) || omega(lambda_{i+1})).
double discrete_protocol_dissipation(const ParamModel& model, const std::vector<RVector>& lambda_steps);

/// N + 1 equally spaced points of a protocol (N steps).
std::vector<RVector> discretize(const Protocol& protocol, int n_steps);

struct EntropyRatePoint {
  double t = 0.0;
  double sigma_dot = 0.0;
};

std::vector<EntropyRatePoint> entropy_rate_trace(const SimulationRun& run);

/// beta^2 Tr[Hdot L+ J Hdot] with Hdot = dH/ds / T: the leading-order entropy
/// production rate at s.
double slow_driving_entropy_rate(const ParamModel& model, const Protocol& protocol, double duration, double s);

}  // namespace thermolen

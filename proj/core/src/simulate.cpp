#include "thermolen/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "thermolen/errors.hpp"

namespace thermolen {
namespace {

struct Drive {
  LindbladGenerator generator;
  HermitianOperator h;
  CMatrix hdot;
};

// Instantaneous generator, Hamiltonian and dH/dt at physical time t.
Drive drive_at(const ParamModel& model, const Protocol& protocol, double duration, double t) {
  const double s = std::clamp(t / duration, 0.0, 1.0);
  const RVector lambda = protocol.value(s);
  const RVector v = protocol.velocity(s);
  const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
  CMatrix hdot = CMatrix::Zero(x.front().dim(), x.front().dim());
  for (std::size_t i = 0; i < x.size(); ++i) hdot += (v(static_cast<Eigen::Index>(i)) / duration) * x[i].matrix();
  return Drive{model.generator(lambda), model.hamiltonian(lambda), hdot};
}

// d/dt (vec rho, W) = A (vec rho, W) with W' = -Tr[rho Hdot].
CMatrix augmented(const Drive& drive) {
  const int n = drive.generator.superoperator().dim * drive.generator.superoperator().dim;
  CMatrix a = CMatrix::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = drive.generator.superoperator().matrix;
  a.row(n).head(n) = -CMatrix(drive.hdot.transpose()).reshaped().transpose();
  return a;
}

CVector magnus_step(const ParamModel& model, const Protocol& protocol, double duration, double t, double h,
                    const CVector& y) {
  static const double c = std::sqrt(3.0) / 6.0;
  const CMatrix a1 = augmented(drive_at(model, protocol, duration, t + (0.5 - c) * h));
  const CMatrix a2 = augmented(drive_at(model, protocol, duration, t + (0.5 + c) * h));
  const CMatrix omega = 0.5 * h * (a1 + a2) + (std::sqrt(3.0) / 12.0) * h * h * (a2 * a1 - a1 * a2);
  return omega.exp() * y;
}

SimulationRecord make_record(const ParamModel& model, const Protocol& protocol, double duration, double t,
                             const CVector& y, int d) {
  const Drive drive = drive_at(model, protocol, duration, t);
  SimulationRecord rec;
  rec.t = t;
  const CMatrix raw = y.head(d * d).reshaped(d, d);
  rec.rho = 0.5 * (raw + raw.adjoint());
  rec.work = y(d * d).real();
  rec.power = (rec.rho * drive.hdot).trace().real();
  rec.energy = (rec.rho * drive.h.matrix()).trace().real();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rec.rho, Eigen::EigenvaluesOnly);
  rec.min_eigenvalue = solver.eigenvalues().minCoeff();
  rec.entropy = von_neumann_entropy(rec.rho);
  const double beta = drive.generator.beta();
  rec.free_energy = rec.energy - rec.entropy / beta;
  rec.distance = (rec.rho - drive.generator.stationary().density()).norm();
  rec.sigma_dot = entropy_production_rate(drive.generator, rec.rho);
  return rec;
}

}  // namespace

SimulationRun propagate(const ParamModel& model, const Protocol& protocol, double duration,
                        const std::optional<CMatrix>& rho0, const SimulationOptions& options) {
  constexpr std::string_view where = "simulate::propagate";
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError(where, "duration T must be positive");
  if (protocol.dim() != model.n_params()) throw ValidationError(where, "protocol dimension does not match the model");
  const int d = model.hamiltonian(protocol.start()).dim();
  CMatrix initial = rho0 ? *rho0 : gibbs_state(model.hamiltonian(protocol.start()), model.beta).density();
  DensityMatrix(initial, 1e-10, 1e-10);  // validates

  SimulationRun run{model, protocol, duration, options, {}, 0, 0, 0.0, 1.0};
  CVector y(d * d + 1);
  y.head(d * d) = initial.reshaped();
  y(d * d) = 0.0;
  run.records.push_back(make_record(model, protocol, duration, 0.0, y, d));
  run.min_eigenvalue = run.records.back().min_eigenvalue;

  double t = 0.0;
  double h = std::min(options.initial_step, duration);
  while (t < duration) {
    if (run.accepted_steps + run.rejected_steps >= options.max_steps) {
      throw IntegratorError(where, "step budget exhausted at t = " + std::to_string(t));
    }
    if (t + h > duration || duration - (t + h) < 1e-12 * duration) h = duration - t;
    const CVector full = magnus_step(model, protocol, duration, t, h, y);
    const CVector mid = magnus_step(model, protocol, duration, t, 0.5 * h, y);
    const CVector two = magnus_step(model, protocol, duration, t + 0.5 * h, 0.5 * h, mid);
    const double err = (two - full).cwiseAbs().maxCoeff() / 15.0;
    const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(options.abs_tol / err, 0.2), 0.2, 4.0) : 4.0;
    if (err > options.abs_tol && h > options.min_step) {
      ++run.rejected_steps;
      h = std::max(h * factor, options.min_step);
      continue;
    }
    const SimulationRecord mid_rec = make_record(model, protocol, duration, t + 0.5 * h, mid, d);
    SimulationRecord rec = make_record(model, protocol, duration, t + h, two, d);
    const SimulationRecord& prev = run.records.back();
    rec.entropy_production =
        prev.entropy_production + h / 6.0 * (prev.sigma_dot + 4.0 * mid_rec.sigma_dot + rec.sigma_dot);
    const double trace_error = std::abs(rec.rho.trace() - 1.0);
    run.max_trace_error = std::max(run.max_trace_error, trace_error);
    run.min_eigenvalue = std::min({run.min_eigenvalue, rec.min_eigenvalue, mid_rec.min_eigenvalue});
    if (rec.min_eigenvalue < -options.positivity_tol) {
      throw IntegratorError(where, "positivity lost at t = " + std::to_string(rec.t) + " (min eigenvalue " +
                                       std::to_string(rec.min_eigenvalue) + ")");
    }
    if (trace_error > options.positivity_tol) {
      throw IntegratorError(where, "trace drifted by " + std::to_string(trace_error));
    }
    y = two;
    t = (h == duration - t) ? duration : t + h;
    rec.t = t;
    run.records.push_back(std::move(rec));
    ++run.accepted_steps;
    h = std::min(h * factor, options.max_step);
  }
  return run;
}

DissipationRecord work_accounting(const SimulationRun& run, const MetricField* prediction_field) {
  if (run.records.size() < 2) throw ValidationError("simulate::work_accounting", "run has no steps");
  const SimulationRecord& first = run.records.front();
  const SimulationRecord& last = run.records.back();
  const double beta = run.model.beta;
  DissipationRecord out;
  out.work = last.work;
  out.delta_free_energy = last.free_energy - first.free_energy;
  out.dissipated = -(out.work + out.delta_free_energy);
  out.delta_energy = last.energy - first.energy;
  out.heat = out.delta_energy + out.work;
  out.delta_entropy = last.entropy - first.entropy;
  out.entropy_production = last.entropy_production;
  out.heat_identity_residual = beta * out.heat - out.delta_entropy + out.entropy_production;
  if (prediction_field) out.prediction = action(*prediction_field, run.protocol, beta) / run.duration;
  out.start_velocity = run.protocol.velocities().front();
  out.end_velocity = run.protocol.velocities().back();
  return out;
}

CMatrix slow_driving_state(const ParamModel& model, const Protocol& protocol, double duration, double s, int order,
                           double fd_step) {
  constexpr std::string_view where = "simulate::slow_driving_state";
  if (order < 0 || order > 2) throw ValidationError(where, "order must be 0, 1 or 2");
  if (!(duration > 0.0)) throw DomainError(where, "duration T must be positive");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError(where, "s must lie in [0, 1]");
  const double beta = model.beta;

  auto first_order = [&](double at, const DrazinInverse* drazin_in) {
    const RVector lambda = protocol.value(at);
    const RVector v = protocol.velocity(at);
    const LindbladGenerator gen = model.generator(lambda);
    const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
    CMatrix hdot = CMatrix::Zero(gen.dim(), gen.dim());
    for (std::size_t i = 0; i < x.size(); ++i) hdot += (v(static_cast<Eigen::Index>(i)) / duration) * x[i].matrix();
    const DrazinInverse drazin = drazin_in ? *drazin_in : drazin_traceless(gen);
    return CMatrix(drazin.apply(-beta * j_apply(gen.stationary(), hdot)));
  };

  const LindbladGenerator gen = model.generator(protocol.value(s));
  CMatrix rho = gen.stationary().density();
  if (order == 0) return rho;
  const DrazinInverse drazin = drazin_traceless(gen);
  rho += first_order(s, &drazin);
  if (order == 2) {
    const double h = fd_step;
    CMatrix derivative;
    if (s - h >= 0.0 && s + h <= 1.0) {
      derivative = (first_order(s + h, nullptr) - first_order(s - h, nullptr)) / (2.0 * h);
    } else if (s + 2.0 * h <= 1.0) {
      derivative = (-3.0 * first_order(s, &drazin) + 4.0 * first_order(s + h, nullptr) -
                    first_order(s + 2.0 * h, nullptr)) / (2.0 * h);
    } else {
      derivative = (3.0 * first_order(s, &drazin) - 4.0 * first_order(s - h, nullptr) +
                    first_order(s - 2.0 * h, nullptr)) / (2.0 * h);
    }
    rho += drazin.apply(derivative / duration);
  }
  return 0.5 * (rho + rho.adjoint());
}

double discrete_protocol_dissipation(const ParamModel& model, const std::vector<RVector>& lambda_steps) {
  if (lambda_steps.empty()) throw ValidationError("simulate::discrete_protocol_dissipation", "no parameter points");
  double sum = 0.0;
  SpectralGibbs previous = gibbs_state(model.hamiltonian(lambda_steps.front()), model.beta);
  for (std::size_t i = 1; i < lambda_steps.size(); ++i) {
    SpectralGibbs next = gibbs_state(model.hamiltonian(lambda_steps[i]), model.beta);
    sum += relative_entropy(previous.density(), next);
    previous = std::move(next);
  }
  return sum / model.beta;
}

std::vector<RVector> discretize(const Protocol& protocol, int n_steps) {
  if (n_steps < 1) throw ValidationError("simulate::discretize", "need at least one step");
  std::vector<RVector> out;
  for (int i = 0; i <= n_steps; ++i) out.push_back(protocol.value(static_cast<double>(i) / n_steps));
  return out;
}

std::vector<EntropyRatePoint> entropy_rate_trace(const SimulationRun& run) {
  std::vector<EntropyRatePoint> out;
  out.reserve(run.records.size());
  for (const SimulationRecord& rec : run.records) out.push_back({rec.t, rec.sigma_dot});
  return out;
}

double slow_driving_entropy_rate(const ParamModel& model, const Protocol& protocol, double duration, double s) {
  const RVector lambda = protocol.value(s);
  const RVector v = protocol.velocity(s) / duration;
  const LindbladGenerator gen = model.generator(lambda);
  const std::vector<HermitianOperator> x = model.tangent_ops(lambda);
  CMatrix hdot = CMatrix::Zero(gen.dim(), gen.dim());
  for (std::size_t i = 0; i < x.size(); ++i) hdot += v(static_cast<Eigen::Index>(i)) * x[i].matrix();
  const DrazinInverse drazin = drazin_traceless(gen);
  const CMatrix y = drazin.apply(j_apply(gen.stationary(), hdot));
  return -model.beta * model.beta * (hdot * y).trace().real();
}

}  // namespace thermolen

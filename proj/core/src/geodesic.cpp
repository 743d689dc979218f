#include "thermolen/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/QR>
#include <boost/numeric/odeint.hpp>

#include "thermolen/errors.hpp"
#include "thermolen/quadrature.hpp"

namespace thermolen {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

std::vector<double> uniform_times(int n_knots) {
  if (n_knots < 2) throw ValidationError("geodesic::Protocol", "need at least two knots");
  std::vector<double> t(n_knots);
  for (int k = 0; k < n_knots; ++k) t[k] = static_cast<double>(k) / (n_knots - 1);
  t.back() = 1.0;
  return t;
}

// Applies f(t, lambda, lambda') at Gauss nodes of every knot interval.
template <class F>
double integrate_over_knots(const Protocol& protocol, int order, F&& f) {
  const GaussLegendreRule& rule = gauss_legendre(order);
  const auto& times = protocol.times();
  double sum = 0.0;
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double a = times[s];
    const double h = times[s + 1] - a;
    double panel = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = a + 0.5 * h * (rule.nodes[k] + 1.0);
      panel += rule.weights[k] * f(protocol.value(t), protocol.velocity(t));
    }
    sum += 0.5 * h * panel;
  }
  return sum;
}

}  // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::linear:
      return "linear";
    case ProtocolKind::geodesic:
      return "geodesic";
    case ProtocolKind::user:
      return "user";
  }
  return "user";
}

// Protocol --------------------------------------------------------------------

Protocol::Protocol(std::vector<double> times, std::vector<RVector> values, std::vector<RVector> velocities,
                   ProtocolKind kind)
    : times_(std::move(times)), values_(std::move(values)), velocities_(std::move(velocities)), kind_(kind) {
  constexpr std::string_view where = "geodesic::Protocol";
  if (times_.size() < 2 || values_.size() != times_.size() || velocities_.size() != times_.size()) {
    throw ValidationError(where, "knot times, values and velocities must have equal length >= 2");
  }
  if (std::abs(times_.front()) > 1e-12 || std::abs(times_.back() - 1.0) > 1e-12) {
    throw ValidationError(where, "knots must span [0, 1]");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw ValidationError(where, "knot times must increase strictly");
  }
  const auto d = values_.front().size();
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (values_[k].size() != d || velocities_[k].size() != d || !values_[k].allFinite() ||
        !velocities_[k].allFinite()) {
      throw ValidationError(where, "knot " + std::to_string(k) + " has wrong size or non-finite entries");
    }
  }
}

Protocol Protocol::linear(const RVector& start, const RVector& end, int n_knots) {
  if (start.size() != end.size()) throw ValidationError("geodesic::Protocol::linear", "endpoint size mismatch");
  const std::vector<double> t = uniform_times(n_knots);
  const RVector chord = end - start;
  std::vector<RVector> values, velocities;
  for (double tk : t) {
    values.push_back(start + tk * chord);
    velocities.push_back(chord);
  }
  values.back() = end;
  return Protocol(t, std::move(values), std::move(velocities), ProtocolKind::linear);
}

Protocol Protocol::sampled(const std::function<RVector(double)>& value,
                           const std::function<RVector(double)>& velocity, int n_knots, ProtocolKind kind) {
  const std::vector<double> t = uniform_times(n_knots);
  std::vector<RVector> values, velocities;
  for (double tk : t) {
    values.push_back(value(tk));
    velocities.push_back(velocity(tk));
  }
  return Protocol(t, std::move(values), std::move(velocities), kind);
}

std::size_t Protocol::segment(double t) const {
  if (!(t >= -1e-12 && t <= 1.0 + 1e-12)) {
    throw DomainError("geodesic::Protocol", "time " + std::to_string(t) + " outside [0, 1]");
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, times_.size() - 2);
}

RVector Protocol::value(double t) const {
  const std::size_t s = segment(t);
  const double h = times_[s + 1] - times_[s];
  const double u = std::clamp((t - times_[s]) / h, 0.0, 1.0);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * values_[s] + (u3 - 2 * u2 + u) * h * velocities_[s] +
         (-2 * u3 + 3 * u2) * values_[s + 1] + (u3 - u2) * h * velocities_[s + 1];
}

RVector Protocol::velocity(double t) const {
  const std::size_t s = segment(t);
  const double h = times_[s + 1] - times_[s];
  const double u = std::clamp((t - times_[s]) / h, 0.0, 1.0);
  const double u2 = u * u;
  return (6 * u2 - 6 * u) / h * values_[s] + (3 * u2 - 4 * u + 1) * velocities_[s] +
         (-6 * u2 + 6 * u) / h * values_[s + 1] + (3 * u2 - 2 * u) * velocities_[s + 1];
}

RVector Protocol::acceleration(double t) const {
  const std::size_t s = segment(t);
  const double h = times_[s + 1] - times_[s];
  const double u = std::clamp((t - times_[s]) / h, 0.0, 1.0);
  return (12 * u - 6) / (h * h) * values_[s] + (6 * u - 4) / h * velocities_[s] +
         (-12 * u + 6) / (h * h) * values_[s + 1] + (6 * u - 2) / h * velocities_[s + 1];
}

Protocol Protocol::reparametrized(const std::function<double(double)>& phi,
                                  const std::function<double(double)>& dphi, int n_knots) const {
  return sampled([&](double s) { return value(std::clamp(phi(s), 0.0, 1.0)); },
                 [&](double s) { return RVector(velocity(std::clamp(phi(s), 0.0, 1.0)) * dphi(s)); }, n_knots, kind_);
}

// Initial value problem -------------------------------------------------------

Protocol geodesic_ivp(const ChristoffelField& christoffel, const RVector& lambda0, const RVector& v0,
                      const IvpOptions& options, IvpDiagnostics* diagnostics) {
  constexpr std::string_view where = "geodesic::geodesic_ivp";
  const MetricField& field = christoffel.field();
  const int d = field.dim();
  if (lambda0.size() != d || v0.size() != d) throw ValidationError(where, "initial data has wrong dimension");
  if (!v0.allFinite()) throw ValidationError(where, "initial velocity is not finite");
  field.domain().require(lambda0, where);

  long evaluations = 0;
  auto rhs = [&](const State& x, State& dxdt, double t) {
    const RVector lambda = Eigen::Map<const RVector>(x.data(), d);
    const RVector v = Eigen::Map<const RVector>(x.data() + d, d);
    if (!lambda.allFinite() || !field.domain().contains(lambda) ||
        (lambda - lambda0).norm() > options.escape_radius || v.norm() > options.speed_limit) {
      throw DomainExitError(where, "trajectory left the domain near t = " + std::to_string(t), t);
    }
    if (++evaluations > 6 * options.max_steps) {
      throw IntegratorError(where, "step budget exhausted near t = " + std::to_string(t));
    }
    const RVector acc = -christoffel(lambda).contract(v);
    for (int i = 0; i < d; ++i) {
      dxdt[i] = v(i);
      dxdt[d + i] = acc(i);
    }
    if (options.accumulate_action) {
      const double e = v.dot(field.metric(lambda) * v);
      dxdt[2 * d] = e;
      dxdt[2 * d + 1] = std::sqrt(std::max(e, 0.0));
    }
  };

  const std::vector<double> times = uniform_times(options.n_knots);
  std::vector<RVector> values, velocities;
  auto observer = [&](const State& x, double) {
    values.push_back(Eigen::Map<const RVector>(x.data(), d));
    velocities.push_back(Eigen::Map<const RVector>(x.data() + d, d));
  };
  State x(options.accumulate_action ? 2 * d + 2 : 2 * d, 0.0);
  for (int i = 0; i < d; ++i) {
    x[i] = lambda0(i);
    x[d + i] = v0(i);
  }
  const State x0 = x;
  auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
  std::size_t steps = 0;
  try {
    steps = odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, observer);
  } catch (const DomainExitError&) {
    // Adaptive stages can land far past the boundary; re-run the last step with
    // fine fixed steps from the last accepted state to locate the exit.
    const bool started = stepper.current_state().size() == x0.size();
    const double t0 = started ? stepper.current_time() : 0.0;
    const double span = started ? std::min(stepper.current_time_step(), 1.0 - t0) : 1.0;
    const double h = std::max(span, 1e-12) / 256.0;
    State y = started ? stepper.current_state() : x0;
    odeint::runge_kutta4<State> fine;
    try {
      for (double t = t0; t < 1.0 + h; t += h) fine.do_step(rhs, y, t, h);
    } catch (const DomainExitError&) {
      throw;
    } catch (const Error&) {
    }
    throw;
  } catch (const DomainError& e) {
    throw DomainExitError(where, e.what(), std::numeric_limits<double>::quiet_NaN());
  } catch (const Error&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw IntegratorError(where, std::string("step control failed: ") + e.what());
  }
  for (const RVector& lambda : values) {
    if (!field.domain().contains(lambda)) {
      throw DomainExitError(where, "trajectory left the domain", 1.0);
    }
  }
  Protocol protocol(times, std::move(values), std::move(velocities), ProtocolKind::geodesic);
  if (diagnostics) {
    diagnostics->steps = static_cast<int>(steps);
    if (options.accumulate_action) {
      diagnostics->action = x[2 * d];
      diagnostics->length = x[2 * d + 1];
    }
    const std::vector<double> energy = speed_profile(field, protocol);
    double drift = 0.0;
    for (double e : energy) drift = std::max(drift, std::abs(e - energy.front()));
    diagnostics->energy_drift = energy.front() > 0.0 ? drift / energy.front() : drift;
  }
  return protocol;
}

// Boundary value problem ------------------------------------------------------

GeodesicSolution geodesic_bvp(const ChristoffelField& christoffel, const RVector& lambda_a, const RVector& lambda_b,
                              const BvpOptions& options) {
  constexpr std::string_view where = "geodesic::geodesic_bvp";
  const MetricField& field = christoffel.field();
  const int d = field.dim();
  if (lambda_a.size() != d || lambda_b.size() != d) throw ValidationError(where, "endpoints have wrong dimension");
  field.domain().require(lambda_a, where);
  field.domain().require(lambda_b, where);

  const RVector chord = lambda_b - lambda_a;
  BvpOptions trial_options = options;
  trial_options.ivp.accumulate_action = false;
  trial_options.ivp.escape_radius = std::min(options.ivp.escape_radius, options.escape_factor * chord.norm());
  double best_residual = std::numeric_limits<double>::infinity();
  int restarts = 0;

  // Returns lambda(1) - lambda_B, or nullopt when the trajectory exits.
  auto shoot = [&](const RVector& v) -> std::optional<RVector> {
    try {
      IvpOptions ivp = trial_options.ivp;
      ivp.speed_limit = std::min(ivp.speed_limit, options.speed_factor * std::max(v.norm(), chord.norm()));
      const Protocol p = geodesic_ivp(christoffel, lambda_a, v, ivp);
      return RVector(p.end() - lambda_b);
    } catch (const ValidationError&) {
      throw;
    } catch (const Error&) {
      // Exits, blow-ups and ill-conditioned metrics mark this start as failed.
      return std::nullopt;
    }
  };

  if (chord.norm() == 0.0) {
    GeodesicSolution out{Protocol::linear(lambda_a, lambda_b, options.ivp.n_knots), 0.0, 0.0, {}};
    out.diagnostics.initial_velocity = RVector::Zero(d);
    return out;
  }

  for (double scale : options.start_scales) {
    RVector v = scale * chord;
    std::optional<RVector> f = shoot(v);
    if (!f) {
      ++restarts;
      continue;
    }
    double res = f->norm();
    int iter = 0;
    for (; iter < options.max_iterations && res > options.target; ++iter) {
      RMatrix jac(d, d);
      bool ok = true;
      for (int j = 0; j < d && ok; ++j) {
        const double h = options.fd_step * std::max(1.0, std::abs(v(j)));
        RVector vp = v;
        vp(j) += h;
        std::optional<RVector> fp = shoot(vp);
        if (!fp) {
          vp(j) = v(j) - h;
          fp = shoot(vp);
          if (!fp) {
            ok = false;
            break;
          }
          jac.col(j) = (*f - *fp) / h;
        } else {
          jac.col(j) = (*fp - *f) / h;
        }
      }
      if (!ok) break;
      const RVector delta = -jac.colPivHouseholderQr().solve(*f);
      if (!delta.allFinite()) break;
      double damping = 1.0;
      bool improved = false;
      for (int halving = 0; halving < 12; ++halving, damping *= 0.5) {
        const RVector trial = v + damping * delta;
        std::optional<RVector> ft = shoot(trial);
        if (ft && ft->norm() < res) {
          v = trial;
          f = ft;
          res = ft->norm();
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    best_residual = std::min(best_residual, res);
    if (res <= options.tolerance) {
      IvpDiagnostics ivp_diag;
      IvpOptions final_ivp = options.ivp;
      final_ivp.accumulate_action = true;
      Protocol p = geodesic_ivp(christoffel, lambda_a, v, final_ivp, &ivp_diag);
      std::vector<RVector> values = p.values();
      values.back() = lambda_b;
      Protocol snapped(p.times(), std::move(values), p.velocities(), ProtocolKind::geodesic);
      GeodesicSolution out{std::move(snapped), 0.0, 0.0, {}};
      out.action = ivp_diag.action;
      out.length = ivp_diag.length;
      out.diagnostics.knot_action = action(field, out.protocol);
      out.diagnostics.residual = res;
      out.diagnostics.newton_iterations = iter;
      out.diagnostics.restarts = restarts;
      out.diagnostics.ivp_steps = ivp_diag.steps;
      out.diagnostics.energy_drift = ivp_diag.energy_drift;
      out.diagnostics.initial_velocity = v;
      return out;
    }
    ++restarts;
  }
  throw ConvergenceError(where, "shooting did not converge after " + std::to_string(restarts) + " starts",
                         best_residual);
}

// Functionals -----------------------------------------------------------------

double action(const MetricField& field, const Protocol& protocol, double beta, int order) {
  if (protocol.dim() != field.dim()) throw ValidationError("geodesic::action", "protocol dimension mismatch");
  for (const RVector& lambda : protocol.values()) field.domain().require(lambda, "geodesic::action");
  return beta * integrate_over_knots(protocol, order, [&](const RVector& lambda, const RVector& v) {
           return v.dot(field.metric(lambda) * v);
         });
}

double length(const MetricField& field, const Protocol& protocol, int order) {
  if (protocol.dim() != field.dim()) throw ValidationError("geodesic::length", "protocol dimension mismatch");
  for (const RVector& lambda : protocol.values()) field.domain().require(lambda, "geodesic::length");
  return integrate_over_knots(protocol, order, [&](const RVector& lambda, const RVector& v) {
    return std::sqrt(std::max(0.0, v.dot(field.metric(lambda) * v)));
  });
}

std::vector<double> speed_profile(const MetricField& field, const Protocol& protocol) {
  std::vector<double> out;
  out.reserve(protocol.knot_count());
  for (int k = 0; k < protocol.knot_count(); ++k) {
    out.push_back(protocol.velocities()[k].dot(field.metric(protocol.values()[k]) * protocol.velocities()[k]));
  }
  return out;
}

}  // namespace thermolen

#include "commands.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>

#include "thermolen/errors.hpp"
#include "thermolen/models.hpp"
#include "thermolen/simulate.hpp"

namespace thermolen::cli {
namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void config_error(const std::string& what) { throw ValidationError("cli::config", what); }

std::string tag(const std::string& name, double value) { return name + "=" + format_double(value); }

// Model selection --------------------------------------------------------------

struct ModelSpec {
  std::string name;
  double beta = 1.0;
  double alpha = 1.0;
  double tau = 1.0;
  std::string chart;
  double r_min = 1e-3;
};

ModelSpec model_spec(const RunConfig& c, const std::string& default_name, const std::string& default_chart) {
  ModelSpec m;
  m.name = c.text("/model/name", default_name);
  m.beta = c.number("/model/beta", 1.0);
  m.alpha = c.number("/model/alpha", 1.0);
  m.tau = c.number("/model/tau", 1.0);
  m.chart = c.text("/model/chart", default_chart);
  m.r_min = c.number("/model/r_min", 1e-3);
  if (m.name == "bosonic_qubit" && m.beta != 1.0) {
    config_error("/model/beta: bosonic_qubit energies are measured in units of 1/beta; omit beta or set it to 1");
  }
  return m;
}

QubitOptions qubit_options(const ModelSpec& m, double alpha) {
  QubitOptions o;
  o.alpha = alpha;
  o.r_min = m.r_min;
  return o;
}

QubitChart chart_of(const std::string& name) {
  if (name == "spherical") return QubitChart::spherical;
  if (name == "xz") return QubitChart::xz;
  return QubitChart::radial;
}

ParamModel qubit_param_model(const ModelSpec& m, double alpha) {
  const QubitOptions o = qubit_options(m, alpha);
  if (m.chart == "spherical") return qubit_model(o);
  if (m.chart == "xz") return qubit_xz_model(o);
  return qubit_radial_model(o);
}

std::vector<std::string> qubit_coordinate_headers(const std::string& chart) {
  if (chart == "spherical") return {"r[beta^-1]", "theta[rad]", "phi[rad]"};
  if (chart == "xz") return {"r[beta^-1]", "theta[rad]"};
  return {"r[beta^-1]"};
}

std::vector<double> alphas(const RunConfig& c, const ModelSpec& m) { return c.numbers("/grid/alpha", {m.alpha}); }
std::vector<double> betas(const RunConfig& c, const ModelSpec& m) { return c.numbers("/grid/beta", {m.beta}); }

IsingOptions ising_options() { return IsingOptions{}; }

std::vector<RVector> qubit_grid(const RunConfig& c, const std::string& chart) {
  const std::vector<double> rs = c.range("/grid/r", "0.1:5:50");
  const std::vector<double> thetas = c.range("/grid/theta", chart == "xz" ? "-3:3:13" : "0.15707963267948966:2.9845130209103035:10");
  std::vector<RVector> pts;
  for (double r : rs) {
    if (chart == "radial") {
      pts.push_back(RVector::Constant(1, r));
      continue;
    }
    for (double th : thetas) {
      if (chart == "xz") {
        pts.push_back((RVector(2) << r, th).finished());
      } else {
        pts.push_back((RVector(3) << r, th, 0.0).finished());
      }
    }
  }
  return pts;
}

// metric -------------------------------------------------------------------------

Json cmd_metric(const RunConfig& c, int jobs, ArtifactWriter& out) {
  const ModelSpec m = model_spec(c, "ising", "spherical");
  Table table;
  double min_eig = 1e300, max_asym = 0.0, max_closed_dev = 0.0;

  if (m.name == "ising") {
    const std::vector<double> bs = betas(c, m);
    const std::vector<double> gs = c.range("/grid/g", "0:5:201");
    table.header = {"g[J]"};
    for (double b : bs) table.header.push_back("m(" + tag("beta", b) + ")[tau]");
    std::vector<double> values(gs.size() * bs.size());
    parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
      values[i] = ising_metric(gs[i / bs.size()], bs[i % bs.size()], ising_options());
    });
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
      std::vector<double> row = {gs[gi]};
      for (std::size_t bi = 0; bi < bs.size(); ++bi) {
        row.push_back(values[gi * bs.size() + bi]);
        min_eig = std::min(min_eig, row.back());
      }
      table.add(row);
    }
  } else if (m.name == "bosonic_qubit") {
    const std::vector<double> as = alphas(c, m);
    const std::vector<RVector> pts = qubit_grid(c, m.chart);
    const int d = static_cast<int>(pts.front().size());
    table.header = {"alpha[1]"};
    for (const std::string& h : qubit_coordinate_headers(m.chart)) table.header.push_back(h);
    const std::vector<std::string> names = qubit_coordinate_headers(m.chart);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) table.header.push_back("m_" + std::to_string(i + 1) + std::to_string(j + 1) + "[gamma0^-1 coords]");
    for (int i = 0; i < d; ++i) table.header.push_back("eig" + std::to_string(i + 1) + "[gamma0^-1 coords]");
    table.header.push_back("closed_form_dev[1]");
    struct Item {
      RMatrix metric;
      RVector eig;
      double dev;
    };
    std::vector<Item> items(as.size() * pts.size());
    parallel_for(static_cast<int>(items.size()), jobs, [&](int k) {
      const double alpha = as[k / pts.size()];
      const RVector& x = pts[k % pts.size()];
      const ParamModel model = qubit_param_model(m, alpha);
      const RMatrix mm = metric_matrix(model, x);
      const RMatrix closed = qubit_closed_form_field(chart_of(m.chart), qubit_options(m, alpha))->metric(x);
      Eigen::SelfAdjointEigenSolver<RMatrix> es(mm);
      items[k] = {mm, es.eigenvalues().reverse(), (mm - closed).cwiseAbs().maxCoeff()};
    });
    for (std::size_t k = 0; k < items.size(); ++k) {
      const Item& it = items[k];
      std::vector<double> row = {as[k / pts.size()]};
      const RVector& x = pts[k % pts.size()];
      for (int i = 0; i < d; ++i) row.push_back(x(i));
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) row.push_back(it.metric(i, j));
      for (int i = 0; i < d; ++i) row.push_back(it.eig(i));
      row.push_back(it.dev);
      min_eig = std::min(min_eig, it.eig.minCoeff());
      max_asym = std::max(max_asym, (it.metric - it.metric.transpose()).norm());
      max_closed_dev = std::max(max_closed_dev, it.dev);
      table.add(row);
    }
  } else {
    const std::vector<double> es = c.range("/grid/E", "-4:4:161");
    const ModelMetricField field(energy_qubit_model(m.beta, m.tau), MetricKind::full_lindblad);
    table.header = {"E[energy]", "m_EE[tau]", "m_EE_closed[tau]"};
    std::vector<double> values(es.size());
    parallel_for(static_cast<int>(es.size()), jobs, [&](int i) { values[i] = field.metric(RVector::Constant(1, es[i]))(0, 0); });
    for (std::size_t i = 0; i < es.size(); ++i) {
      const double s = 1.0 / std::cosh(m.beta * es[i]);
      table.add({es[i], values[i], m.tau * s * s});
      min_eig = std::min(min_eig, values[i]);
      max_closed_dev = std::max(max_closed_dev, std::abs(values[i] - m.tau * s * s));
    }
  }
  out.csv("metric.csv", table);
  if (c.at("/output/gnuplot", false).get<bool>()) out.text("metric.gp", gnuplot_script("metric.csv", table, "metric"));
  Json summary = {{"model", m.name}, {"points", table.rows.size()}, {"min_eigenvalue", min_eig},
                  {"max_asymmetry", max_asym}, {"max_closed_form_deviation", max_closed_dev}};
  out.json("metric_summary.json", summary);
  return summary;
}

// christoffel ----------------------------------------------------------------------

Json cmd_christoffel(const RunConfig& c, int jobs, ArtifactWriter& out) {
  const ModelSpec m = model_spec(c, "ising", "xz");
  Table table;
  double max_rel = 0.0;
  if (m.name == "ising") {
    const std::vector<double> bs = betas(c, m);
    const std::vector<double> gs = c.range("/grid/g", "0.05:5:100");
    table.header = {"beta[J^-1]", "g[J]", "Gamma_analytic[J^-1]", "Gamma_fd[J^-1]"};
    std::vector<std::array<double, 2>> values(gs.size() * bs.size());
    parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
      const double beta = bs[i / gs.size()], g = gs[i % gs.size()];
      const auto field = ising_metric_field(beta);
      const RVector x = RVector::Constant(1, g);
      values[i] = {ChristoffelField(field, DerivativeScheme::analytic)(x).gamma[0](0, 0),
                   ChristoffelField(field, DerivativeScheme::central_difference)(x).gamma[0](0, 0)};
    });
    for (std::size_t i = 0; i < values.size(); ++i) {
      table.add({bs[i / gs.size()], gs[i % gs.size()], values[i][0], values[i][1]});
      max_rel = std::max(max_rel, std::abs(values[i][0] - values[i][1]) / std::max(std::abs(values[i][0]), 1e-12));
    }
  } else if (m.name == "bosonic_qubit") {
    const std::vector<double> as = alphas(c, m);
    const std::vector<RVector> pts = qubit_grid(c, m.chart);
    const int d = static_cast<int>(pts.front().size());
    table.header = {"alpha[1]"};
    for (const std::string& h : qubit_coordinate_headers(m.chart)) table.header.push_back(h);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = j; k < d; ++k)
          table.header.push_back("Gamma^" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + std::to_string(k + 1) + "[coords]");
    table.header.push_back("fd_vs_analytic[1]");
    std::vector<std::vector<double>> rows(as.size() * pts.size());
    parallel_for(static_cast<int>(rows.size()), jobs, [&](int idx) {
      const double alpha = as[idx / pts.size()];
      const RVector& x = pts[idx % pts.size()];
      const auto field = qubit_closed_form_field(chart_of(m.chart), qubit_options(m, alpha));
      const Christoffel fd = ChristoffelField(field, DerivativeScheme::central_difference)(x);
      const Christoffel an = ChristoffelField(field, DerivativeScheme::analytic)(x);
      std::vector<double> row = {alpha};
      for (int i = 0; i < d; ++i) row.push_back(x(i));
      double dev = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = j; k < d; ++k) {
            row.push_back(fd.gamma[i](j, k));
            dev = std::max(dev, std::abs(fd.gamma[i](j, k) - an.gamma[i](j, k)) / std::max(1.0, std::abs(an.gamma[i](j, k))));
          }
      row.push_back(dev);
      rows[idx] = row;
    });
    for (auto& row : rows) {
      max_rel = std::max(max_rel, row.back());
      table.add(std::move(row));
    }
  } else {
    const std::vector<double> es = c.range("/grid/E", "-4:4:81");
    auto field = std::make_shared<ModelMetricField>(energy_qubit_model(m.beta, m.tau), MetricKind::full_lindblad);
    table.header = {"E[energy]", "Gamma_fd[energy^-1]", "Gamma_closed[energy^-1]"};
    std::vector<double> values(es.size());
    parallel_for(static_cast<int>(es.size()), jobs, [&](int i) {
      values[i] = ChristoffelField(field, DerivativeScheme::central_difference)(RVector::Constant(1, es[i])).gamma[0](0, 0);
    });
    for (std::size_t i = 0; i < es.size(); ++i) {
      const double closed = -m.beta * std::tanh(m.beta * es[i]);
      table.add({es[i], values[i], closed});
      max_rel = std::max(max_rel, std::abs(values[i] - closed) / std::max(1.0, std::abs(closed)));
    }
  }
  out.csv("christoffel.csv", table);
  Json summary = {{"model", m.name}, {"points", table.rows.size()}, {"max_scheme_difference", max_rel}};
  out.json("christoffel_summary.json", summary);
  return summary;
}

// geodesic -------------------------------------------------------------------------

struct GeodesicSetup {
  std::shared_ptr<const MetricField> field;
  DerivativeScheme scheme;
  RVector start, end;
  std::vector<std::string> names;
  double beta;
};

GeodesicSetup geodesic_setup(const RunConfig& c, const ModelSpec& m) {
  GeodesicSetup s;
  s.beta = m.beta;
  RVector a, b;
  if (m.name == "ising") {
    s.field = ising_metric_field(m.beta);
    s.scheme = DerivativeScheme::analytic;
    a = RVector::Zero(1);
    b = RVector::Constant(1, 5.0);
    s.names = {"g[J]"};
  } else if (m.name == "bosonic_qubit") {
    s.field = qubit_closed_form_field(chart_of(m.chart), qubit_options(m, m.alpha));
    s.scheme = DerivativeScheme::central_difference;
    s.names = qubit_coordinate_headers(m.chart);
    if (m.chart == "xz") {
      a = (RVector(2) << 1.0, 0.0).finished();
      b = (RVector(2) << std::sqrt(2.0), kPi / 4).finished();
    } else if (m.chart == "radial") {
      a = RVector::Constant(1, 0.2);
      b = RVector::Constant(1, 4.0);
    }
  } else {
    s.field = std::make_shared<ModelMetricField>(energy_qubit_model(m.beta, m.tau), MetricKind::full_lindblad);
    s.scheme = DerivativeScheme::central_difference;
    a = RVector::Zero(1);
    b = RVector::Constant(1, 2.0);
    s.names = {"E[energy]"};
  }
  if (c.data.contains("endpoints")) {
    const auto sa = c.data["endpoints"]["start"].get<std::vector<double>>();
    const auto sb = c.data["endpoints"]["end"].get<std::vector<double>>();
    a = Eigen::Map<const RVector>(sa.data(), static_cast<Eigen::Index>(sa.size()));
    b = Eigen::Map<const RVector>(sb.data(), static_cast<Eigen::Index>(sb.size()));
  }
  if (a.size() == 0) config_error("/endpoints: the " + m.chart + " chart has no default endpoints");
  if (a.size() != s.field->dim()) {
    config_error("/endpoints: expected " + std::to_string(s.field->dim()) + " coordinates for this model");
  }
  s.start = a;
  s.end = b;
  return s;
}

BvpOptions bvp_options(const RunConfig& c) {
  BvpOptions o;
  o.tolerance = c.number("/tolerances/shooting", o.tolerance);
  o.ivp.n_knots = static_cast<int>(c.number("/tolerances/knots", o.ivp.n_knots));
  return o;
}

Table protocol_table(const MetricField& field, const Protocol& p, const std::vector<std::string>& names, int samples) {
  Table t;
  t.header = {"t[T]"};
  for (const std::string& n : names) t.header.push_back(n);
  for (const std::string& n : names) t.header.push_back("d" + n.substr(0, n.find('[')) + "/dt" + n.substr(n.find('[')));
  t.header.push_back("integrand[energy*T^-1]");
  for (int k = 0; k < samples; ++k) {
    const double tt = static_cast<double>(k) / (samples - 1);
    const RVector x = p.value(tt), v = p.velocity(tt);
    std::vector<double> row = {tt};
    for (int i = 0; i < x.size(); ++i) row.push_back(x(i));
    for (int i = 0; i < v.size(); ++i) row.push_back(v(i));
    row.push_back(v.dot(field.metric(x) * v));
    t.add(row);
  }
  return t;
}

Json cmd_geodesic(const RunConfig& c, int, ArtifactWriter& out) {
  const ModelSpec m = model_spec(c, "gibbs_mixing_qubit", "xz");
  const GeodesicSetup s = geodesic_setup(c, m);
  const ChristoffelField chr(s.field, s.scheme);
  const GeodesicSolution sol = geodesic_bvp(chr, s.start, s.end, bvp_options(c));
  const Protocol lin = Protocol::linear(s.start, s.end);
  const int samples = sol.protocol.knot_count();
  out.csv("geodesic.csv", protocol_table(*s.field, sol.protocol, s.names, samples));
  out.csv("linear.csv", protocol_table(*s.field, lin, s.names, samples));
  Json summary = {{"model", m.name},
                  {"start", std::vector<double>(s.start.data(), s.start.data() + s.start.size())},
                  {"end", std::vector<double>(s.end.data(), s.end.data() + s.end.size())},
                  {"geodesic_action", s.beta * sol.action},
                  {"linear_action", action(*s.field, lin, s.beta)},
                  {"length", sol.length},
                  {"residual", sol.diagnostics.residual},
                  {"newton_iterations", sol.diagnostics.newton_iterations},
                  {"restarts", sol.diagnostics.restarts},
                  {"energy_drift", sol.diagnostics.energy_drift},
                  {"units", "actions are T * W_diss in energy*time units (beta prefactor included)"}};
  out.json("geodesic.json", summary);
  return summary;
}

// simulate / compare ----------------------------------------------------------------

struct SimCase {
  std::string protocol;
  double duration;
  double e_final = 0.0;
};

ParamModel simulation_model(const ModelSpec& m) {
  if (m.name == "ising") config_error("/model/name: the Ising chain is only available in the thermodynamic limit and cannot be simulated");
  if (m.name == "bosonic_qubit") {
    if (m.chart == "spherical") config_error("/model/chart: simulate bosonic_qubit in the xz or radial chart");
    return qubit_param_model(m, m.alpha);
  }
  return energy_qubit_model(m.beta, m.tau);
}

Table run_table(const SimulationRun& run) {
  Table t;
  t.header = {"t[tau]", "W[energy]", "Q[energy]", "sigma_dot[tau^-1]", "entropy_production[1]", "distance[1]"};
  const double u0 = run.records.front().energy;
  for (const SimulationRecord& r : run.records) {
    t.add({r.t, r.work, r.energy - u0 + r.work, r.sigma_dot, r.entropy_production, r.distance});
  }
  return t;
}

Json cmd_simulate(const RunConfig& c, int jobs, ArtifactWriter& out) {
  const ModelSpec m = model_spec(c, "gibbs_mixing_qubit", "xz");
  const ParamModel model = simulation_model(m);
  const GeodesicSetup s = geodesic_setup(c, m);
  const std::string which = c.text("/simulation/protocol", "both");
  const std::vector<double> durations = c.numbers("/simulation/durations", {100.0});
  std::map<std::string, Protocol> protocols;
  if (which != "geodesic") protocols.emplace("linear", Protocol::linear(s.start, s.end));
  if (which != "linear") {
    protocols.emplace("geodesic", geodesic_bvp(ChristoffelField(s.field, s.scheme), s.start, s.end, bvp_options(c)).protocol);
  }
  std::vector<SimCase> cases;
  for (const auto& [name, p] : protocols)
    for (double T : durations) cases.push_back({name, T});
  std::vector<std::optional<SimulationRun>> runs(cases.size());
  SimulationOptions opts;
  opts.abs_tol = c.number("/tolerances/integrator", opts.abs_tol);
  parallel_for(static_cast<int>(cases.size()), jobs, [&](int i) {
    runs[i] = propagate(model, protocols.at(cases[i].protocol), cases[i].duration, std::nullopt, opts);
  });
  const ModelMetricField field(model, MetricKind::full_lindblad);
  Json results = Json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const DissipationRecord acc = work_accounting(*runs[i], &field);
    const std::string name = "sim_" + cases[i].protocol + "_T" + format_double(cases[i].duration) + ".csv";
    out.csv(name, run_table(*runs[i]));
    results.push_back({{"protocol", cases[i].protocol},
                       {"T", cases[i].duration},
                       {"W", acc.work},
                       {"delta_F_neq", acc.delta_free_energy},
                       {"W_diss", acc.dissipated},
                       {"prediction", acc.prediction},
                       {"relative_error", std::abs(acc.dissipated - acc.prediction) / std::abs(acc.prediction)},
                       {"heat", acc.heat},
                       {"entropy_production", acc.entropy_production},
                       {"heat_identity_residual", acc.heat_identity_residual},
                       {"start_velocity", std::vector<double>(acc.start_velocity.data(), acc.start_velocity.data() + acc.start_velocity.size())},
                       {"end_velocity", std::vector<double>(acc.end_velocity.data(), acc.end_velocity.data() + acc.end_velocity.size())},
                       {"accepted_steps", runs[i]->accepted_steps},
                       {"file", name}});
  }
  Json summary = {{"model", m.name}, {"runs", results}};
  out.json("simulate.json", summary);
  return summary;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]) / n, my += std::log(y[i]) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Json cmd_compare(const RunConfig& c, int jobs, ArtifactWriter& out) {
  const ModelSpec m = model_spec(c, "gibbs_mixing_qubit", "");
  if (m.name != "gibbs_mixing_qubit") config_error("/model/name: compare needs the gibbs_mixing_qubit model (closed forms)");
  const ParamModel model = energy_qubit_model(m.beta, m.tau);
  const std::vector<double> efs = c.numbers("/simulation/E_f", {2.0});
  const std::vector<double> durations = c.numbers("/simulation/durations", {50.0, 100.0, 200.0, 400.0});
  std::vector<std::optional<LinearVsGeodesic>> reports(efs.size());
  parallel_for(static_cast<int>(efs.size()), jobs, [&](int i) { reports[i] = linear_vs_geodesic_report(efs[i], m.beta, m.tau); });
  struct Item {
    std::size_t ef;
    double T;
    bool geodesic;
    double dissipated = 0.0;
  };
  std::vector<Item> items;
  for (std::size_t e = 0; e < efs.size(); ++e)
    for (double T : durations)
      for (bool g : {false, true}) items.push_back({e, T, g});
  parallel_for(static_cast<int>(items.size()), jobs, [&](int i) {
    Item& it = items[i];
    const Protocol p = it.geodesic ? reports[it.ef]->geodesic.protocol
                                   : Protocol::linear(RVector::Zero(1), RVector::Constant(1, efs[it.ef]));
    it.dissipated = work_accounting(propagate(model, p, it.T)).dissipated;
  });
  Table table;
  table.header = {"E_f[energy]", "T[tau]", "T*W_diss_linear[energy*tau]", "T*W_diss_geodesic[energy*tau]",
                  "closed_linear[energy*tau]", "closed_geodesic[energy*tau]", "rel_err_linear[1]", "rel_err_geodesic[1]"};
  Json fits = Json::array();
  for (std::size_t e = 0; e < efs.size(); ++e) {
    std::vector<double> err_lin, err_geo;
    double last_ratio = 0.0;
    for (double T : durations) {
      double lin = 0, geo = 0;
      for (const Item& it : items)
        if (it.ef == e && it.T == T) (it.geodesic ? geo : lin) = T * it.dissipated;
      const double cl = reports[e]->w_linear_closed, cg = reports[e]->w_geodesic_closed;
      table.add({efs[e], T, lin, geo, cl, cg, std::abs(lin - cl) / cl, std::abs(geo - cg) / cg});
      err_lin.push_back(std::abs(lin - cl));
      err_geo.push_back(std::abs(geo - cg));
      last_ratio = lin / geo;
    }
    Json fit = {{"E_f", efs[e]}, {"closed_ratio", reports[e]->w_linear_closed / reports[e]->w_geodesic_closed},
                {"simulated_ratio_at_largest_T", last_ratio}};
    if (durations.size() >= 2) {
      fit["error_slope_linear"] = fit_slope(durations, err_lin);
      fit["error_slope_geodesic"] = fit_slope(durations, err_geo);
    }
    fits.push_back(fit);
  }
  out.csv("compare.csv", table);
  Json summary = {{"model", m.name}, {"fits", fits}};
  const std::vector<double> steps = c.numbers("/simulation/steps", {});
  if (!steps.empty()) {
    Table discrete;
    discrete.header = {"E_f[energy]", "N[1]", "2N*W_N[energy]", "closed_linear[energy]", "abs_err[energy]"};
    for (double ef : efs) {
      const Protocol lin = Protocol::linear(RVector::Zero(1), RVector::Constant(1, ef));
      for (double n : steps) {
        const double w = 2.0 * n * discrete_protocol_dissipation(model, discretize(lin, static_cast<int>(n)));
        const double closed = linear_action_closed_form(ef, m.beta, 1.0);
        discrete.add({ef, n, w, closed, std::abs(w - closed)});
      }
    }
    out.csv("discrete.csv", discrete);
  }
  out.json("compare.json", summary);
  return summary;
}

// figures ---------------------------------------------------------------------------

Json cmd_ising_fig2(const RunConfig& c, int jobs, ArtifactWriter& out) {
  const std::vector<double> bs = c.numbers("/grid/beta", {0.5, 1.0, 2.0, 5.0, 10.0});
  const std::vector<double> gs = c.range("/grid/g", "0:5:201");
  const bool plots = c.at("/output/gnuplot", false).get<bool>();
  const BvpOptions bvp = bvp_options(c);
  struct Column {
    std::vector<double> m, gamma;
    std::optional<GeodesicSolution> geo;
  };
  std::vector<Column> cols(bs.size());
  for (Column& col : cols) col.m.resize(gs.size()), col.gamma.resize(gs.size());
  const int n_pts = static_cast<int>(bs.size() * gs.size());
  parallel_for(n_pts + static_cast<int>(bs.size()), jobs, [&](int i) {
    if (i >= n_pts) {
      const int b = i - n_pts;
      const ChristoffelField chr(ising_metric_field(bs[b]), DerivativeScheme::analytic);
      cols[b].geo = geodesic_bvp(chr, RVector::Zero(1), RVector::Constant(1, gs.back()), bvp);
      return;
    }
    const std::size_t b = i / gs.size(), g = i % gs.size();
    const IsingLogZ z = ising_log_z_derivatives(gs[g], bs[b]);
    cols[b].m[g] = z.d2 / (bs[b] * bs[b]);
    cols[b].gamma[g] = z.d3 / (2.0 * z.d2);
  });
  Table metric, gamma, path, speed;
  metric.header = gamma.header = {"g[J]"};
  path.header = speed.header = {"t[T]"};
  for (double b : bs) {
    metric.header.push_back("m(" + tag("beta", b) + ")[tau]");
    gamma.header.push_back("Gamma(" + tag("beta", b) + ")[J^-1]");
    path.header.push_back("g(" + tag("beta", b) + ")[J]");
    speed.header.push_back("dg/dt(" + tag("beta", b) + ")[J*T^-1]");
  }
  for (std::size_t g = 0; g < gs.size(); ++g) {
    std::vector<double> mr = {gs[g]}, gr = {gs[g]};
    for (const Column& col : cols) mr.push_back(col.m[g]), gr.push_back(col.gamma[g]);
    metric.add(mr);
    gamma.add(gr);
  }
  const int samples = 201;
  Json per_beta = Json::array();
  std::vector<double> min_speed(bs.size(), 1e300), g_at_min(bs.size(), 0.0);
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    std::vector<double> pr = {t}, sr = {t};
    for (std::size_t b = 0; b < bs.size(); ++b) {
      const Protocol& p = cols[b].geo->protocol;
      pr.push_back(p.value(t)(0));
      sr.push_back(p.velocity(t)(0));
      if (std::abs(sr.back()) < min_speed[b]) min_speed[b] = std::abs(sr.back()), g_at_min[b] = pr.back();
    }
    path.add(pr);
    speed.add(sr);
  }
  for (std::size_t b = 0; b < bs.size(); ++b) {
    std::size_t arg = 0;
    for (std::size_t g = 1; g < gs.size(); ++g)
      if (cols[b].m[g] > cols[b].m[arg]) arg = g;
    per_beta.push_back({{"beta", bs[b]},
                        {"argmax_g", gs[arg]},
                        {"g_at_min_speed", g_at_min[b]},
                        {"geodesic_action", bs[b] * cols[b].geo->action},
                        {"linear_action", action(*ising_metric_field(bs[b]), Protocol::linear(RVector::Zero(1), RVector::Constant(1, gs.back())), bs[b])}});
  }
  out.csv("ising_metric.csv", metric);
  out.csv("ising_christoffel.csv", gamma);
  out.csv("ising_geodesic.csv", path);
  out.csv("ising_speed.csv", speed);
  if (plots) {
    out.text("ising_metric.gp", gnuplot_script("ising_metric.csv", metric, "Ising metric m(g)", true));
    out.text("ising_christoffel.gp", gnuplot_script("ising_christoffel.csv", gamma, "Christoffel symbol"));
    out.text("ising_geodesic.gp", gnuplot_script("ising_geodesic.csv", path, "geodesic g(t)"));
  }
  Json summary = {{"betas", bs}, {"per_beta", per_beta},
                  {"note", "beta values are sweep defaults; override with --beta"}};
  out.json("ising_fig2.json", summary);
  return summary;
}

Json cmd_qubit_fig3(const RunConfig& c, int jobs, ArtifactWriter& out) {
  ModelSpec base = model_spec(c, "bosonic_qubit", "xz");
  const std::vector<double> as = c.numbers("/grid/alpha", {0.5, 1.0, 2.0});
  const std::vector<double> rs = c.range("/grid/r", "0.05:6:120");
  const std::vector<double> efs = c.numbers("/simulation/E_f", {0.5, 1.0, 2.0, 5.0, 8.0});
  const bool plots = c.at("/output/gnuplot", false).get<bool>();
  const BvpOptions bvp = bvp_options(c);
  const RVector radial_a = RVector::Constant(1, 0.2), radial_b = RVector::Constant(1, 4.0);
  const RVector xz_a = (RVector(2) << 1.0, 0.0).finished(), xz_b = (RVector(2) << std::sqrt(2.0), kPi / 4).finished();

  const int na = static_cast<int>(as.size());
  std::vector<std::optional<GeodesicSolution>> radial(na), xz(na);
  std::vector<std::optional<LinearVsGeodesic>> work(efs.size());
  parallel_for(2 * na + static_cast<int>(efs.size()), jobs, [&](int i) {
    if (i < 2 * na) {
      const int a = i % na;
      const bool is_xz = i >= na;
      const auto field = qubit_closed_form_field(is_xz ? QubitChart::xz : QubitChart::radial, qubit_options(base, as[a]));
      const ChristoffelField chr(field, DerivativeScheme::central_difference);
      (is_xz ? xz : radial)[a] = geodesic_bvp(chr, is_xz ? xz_a : radial_a, is_xz ? xz_b : radial_b, bvp);
    } else {
      work[i - 2 * na] = linear_vs_geodesic_report(efs[i - 2 * na]);
    }
  });

  Table eig, metric, rpath, xzpath, wtable;
  eig.header = {"r[beta^-1]", "lambda_d[1]", "lambda_q[1]", "lambda_q/lambda_d[1]"};
  metric.header = {"r[beta^-1]"};
  for (double a : as) metric.header.push_back("m_rr(" + tag("alpha", a) + ")[gamma0^-1]");
  for (double a : as) metric.header.push_back("m_thth(" + tag("alpha", a) + ")[beta^-2*gamma0^-1]");
  for (double r : rs) {
    const QubitEigenvalues e = qubit_eigenvalues(r);
    eig.add({r, e.diagonal, e.quantum, e.quantum / e.diagonal});
    std::vector<double> row = {r};
    for (double a : as) row.push_back(std::pow(r, -a) * e.diagonal);
    for (double a : as) row.push_back(std::pow(r, 2.0 - a) * e.quantum);
    metric.add(row);
  }
  rpath.header = {"t[T]"};
  xzpath.header = {"t[T]"};
  for (double a : as) rpath.header.push_back("r(" + tag("alpha", a) + ")[beta^-1]");
  for (double a : as) {
    xzpath.header.push_back("x(" + tag("alpha", a) + ")[beta^-1]");
    xzpath.header.push_back("z(" + tag("alpha", a) + ")[beta^-1]");
  }
  const int samples = 201;
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    std::vector<double> rr = {t}, xr = {t};
    for (int a = 0; a < na; ++a) {
      rr.push_back(radial[a]->protocol.value(t)(0));
      const RVector p = xz[a]->protocol.value(t);
      xr.push_back(p(0) * std::sin(p(1)));
      xr.push_back(p(0) * std::cos(p(1)));
    }
    rpath.add(rr);
    xzpath.add(xr);
  }
  wtable.header = {"E_f[beta^-1]", "W_lin[beta^-1*tau]", "W_kmb[beta^-1*tau]", "ratio[1]", "W_lin_closed[beta^-1*tau]",
                   "W_kmb_closed[beta^-1*tau]"};
  for (std::size_t i = 0; i < efs.size(); ++i) {
    const LinearVsGeodesic& w = *work[i];
    wtable.add({efs[i], w.w_linear, w.w_geodesic, w.ratio, w.w_linear_closed, w.w_geodesic_closed});
  }
  out.csv("qubit_eigenvalues.csv", eig);
  out.csv("qubit_radial_metric.csv", metric);
  out.csv("qubit_radial_geodesics.csv", rpath);
  out.csv("qubit_xz_geodesics.csv", xzpath);
  out.csv("qubit_work.csv", wtable);
  if (plots) {
    out.text("qubit_eigenvalues.gp", gnuplot_script("qubit_eigenvalues.csv", eig, "metric eigenvalues", true));
    out.text("qubit_radial_geodesics.gp", gnuplot_script("qubit_radial_geodesics.csv", rpath, "radial geodesics"));
    std::string xzgp = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'x'\nset ylabel 'z'\n"
                       "set terminal pngcairo size 900,600\nset output 'qubit_xz_geodesics.png'\nplot ";
    for (int a = 0; a < na; ++a) {
      if (a) xzgp += ", \\\n     ";
      xzgp += "'qubit_xz_geodesics.csv' using " + std::to_string(2 + 2 * a) + ":" + std::to_string(3 + 2 * a) + " with lines";
    }
    out.text("qubit_xz_geodesics.gp", xzgp + "\n");
  }
  Json geo = Json::array();
  for (int a = 0; a < na; ++a) {
    geo.push_back({{"alpha", as[a]}, {"radial_action", radial[a]->action}, {"xz_action", xz[a]->action},
                   {"xz_linear_action", action(*qubit_closed_form_field(QubitChart::xz, qubit_options(base, as[a])),
                                               Protocol::linear(xz_a, xz_b))}});
  }
  Json summary = {{"alphas", as}, {"geodesics", geo}, {"chart", "xz: (r, theta), x = r sin theta, z = r cos theta"}};
  out.json("qubit_fig3.json", summary);
  return summary;
}

}  // namespace

Json run_command(const RunConfig& config, int jobs, ArtifactWriter& out) {
  const std::string& cmd = config.command();
  if (cmd == "metric") return cmd_metric(config, jobs, out);
  if (cmd == "christoffel") return cmd_christoffel(config, jobs, out);
  if (cmd == "geodesic") return cmd_geodesic(config, jobs, out);
  if (cmd == "simulate") return cmd_simulate(config, jobs, out);
  if (cmd == "compare") return cmd_compare(config, jobs, out);
  if (cmd == "ising-fig2") return cmd_ising_fig2(config, jobs, out);
  return cmd_qubit_fig3(config, jobs, out);
}

}  // namespace thermolen::cli

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "thermolen/errors.hpp"

using thermolen::cli::Json;

namespace {

enum Exit { ok = 0, failure = 1, invalid = 2, domain = 3, numerical = 4 };

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw thermolen::ValidationError("cli::config", "cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw thermolen::ValidationError("cli::config", path + ": " + e.what());
  }
}

Json number_list(const std::vector<double>& v) { return Json(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermolen: thermodynamic length, geodesic protocols and open-system simulation"};
  app.set_version_flag("--version", std::string(THERMOLEN_VERSION));

  std::string command, config_path, out_dir, model, chart, protocol, g_range, r_range, theta_range, e_range;
  std::vector<double> betas, alphas, start, end, durations, e_finals, steps;
  double tau = 0.0;
  int jobs = 0, knots = 0;
  long long seed = -1;
  bool gnuplot = false;

  app.add_option("command", command, "metric | christoffel | geodesic | simulate | compare | ising-fig2 | qubit-fig3 | schema")
      ->required();
  app.add_option("-c,--config", config_path, "JSON run configuration (flags override its values)");
  app.add_option("-o,--out", out_dir, "output directory (default thermolen-out/<command>)");
  app.add_option("-j,--jobs", jobs, "worker threads (default $THERMOLEN_JOBS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--model", model, "ising | bosonic_qubit | gibbs_mixing_qubit");
  app.add_option("--beta", betas, "inverse temperature(s)")->delimiter(',');
  app.add_option("--alpha", alphas, "spectral-density exponent(s)")->delimiter(',');
  app.add_option("--tau", tau, "relaxation time of the Gibbs-mixing map");
  app.add_option("--chart", chart, "qubit chart: spherical | xz | radial");
  app.add_option("--g", g_range, "field grid start:stop:count");
  app.add_option("--r", r_range, "radius grid start:stop:count");
  app.add_option("--theta", theta_range, "polar-angle grid start:stop:count");
  app.add_option("--E", e_range, "energy grid start:stop:count");
  app.add_option("--start", start, "geodesic start point")->delimiter(',');
  app.add_option("--end", end, "geodesic end point")->delimiter(',');
  app.add_option("--T", durations, "protocol duration(s)")->delimiter(',');
  app.add_option("--Ef", e_finals, "final energies")->delimiter(',');
  app.add_option("--protocol", protocol, "linear | geodesic | both");
  app.add_option("--steps", steps, "discrete step counts for compare")->delimiter(',');
  app.add_option("--knots", knots, "protocol knots");
  app.add_flag("--gnuplot", gnuplot, "also write gnuplot scripts");
  app.add_option("--seed", seed, "recorded in the manifest; all commands are deterministic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : invalid;
  }

  try {
    if (command == "schema") {
      std::cout << thermolen::cli::config_schema().dump(2) << "\n";
      return ok;
    }
    Json data = config_path.empty() ? Json::object() : load_config_file(config_path);
    if (!data.is_object()) throw thermolen::ValidationError("cli::config", "/: expected an object");
    data["command"] = command;
    auto set = [&data](const std::string& pointer, const Json& value) { data[Json::json_pointer(pointer)] = value; };
    if (!model.empty()) set("/model/name", model);
    if (betas.size() == 1) set("/model/beta", betas.front());
    if (!betas.empty()) set("/grid/beta", number_list(betas));
    if (alphas.size() == 1) set("/model/alpha", alphas.front());
    if (!alphas.empty()) set("/grid/alpha", number_list(alphas));
    if (tau != 0.0) set("/model/tau", tau);
    if (!chart.empty()) set("/model/chart", chart);
    if (!g_range.empty()) set("/grid/g", g_range);
    if (!r_range.empty()) set("/grid/r", r_range);
    if (!theta_range.empty()) set("/grid/theta", theta_range);
    if (!e_range.empty()) set("/grid/E", e_range);
    if (!start.empty()) set("/endpoints/start", number_list(start));
    if (!end.empty()) set("/endpoints/end", number_list(end));
    if (!durations.empty()) set("/simulation/durations", number_list(durations));
    if (!e_finals.empty()) set("/simulation/E_f", number_list(e_finals));
    if (!protocol.empty()) set("/simulation/protocol", protocol);
    if (!steps.empty()) set("/simulation/steps", number_list(steps));
    if (knots != 0) set("/tolerances/knots", knots);
    if (gnuplot) set("/output/gnuplot", true);
    if (!out_dir.empty()) set("/output/dir", out_dir);
    if (seed >= 0) set("/seed", seed);
    if (jobs > 0) set("/jobs", jobs);

    const thermolen::cli::RunConfig config = thermolen::cli::make_config(std::move(data));
    const int n_jobs = config.data.contains("jobs") ? config.data["jobs"].get<int>() : thermolen::cli::default_jobs();
    thermolen::cli::ArtifactWriter writer(config.text("/output/dir", "thermolen-out/" + command));

    const auto t0 = std::chrono::steady_clock::now();
    Json summary = thermolen::cli::run_command(config, n_jobs, writer);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    summary["files"] = writer.flush(config, wall, n_jobs);
    summary["output_dir"] = config.text("/output/dir", "thermolen-out/" + command);
    std::cout << summary.dump(2) << "\n";
    return ok;
  } catch (const thermolen::ValidationError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return invalid;
  } catch (const thermolen::DomainError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return domain;
  } catch (const thermolen::ConvergenceError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return numerical;
  } catch (const thermolen::IntegratorError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return numerical;
  } catch (const thermolen::AccuracyError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return numerical;
  } catch (const thermolen::ConditioningError& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return numerical;
  } catch (const std::exception& e) {
    std::cerr << "thermolen: " << e.what() << "\n";
    return failure;
  }
}

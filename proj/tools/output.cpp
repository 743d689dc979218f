#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "thermolen/errors.hpp"

#ifndef THERMOLEN_VERSION
#define THERMOLEN_VERSION "unknown"
#endif

namespace thermolen::cli {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += csv_field(table.header[i]);
  }
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::vector<std::string> ArtifactWriter::flush(const RunConfig& config, double wall_seconds, int jobs) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ValidationError("cli::output", "cannot create output directory '" + dir_.string() + "': " + ec.message());
  std::vector<std::string> names;
  for (const File& f : files_) {
    std::ofstream os(dir_ / f.name, std::ios::binary);
    os << f.content;
    if (!os) throw ValidationError("cli::output", "cannot write '" + (dir_ / f.name).string() + "'");
    names.push_back(f.name);
  }
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config.data)));
  Json manifest = {
      {"command", config.command()},
      {"config", config.data},
      {"config_hash", std::string("fnv1a64:") + hash},
      {"versions",
       {{"thermolen", THERMOLEN_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                      std::to_string(BOOST_VERSION % 100)},
        {"compiler", __VERSION__}}},
      {"jobs", jobs},
      {"wall_time_s", wall_seconds},
      {"files", names}};
  std::ofstream(dir_ / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  return names;
}

std::string gnuplot_script(const std::string& csv_name, const Table& table, const std::string& title, bool log_y) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << table.header.front() << "'\n";
  if (log_y) os << "set logscale y\n";
  os << "set terminal pngcairo size 900,600\n"
     << "set output '" << csv_name.substr(0, csv_name.rfind('.')) << ".png'\n"
     << "plot ";
  for (std::size_t c = 2; c <= table.header.size(); ++c) {
    if (c > 2) os << ", \\\n     ";
    os << "'" << csv_name << "' using 1:" << c << " with lines";
  }
  os << "\n";
  return os.str();
}

void parallel_for(int n, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, n));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = n;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

int default_jobs() {
  if (const char* env = std::getenv("THERMOLEN_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ValidationError("cli::jobs", std::string("THERMOLEN_JOBS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

}  // namespace thermolen::cli

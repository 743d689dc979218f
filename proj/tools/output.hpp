#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"

namespace thermolen::cli {

/// Plot-ready numeric table; header entries carry units, e.g. "r[beta^-1]".
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

/// Shortest round-trip decimal form (std::to_chars), "nan"/"inf" spelled out.
std::string format_double(double x);

/// RFC 4180 CSV (CRLF line ends, quoted fields where needed).
std::string to_csv(const Table& table);

/// Collects every artifact of a run and writes them from one thread.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void csv(const std::string& name, const Table& table) { files_.push_back({name, to_csv(table)}); }
  void json(const std::string& name, const Json& value) { files_.push_back({name, value.dump(2) + "\n"}); }
  void text(const std::string& name, std::string content) { files_.push_back({name, std::move(content)}); }

  /// Writes all files plus manifest.json; returns the list of written names.
  std::vector<std::string> flush(const RunConfig& config, double wall_seconds, int jobs);

 private:
  struct File {
    std::string name;
    std::string content;
  };
  std::filesystem::path dir_;
  std::vector<File> files_;
};

/// gnuplot script plotting columns of a CSV against the first column.
std::string gnuplot_script(const std::string& csv_name, const Table& table, const std::string& title,
                           bool log_y = false);

/// Runs task(i) for i in [0, n) on `jobs` threads. Results are stored by the
/// task itself in a pre-sized slot, so output order never depends on timing.
/// The first exception thrown by any task is rethrown after all threads join.
void parallel_for(int n, int jobs, const std::function<void(int)>& task);

/// --jobs default: THERMOLEN_JOBS when set, else 1.
int default_jobs();

}  // namespace thermolen::cli

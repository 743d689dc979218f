#pragma once

#include "config.hpp"
#include "output.hpp"

namespace thermolen::cli {

/// Runs the configured command, queueing artifacts on `out`. Returns a short
/// JSON summary for stdout.
Json run_command(const RunConfig& config, int jobs, ArtifactWriter& out);

}  // namespace thermolen::cli

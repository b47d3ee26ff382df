#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgebench/coordinator.hpp"
#include "edgebench/monitoring.hpp"

namespace edgebench {

// Everything a finished run leaves behind, minus the derived CSVs:
// `analyze` rebuilds reports from exactly this.
struct RunArtifacts {
    std::uint64_t seed = 0;
    std::string connector = "simulated";
    std::vector<ExperimentRecord> records;
    MetricStore store;
};

// Writes manifest.yaml, run.log, store.log and store.idx into `dir`
// (created if missing). Throws IoError.
void save_run(const std::filesystem::path& dir, const RunArtifacts& artifacts,
              const std::vector<std::string>& log_lines);

// Reads a directory written by save_run. Final health statuses are not
// persisted; reloaded records carry timings, outcomes and app metrics.
// Throws IoError / SyntaxError / SchemaError / FormatError.
RunArtifacts load_run(const std::filesystem::path& dir);

} // namespace edgebench

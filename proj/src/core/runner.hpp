/// @file runner.hpp
/// @brief Mode orchestration shared by the C API: resolve a Config into a
///        concrete experiment, execute, and emit artifacts.

#ifndef NSDA_RUNNER_HPP
#define NSDA_RUNNER_HPP

#include <optional>
#include <string>

#include "nsda/config.hpp"

namespace nsda {

struct RunOptions {
    std::string mode = "ensemble";  // reference|assimilate|ensemble|verify|calibrate
    std::string out_dir = ".";
    std::string replay_path;        // assimilate: ingest observations from CSV
    // Overrides; sentinel values keep the config's choice.
    long long seed = -1;
    int members = -1;
    std::string bound;
    double epsilon = -1.0;
};

struct RunResult {
    bool ok = false;             // run completed without error
    bool checks_passed = true;   // requested bound/property checks passed
    std::string message;         // error text when !ok
    std::string manifest_path;
    std::string report_path;
    std::string series_path;
    std::string obslog_path;
    std::string report_json;     // the report document, also written to disk
};

RunResult run_experiment(Config cfg, const RunOptions& opt);

/// Library version string recorded in manifests.
const char* version_string();

} // namespace nsda

#endif

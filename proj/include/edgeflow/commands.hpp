/// @file commands.hpp
/// Subcommand entry points; each returns the process exit code.
/// 0: all enabled verdicts pass; 1: verdict failure; 2: configuration error;
/// 3: runtime abort.

#pragma once

#include <string>
#include <vector>

namespace edgeflow {

struct CliOptions {
    std::string config_path;
    std::string out_dir; // empty: $EDGEFLOW_OUTPUT_ROOT/<stem> or ./runs/<stem>
    bool quiet = false;
};

int cmd_run(const CliOptions& opts);
int cmd_spectral(const CliOptions& opts);
int cmd_sweep(const CliOptions& opts, const std::string& param,
              const std::vector<double>& values);
int cmd_audit(const std::string& artifact_dir, bool quiet);

} // namespace edgeflow

#pragma once

#include <ostream>
#include <string>

#include "sctree/config.hpp"

namespace sctree {

/// Output directory: the configured value when set, else $SCTREE_OUT_DIR,
/// else the working directory.
std::string resolve_out_dir(const PathsConfig& paths);

/// Joins a file name with the output directory; absolute names pass through.
std::string resolve_path(const std::string& name, const std::string& out_dir);

/// The subcommand bodies. Each returns a process exit code and writes its
/// human-readable report to `out`; failures are thrown.
int cmd_generate(const RunConfig& config, std::ostream& out);
int cmd_solve(const RunConfig& config, Method method, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out);
int cmd_cluster_report(const RunConfig& config, std::ostream& out);

/// argv-level entry point used by the binary; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sctree

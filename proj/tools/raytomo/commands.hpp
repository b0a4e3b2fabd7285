#pragma once

#include <ostream>

#include "config.hpp"

namespace raytomo::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitPartial = 1,  // ran to completion, but some rays or pairs failed
  kExitConfig = 2,   // bad flags or configuration; nothing was computed
  kExitRuntime = 3,  // a computation aborted
};

// Each command writes its files below common.out, progress to `log` and
// failures to `err`. Outputs depend only on the configuration and seed.
int cmd_validate_fisheye(const ValidateRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);
int cmd_trace(const TraceRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);
int cmd_link(const LinkRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);
int cmd_synth(const SynthRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);
int cmd_reconstruct(const ReconstructRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);
int cmd_greens(const GreensRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err);

/// Dispatches on the parsed command. Computation errors become
/// kExitRuntime with a diagnostic on `err`.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace raytomo::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mines/optimizer.hpp"

namespace mines::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitRuntime = 2,
  kExitDiagnostic = 3,
};

inline constexpr const char* kTraceHeader = "k,n_evals,f_value,f_gap,sigma_err_fro,eta1,eta2,stage,wall_ms";

/// 17 significant digits, so the text round-trips to the same double.
std::string format_real(double value);

/// Trace as CSV text with kTraceHeader; unavailable values are `NA`.
std::string trace_csv(const RunTrace& trace);

/// Entry point for `mines <subcommand> ...`; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mines::cli

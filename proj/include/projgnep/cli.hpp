#pragma once

#include "projgnep/problem_io.hpp"
#include "projgnep/solvers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace projgnep {

enum ExitCode : int { kExitCertified = 0, kExitNoCertificate = 1, kExitInputError = 2 };

/// Renders the `key = value` report for a list of certificates.
std::string format_report(const std::string& command, const std::string& solver, const Problem& problem,
                          const SolverConfig& cfg, double eps, const std::vector<Certificate>& certs,
                          const std::string& advisory, const std::string& status);

/// Entry point behind the executable. `args` excludes the program name.
/// The report goes to `out`; usage text, errors and timing go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace projgnep

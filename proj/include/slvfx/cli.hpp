#ifndef SLVFX_CLI_HPP
#define SLVFX_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace slvfx {

enum ExitCode : int
{
  kExitOk = 0,
  kExitValidation = 2,
  kExitRuntime = 3,
};

/// Entry point of the command-line tool; args[0] is the program name.
/// Reports go to `out` unless --out names a file, diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace slvfx

#endif

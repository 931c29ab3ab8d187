#ifndef CARNOT_CLI_HPP
#define CARNOT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace carnot {

/*
 * Command-line entry point, callable in-process for tests.  Returns the
 * process exit code: 0 on success (including negative diagnostic results),
 * 2 on input errors, 3 on numerical failures.  Artifacts land in the
 * directory given by --out (default: current directory) together with a
 * machine-readable summary.json.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace carnot

#endif

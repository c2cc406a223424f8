#ifndef BENCHFOLD_CLI_HPP
#define BENCHFOLD_CLI_HPP

#include <iosfwd>

namespace benchfold {

/// Command-line entry point. Returns 0 on success, 1 for data, config and
/// usage errors, 2 for internal errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace benchfold

#endif

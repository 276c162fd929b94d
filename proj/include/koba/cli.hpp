#ifndef KOBA_CLI_HPP
#define KOBA_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace koba::cli
{

// Runs one command line (program name excluded) and returns the exit status:
// 0 success, 1 experiment or tolerance failure, 2 configuration error.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int run(int argc, const char *const *argv);

} // namespace koba::cli

#endif

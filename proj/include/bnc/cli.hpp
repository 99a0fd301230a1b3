#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bnc {

/// Entry point shared by the binary and the tests. argv-style arguments
/// without the program name. Exit codes: 0 success, 1 failed verification,
/// 2 parse/problem errors, 3 cap or timeout, 4 instance not positive.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bnc

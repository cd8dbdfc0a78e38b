#pragma once

#include <ostream>

namespace graphcp {

/// Entry point of the graphcp command. Returns 0 on success, 1 on invalid
/// input or usage, 2 on any other failure. Errors go to `err` as
/// "graphcp: error[validation|runtime]: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace graphcp

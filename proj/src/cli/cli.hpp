#pragma once

#include <iosfwd>

namespace butterfly::cli {

// Exit codes: 0 success, 2 validation or parse error, 3 divergence, 1 anything else.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace butterfly::cli

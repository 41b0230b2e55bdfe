#pragma once

#include <ostream>

namespace sdwn {

/// sdwnctl entry point. Exit codes: 0 ok, 1 invariant violated, 2 usage or
/// input error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdwn

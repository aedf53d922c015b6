#pragma once

#include <string>
#include <vector>

namespace heliosim::cli {

// Exit codes: 0 all requested predicates hold, 1 usage or I/O error,
// 2 a predicate was violated.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace heliosim::cli

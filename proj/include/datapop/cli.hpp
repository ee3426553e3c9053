#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace datapop::cli {

// Entry point of the `datapop` tool. Returns 0 on success, 1 when a module
// reports an error (one "error: ..." line on `err`), 2 on bad usage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for tests: run({"generate", "--seed", "42"}) with argv[0] supplied.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace datapop::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mnrv::cli {

// Exit codes: 0 ok, 1 runtime failure, 2 usage error. Errors are reported as a
// single JSON object on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// JSON Schema of the configuration file accepted by --config.
std::string config_schema();

}  // namespace mnrv::cli

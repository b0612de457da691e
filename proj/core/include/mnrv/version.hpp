#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mnrv {

const char* version();
// Name/version pairs of the libraries the core was built against.
std::vector<std::pair<std::string, std::string>> dependency_versions();

}  // namespace mnrv

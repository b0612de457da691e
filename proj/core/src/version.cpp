#include "mnrv/version.hpp"

#include <gsl/gsl_version.h>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace mnrv {

const char* version() { return "0.3.0"; }

std::vector<std::pair<std::string, std::string>> dependency_versions() {
  auto v3 = [](int a, int b, int c) {
    return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c);
  };
  return {
      {"eigen", v3(EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"gsl", GSL_VERSION},
      {"nlohmann_json", v3(NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)},
  };
}

}  // namespace mnrv

#pragma once

#include <CLI11.hpp>

namespace mnrv::cli {

// CLI11 config reader for JSON files. Top-level keys map to global options and
// nested objects to the subcommand of the same name; arrays become repeated inputs.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace mnrv::cli

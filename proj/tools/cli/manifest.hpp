#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mnrv::cli {

std::string sha256_file(const std::filesystem::path& path);

// Record of one run: arguments, effective configuration, seed, library versions
// and SHA-256 of every input and output file. Contains no timestamps, so two
// identical runs produce identical manifests.
class Manifest {
 public:
  Manifest(std::string subcommand, std::vector<std::string> arguments);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
  const std::vector<std::filesystem::path>& outputs() const { return outputs_; }

  nlohmann::json to_json() const;
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string subcommand_;
  std::vector<std::string> arguments_;
  nlohmann::json config_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::vector<std::string> warnings_;
};

}  // namespace mnrv::cli

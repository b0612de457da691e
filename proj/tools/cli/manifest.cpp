#include "cli/manifest.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <array>
#include <fstream>
#include <memory>

#include "mnrv/error.hpp"
#include "mnrv/version.hpp"

namespace mnrv::cli {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) fail(ErrorKind::io, "sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Manifest::Manifest(std::string subcommand, std::vector<std::string> arguments)
    : subcommand_(std::move(subcommand)), arguments_(std::move(arguments)) {}

void Manifest::add_input(const std::filesystem::path& p) { inputs_.push_back(p); }
void Manifest::add_output(const std::filesystem::path& p) { outputs_.push_back(p); }

json Manifest::to_json() const {
  json files_in = json::array(), files_out = json::array();
  for (const auto& p : inputs_)
    files_in.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  for (const auto& p : outputs_)
    files_out.push_back({{"path", p.filename().generic_string()},
                         {"bytes", std::filesystem::file_size(p)},
                         {"sha256", sha256_file(p)}});
  json versions = {{"mnrv", mnrv::version()}, {"cli11", CLI11_VERSION}};
  for (const auto& [name, v] : dependency_versions()) versions[name] = v;
#if defined(__clang__)
  versions["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  versions["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  json j = {{"tool", "mnrv"},
            {"subcommand", subcommand_},
            {"arguments", arguments_},
            {"config", config_},
            {"seed", seed_ ? json(*seed_) : json(nullptr)},
            {"versions", versions},
            {"inputs", files_in},
            {"outputs", files_out},
            {"warnings", warnings_}};
  return j;
}

std::filesystem::path Manifest::write(const std::filesystem::path& dir) const {
  auto path = dir / ("manifest_" + subcommand_ + ".json");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write " + path.string());
  f << to_json().dump(2) << '\n';
  return path;
}

}  // namespace mnrv::cli

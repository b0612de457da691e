#include "cli/json_config.hpp"

#include <nlohmann/json.hpp>

namespace mnrv::cli {

using nlohmann::json;

namespace {

std::string scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return v.dump();
  throw CLI::ConversionError("config values must be scalars or arrays of scalars");
}

void flatten(const json& obj, std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = it.key();
    const json& v = it.value();
    if (v.is_object()) {
      parents.push_back(it.key());
      flatten(v, parents, out);
      parents.pop_back();
      continue;
    }
    if (v.is_array()) {
      for (const auto& e : v) item.inputs.push_back(scalar(e));
    } else if (v.is_null()) {
      continue;
    } else {
      item.inputs.push_back(scalar(v));
    }
    out.push_back(std::move(item));
  }
}

json option_value(const CLI::Option* opt, bool default_also) {
  std::vector<std::string> res = opt->reduced_results();
  if (res.empty() && default_also && !opt->get_default_str().empty()) res = {opt->get_default_str()};
  if (res.empty()) return nullptr;
  if (res.size() == 1) return res.front();
  return res;
}

void dump_app(const CLI::App* app, bool default_also, json& out) {
  for (const CLI::Option* opt : app->get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    json v = option_value(opt, default_also);
    if (!v.is_null()) out[name] = v;
  }
  for (const CLI::App* sub : app->get_subcommands({})) {
    json s = json::object();
    dump_app(sub, default_also, s);
    if (!s.empty()) out[sub->get_name()] = s;
  }
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  json out = json::object();
  dump_app(app, default_also, out);
  return out.dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(j, parents, items);
  return items;
}

}  // namespace mnrv::cli
